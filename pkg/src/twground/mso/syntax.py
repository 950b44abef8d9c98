"""MSO formulas in prenex form with a CNF matrix over atoms."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..formula import EXISTS, FORALL

FIRST = 1
SECOND = 2


class MsoError(ValueError):
    pass


class ArityError(MsoError):
    pass


class UnboundVariable(MsoError):
    pass


class VocabularyMismatch(MsoError):
    pass


@dataclass(frozen=True)
class Quant:
    kind: str  # EXISTS / FORALL
    var: str
    order: int  # FIRST / SECOND

    def __post_init__(self):
        if self.kind not in (EXISTS, FORALL) or self.order not in (FIRST, SECOND):
            raise MsoError(f"bad quantifier {self}")


@dataclass(frozen=True)
class Atom:
    """rel: name=R, args=(x1..xa); mem: name=X, args=(x,); eq: name='', args=(x, y)."""

    kind: str
    name: str
    args: tuple

    def __str__(self):
        if self.kind == "eq":
            return f"{self.args[0]} = {self.args[1]}"
        return f"{self.name}({', '.join(self.args)})"


def rel(name, *args) -> Atom:
    return Atom("rel", name, tuple(args))


def mem(X, x) -> Atom:
    return Atom("mem", X, (x,))


def eq(x, y) -> Atom:
    return Atom("eq", "", (x, y))


@dataclass(frozen=True)
class MsoFormula:
    prefix: tuple
    matrix: tuple  # clauses: tuples of (positive: bool, Atom)
    free_set_vars: tuple = ()
    vocabulary: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "matrix", tuple(tuple(c) for c in self.matrix))
        object.__setattr__(self, "free_set_vars", tuple(self.free_set_vars))
        voc = dict(self.vocabulary)
        for a in self.atoms():
            if a.kind == "rel":
                if a.name in voc and voc[a.name] != len(a.args):
                    raise ArityError(f"{a.name} used with arity {len(a.args)}, declared {voc[a.name]}")
                voc.setdefault(a.name, len(a.args))
        object.__setattr__(self, "vocabulary", voc)
        self._check()

    def _check(self):
        seen = {}
        for v in self.free_set_vars:
            if v in seen:
                raise MsoError(f"variable {v} declared twice")
            seen[v] = SECOND
        for q in self.prefix:
            if q.var in seen:
                raise MsoError(f"variable {q.var} is bound twice")
            if q.order == SECOND and q.var in self.vocabulary:
                raise MsoError(f"set variable {q.var} clashes with a relation symbol")
            seen[q.var] = q.order
        for a in self.atoms():
            fo = a.args
            for x in fo:
                if x not in seen:
                    raise UnboundVariable(f"variable {x} in {a} is not bound")
                if seen[x] != FIRST:
                    raise MsoError(f"{x} in {a} must be a first-order variable")
            if a.kind == "mem":
                if a.name not in seen:
                    raise UnboundVariable(f"set variable {a.name} is not bound")
                if seen[a.name] != SECOND:
                    raise MsoError(f"{a.name} in {a} must be a set variable")

    def atoms(self) -> list:
        out = []
        for c in self.matrix:
            for _, a in c:
                if a not in out:
                    out.append(a)
        return out

    @property
    def fo_vars(self):
        return [q.var for q in self.prefix if q.order == FIRST]

    @property
    def so_vars(self):
        return [q.var for q in self.prefix if q.order == SECOND]

    def blocks(self) -> list:
        out = []
        for q in self.prefix:
            if out and out[-1][0] == q.kind:
                out[-1][1].append(q)
            else:
                out.append((q.kind, [q]))
        return out

    @property
    def qa(self) -> int:
        return max(len(self.blocks()) - 1, 0)

    @property
    def bs(self) -> int:
        return max((len(b) for _, b in self.blocks()), default=0)

    @property
    def size(self) -> int:
        """Quantifiers + literal occurrences + negations + binary connectives."""
        lits = sum(len(c) for c in self.matrix)
        negs = sum(1 for c in self.matrix for p, _ in c if not p)
        conn = sum(max(len(c) - 1, 0) for c in self.matrix) + max(len(self.matrix) - 1, 0)
        return len(self.prefix) + lits + negs + conn

    def close(self, kind=EXISTS) -> "MsoFormula":
        """Bind the free set variables in front with `kind`."""
        pre = tuple(Quant(kind, X, SECOND) for X in self.free_set_vars)
        return MsoFormula(pre + self.prefix, self.matrix, (), self.vocabulary)


def format_mso(phi: MsoFormula) -> str:
    """Text that parse_mso reads back to an equal formula."""
    words = {(EXISTS, FIRST): "exists", (FORALL, FIRST): "forall",
             (EXISTS, SECOND): "exists2", (FORALL, SECOND): "forall2"}
    parts = []
    if phi.free_set_vars:
        parts.append("free2 " + ", ".join(phi.free_set_vars) + ";")
    pre = " ".join(f"{words[q.kind, q.order]} {q.var}" for q in phi.prefix)
    if not phi.matrix:
        body = "true"
    else:
        cl = []
        for c in phi.matrix:
            if not c:
                cl.append("false")
                continue
            lits = [("" if p else "!") + (f"({a})" if a.kind == "eq" and not p else str(a)) for p, a in c]
            cl.append("(" + " | ".join(lits) + ")")
        body = " & ".join(cl)
    parts.append((pre + " . " if pre else ". ") + body)
    return "\n".join(parts) + "\n"
