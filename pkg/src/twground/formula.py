"""Propositional objects: CNF, DNF, weighted CNF and QBF.

Literals are signed non-zero integers (DIMACS convention), clauses and
terms are tuples of literals, formulas are immutable.  A partial
assignment is any iterable of literals without complementary pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

EXISTS = "e"
FORALL = "a"


class PartialAssignment(ValueError):
    """Raised when a total assignment was required."""


class InconsistentAssignment(ValueError):
    pass


class InvalidFormula(ValueError):
    pass


def neg(lit: int) -> int:
    return -lit


def clean(lits: Iterable[int]) -> tuple:
    """Drop duplicate literals, keeping first occurrence order."""
    seen = set()
    out = []
    for l in lits:
        if l == 0:
            raise InvalidFormula("literal 0 is not allowed")
        if l not in seen:
            seen.add(l)
            out.append(l)
    return tuple(out)


def is_tautology(clause: Sequence[int]) -> bool:
    s = set(clause)
    return any(-l in s for l in s)


def _check_vars(items, num_vars):
    for c in items:
        for l in c:
            if abs(l) > num_vars:
                raise InvalidFormula(f"literal {l} exceeds num_vars={num_vars}")


def as_assignment(beta: Iterable[int]) -> frozenset:
    b = frozenset(beta)
    for l in b:
        if -l in b:
            raise InconsistentAssignment(f"variable {abs(l)} assigned both ways")
    return b


@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple = ()

    kind = "cnf"

    def __post_init__(self):
        cl = tuple(clean(c) for c in self.clauses)
        _check_vars(cl, self.num_vars)
        object.__setattr__(self, "clauses", cl)

    def __len__(self):
        return len(self.clauses)

    @property
    def items(self):
        return self.clauses

    def variables(self) -> set:
        return {abs(l) for c in self.clauses for l in c}


@dataclass(frozen=True)
class Dnf:
    num_vars: int
    terms: tuple = ()

    kind = "dnf"

    def __post_init__(self):
        tm = tuple(clean(t) for t in self.terms)
        _check_vars(tm, self.num_vars)
        object.__setattr__(self, "terms", tm)

    def __len__(self):
        return len(self.terms)

    @property
    def items(self):
        return self.terms

    def variables(self) -> set:
        return {abs(l) for t in self.terms for l in t}


@dataclass(frozen=True)
class Wcnf:
    num_vars: int
    hard: tuple = ()
    soft: tuple = ()  # ((clause, Fraction), ...)

    kind = "wcnf"

    def __post_init__(self):
        hard = tuple(clean(c) for c in self.hard)
        soft = []
        for c, w in self.soft:
            if isinstance(w, float):
                raise InvalidFormula("weights must be exact rationals")
            soft.append((clean(c), Fraction(w)))
        _check_vars(hard, self.num_vars)
        _check_vars([c for c, _ in soft], self.num_vars)
        object.__setattr__(self, "hard", hard)
        object.__setattr__(self, "soft", tuple(soft))

    @property
    def items(self):
        return self.hard + tuple(c for c, _ in self.soft)

    def variables(self) -> set:
        return {abs(l) for c in self.items for l in c}


@dataclass(frozen=True)
class Block:
    kind: str
    vars: tuple

    def __post_init__(self):
        if self.kind not in (EXISTS, FORALL):
            raise InvalidFormula(f"bad quantifier kind {self.kind!r}")
        object.__setattr__(self, "vars", tuple(dict.fromkeys(self.vars)))


def normalize_prefix(blocks: Iterable[Block]) -> tuple:
    """Merge adjacent same-kind blocks and drop empty ones."""
    out: list[Block] = []
    for b in blocks:
        if not b.vars:
            continue
        if out and out[-1].kind == b.kind:
            out[-1] = Block(b.kind, out[-1].vars + b.vars)
        else:
            out.append(b)
    return tuple(out)


@dataclass(frozen=True)
class Qbf:
    prefix: tuple
    matrix: Cnf | Dnf

    def __post_init__(self):
        prefix = normalize_prefix(self.prefix)
        seen = set()
        for b in prefix:
            for v in b.vars:
                if v in seen:
                    raise InvalidFormula(f"variable {v} quantified twice")
                if not 1 <= v <= self.matrix.num_vars:
                    raise InvalidFormula(f"quantified variable {v} out of range")
                seen.add(v)
        free = self.matrix.variables() - seen
        if free:
            raise InvalidFormula(f"free variables {sorted(free)[:5]}")
        if prefix:
            inner = prefix[-1].kind
            want = "cnf" if inner == EXISTS else "dnf"
            if self.matrix.kind != want:
                raise InvalidFormula(
                    f"innermost block {inner!r} requires a {want.upper()} matrix")
        object.__setattr__(self, "prefix", prefix)

    @property
    def num_vars(self):
        return self.matrix.num_vars

    def block_of(self) -> dict:
        return {v: i for i, b in enumerate(self.prefix) for v in b.vars}


def qa(q: Qbf) -> int:
    return max(len(q.prefix) - 1, 0)


def block_count(q: Qbf) -> int:
    return len(q.prefix)


def block_sizes(q: Qbf) -> list:
    return [len(b.vars) for b in q.prefix]


def make_qbf(prefix: Iterable[Block], matrix: Cnf | Dnf) -> Qbf:
    """Build a QBF, repairing a matrix kind that disagrees with the prefix.

    A CNF under an innermost universal block is reduced by deleting the
    innermost universal literals (universal reduction); a DNF under an
    innermost existential block gets the dual treatment.  Free matrix
    variables are bound existentially in front (QDIMACS convention).
    """
    blocks = list(normalize_prefix(prefix))
    bound = {v for b in blocks for v in b.vars}
    free = sorted(matrix.variables() - bound)
    if free:
        blocks = list(normalize_prefix([Block(EXISTS, tuple(free))] + blocks))
    while blocks:
        inner = blocks[-1]
        if (inner.kind == EXISTS) == (matrix.kind == "cnf"):
            break
        drop = set(inner.vars)
        items = tuple(tuple(l for l in c if abs(l) not in drop) for c in matrix.items)
        if matrix.kind == "cnf":
            matrix = Cnf(matrix.num_vars, items)
        else:
            # a contradictory term stays unsatisfiable after reduction
            keep = [r for c, r in zip(matrix.items, items) if not is_tautology(c)]
            matrix = Dnf(matrix.num_vars, keep)
        blocks.pop()
        blocks = list(normalize_prefix(blocks))
    if not blocks and matrix.variables():
        raise InvalidFormula("matrix variables left without quantifier")
    return Qbf(tuple(blocks), matrix)


def condition(f, beta: Iterable[int]):
    """Return f|beta (CNF or DNF), preserving item order."""
    b = as_assignment(beta)
    if isinstance(f, Cnf):
        out = []
        for c in f.clauses:
            if any(l in b for l in c):
                continue
            out.append(tuple(l for l in c if -l not in b))
        return Cnf(f.num_vars, tuple(out))
    if isinstance(f, Dnf):
        out = []
        for t in f.terms:
            if any(-l in b for l in t):
                continue
            out.append(tuple(l for l in t if l not in b))
        return Dnf(f.num_vars, tuple(out))
    raise TypeError(f"cannot condition {type(f).__name__}")


def evaluate(f, beta: Iterable[int]) -> bool:
    """Truth value of f under a total assignment (True means SAT)."""
    b = as_assignment(beta)
    assigned = {abs(l) for l in b}
    missing = [v for v in range(1, f.num_vars + 1) if v not in assigned]
    if missing:
        raise PartialAssignment(f"variables {missing[:5]} unassigned")
    g = condition(f, b)
    if isinstance(g, Cnf):
        return len(g.clauses) == 0
    return any(len(t) == 0 for t in g.terms)


def satisfied_by(f, model: set) -> bool:
    """Fast check for a total model given as a set of true literals."""
    items = f.items
    if isinstance(f, Dnf):
        return any(all(l in model for l in t) for t in items)
    return all(any(l in model for l in c) for c in items)


def primal_graph(f):
    from .graph import Graph

    edges = set()
    for c in f.items:
        vs = sorted({abs(l) for l in c})
        for i, u in enumerate(vs):
            for v in vs[i + 1:]:
                edges.add((u, v))
    return Graph(tuple(range(1, f.num_vars + 1)), frozenset(edges))


def renumber(f, order: Sequence[int]):
    """Rename variables so that order[i] becomes i+1; other vars must not occur."""
    m = {v: i + 1 for i, v in enumerate(order)}

    def r(c):
        return tuple(m[l] if l > 0 else -m[-l] for l in c)

    n = len(order)
    if isinstance(f, Cnf):
        return Cnf(n, tuple(r(c) for c in f.clauses))
    if isinstance(f, Dnf):
        return Dnf(n, tuple(r(t) for t in f.terms))
    if isinstance(f, Wcnf):
        return Wcnf(n, tuple(r(c) for c in f.hard), tuple((r(c), w) for c, w in f.soft))
    raise TypeError(type(f).__name__)


@dataclass
class VarPool:
    """Monotone allocator for auxiliary variables."""

    top: int
    names: dict = field(default_factory=dict)

    def new(self, name=None) -> int:
        self.top += 1
        if name is not None:
            self.names[name] = self.top
        return self.top

    def block(self, n: int) -> list:
        start = self.top + 1
        self.top += n
        return list(range(start, self.top + 1))
