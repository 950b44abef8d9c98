"""DIMACS-family readers and writers.

Formats:
  CNF      p cnf <vars> <clauses>, zero-terminated clause lines
  QDIMACS  p cnf header, then `e`/`a` quantifier lines, then clauses
  DNF QBF  same layout with a `p dnf` header and term lines (non-standard,
           this package's own sibling of QDIMACS)
  WCNF     `h <lits> 0` for hard clauses, `<weight> <lits> 0` for soft
           ones.  Rational weights are scaled by the least common multiple
           of their denominators, recorded as `c scale <L>`.
Projection sets use the model-counting convention `c p show <vars> 0`.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .formula import Block, Cnf, Dnf, EXISTS, FORALL, InvalidFormula, Qbf, Wcnf, make_qbf


class ParseError(ValueError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


def _lits(tokens, lineno):
    try:
        vals = [int(x) for x in tokens]
    except ValueError as e:
        raise ParseError(f"bad integer ({e})", lineno) from None
    return vals


def _items_text(items):
    return "".join(" ".join(map(str, it)) + (" 0\n" if it else "0\n") for it in items)


def write_cnf(f: Cnf, comments=()) -> str:
    head = "".join(f"c {c}\n" for c in comments)
    return head + f"p cnf {f.num_vars} {len(f.clauses)}\n" + _items_text(f.clauses)


def _scan(text):
    """Yield (lineno, tokens) for non-empty lines."""
    for n, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if s and not s.startswith("%"):
            yield n, s.split()


def _read_body(text, kinds=("cnf", "dnf")):
    header = None
    prefix = []
    items = []
    show = None
    scale = None
    pending: list = []
    for n, toks in _scan(text):
        if toks[0] == "c":
            if len(toks) >= 3 and toks[1] == "p" and toks[2] == "show":
                vals = _lits(toks[3:], n)
                show = (show or []) + [v for v in vals if v != 0]
            elif len(toks) == 3 and toks[1] == "scale":
                scale = int(toks[2])
            continue
        if toks[0] == "p":
            if header is not None:
                raise ParseError("duplicate header", n)
            if len(toks) < 4 or toks[1] not in kinds:
                raise ParseError(f"bad header {' '.join(toks)!r}", n)
            try:
                header = (toks[1], int(toks[2]), int(toks[3]))
            except ValueError:
                raise ParseError("bad header counts", n) from None
            continue
        if header is None:
            raise ParseError("content before header", n)
        if toks[0] in ("e", "a"):
            if items:
                raise ParseError("quantifier line after clauses", n)
            vals = _lits(toks[1:], n)
            if not vals or vals[-1] != 0:
                raise ParseError("quantifier line must end with 0", n)
            prefix.append(Block(EXISTS if toks[0] == "e" else FORALL, tuple(vals[:-1])))
            continue
        pending.extend(_lits(toks, n))
        while 0 in pending:
            z = pending.index(0)
            items.append(tuple(pending[:z]))
            pending = pending[z + 1:]
    if header is None:
        raise ParseError("missing header")
    if pending:
        raise ParseError("last clause is not zero-terminated")
    kind, nv, nc = header
    if len(items) != nc:
        raise ParseError(f"header announces {nc} items, found {len(items)}")
    for it in items:
        for l in it:
            if abs(l) > nv:
                raise ParseError(f"literal {l} exceeds declared {nv} variables")
    return kind, nv, prefix, items, show, scale


def read_cnf(text: str) -> Cnf:
    kind, nv, prefix, items, _, _ = _read_body(text, ("cnf",))
    if prefix:
        raise ParseError("quantifier lines in plain CNF")
    return Cnf(nv, tuple(items))


def read_projection(text: str):
    """Variables listed on `c p show` lines, or None."""
    return _read_body(text, ("cnf", "dnf"))[4]


def write_dnf(d: Dnf, comments=()) -> str:
    head = "".join(f"c {c}\n" for c in comments)
    return head + f"p dnf {d.num_vars} {len(d.terms)}\n" + _items_text(d.terms)


def read_dnf(text: str) -> Dnf:
    kind, nv, prefix, items, _, _ = _read_body(text, ("dnf",))
    return Dnf(nv, tuple(items))


def write_qdimacs(q: Qbf, comments=()) -> str:
    m = q.matrix
    kind = "cnf" if isinstance(m, Cnf) else "dnf"
    out = "".join(f"c {c}\n" for c in comments)
    if kind == "dnf":
        out += "c non-standard: DNF matrix, one term per line\n"
    out += f"p {kind} {m.num_vars} {len(m.items)}\n"
    for b in q.prefix:
        out += f"{b.kind} " + " ".join(map(str, b.vars)) + " 0\n"
    return out + _items_text(m.items)


def read_qdimacs(text: str) -> Qbf:
    kind, nv, prefix, items, _, _ = _read_body(text)
    mat = Cnf(nv, tuple(items)) if kind == "cnf" else Dnf(nv, tuple(items))
    try:
        return make_qbf(prefix, mat)
    except InvalidFormula as e:
        raise ParseError(str(e)) from None


def write_wcnf(w: Wcnf, comments=()) -> str:
    scale = 1
    for _, wt in w.soft:
        scale = scale * wt.denominator // math.gcd(scale, wt.denominator)
    out = "".join(f"c {c}\n" for c in comments)
    out += f"c vars {w.num_vars}\nc scale {scale}\n"
    for c in w.hard:
        out += "h " + " ".join(map(str, c)) + (" 0\n" if c else "0\n")
    for c, wt in w.soft:
        out += f"{int(wt * scale)} " + " ".join(map(str, c)) + (" 0\n" if c else "0\n")
    return out


def read_wcnf(text: str) -> Wcnf:
    hard, soft = [], []
    scale = 1
    top = 0
    declared = 0
    for n, toks in _scan(text):
        if toks[0] == "c":
            if len(toks) == 3 and toks[1] == "scale":
                scale = int(toks[2])
            elif len(toks) == 3 and toks[1] == "vars":
                declared = int(toks[2])
            continue
        if toks[0] == "p":
            # pre-2022 header: p wcnf vars clauses [top]
            if len(toks) >= 4 and toks[1] == "wcnf":
                declared = int(toks[2])
                top = int(toks[4]) if len(toks) >= 5 else None
                continue
            raise ParseError("unsupported header", n)
        if toks[0] == "h":
            vals = _lits(toks[1:], n)
            if not vals or vals[-1] != 0:
                raise ParseError("clause must end with 0", n)
            hard.append(tuple(vals[:-1]))
            continue
        try:
            wt = Fraction(toks[0])
        except ValueError:
            raise ParseError(f"bad weight {toks[0]!r}", n) from None
        vals = _lits(toks[1:], n)
        if not vals or vals[-1] != 0:
            raise ParseError("clause must end with 0", n)
        if top and wt == top:
            hard.append(tuple(vals[:-1]))
        else:
            soft.append((tuple(vals[:-1]), wt / scale))
    nv = max([abs(l) for c in hard for l in c] + [abs(l) for c, _ in soft for l in c] + [declared])
    return Wcnf(nv, tuple(hard), tuple(soft))
