"""Finite relational structures over the universe 1..n.

Text format::

    p struct <n>
    r <name> <arity>
    t <name> <e1> ... <ea>

Elements are 1-based.  `c` lines are comments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dimacs import ParseError
from ..graph import Graph
from .syntax import ArityError, MsoError


@dataclass(frozen=True)
class RelationalStructure:
    size: int
    relations: dict = field(default_factory=dict)  # name -> frozenset of tuples
    arities: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.size < 0:
            raise MsoError("universe size must be non-negative")
        rels = {}
        ar = dict(self.arities)
        for name, tuples in self.relations.items():
            ts = frozenset(tuple(t) for t in tuples)
            for t in ts:
                if name in ar and len(t) != ar[name]:
                    raise ArityError(f"tuple {t} does not match arity {ar[name]} of {name}")
                ar.setdefault(name, len(t))
                for e in t:
                    if not 1 <= e <= self.size:
                        raise MsoError(f"element {e} of {name}{t} outside the universe")
            rels[name] = ts
        for name, a in ar.items():
            if a < 1:
                raise ArityError(f"relation {name} needs arity at least 1")
            rels.setdefault(name, frozenset())
        object.__setattr__(self, "relations", dict(sorted(rels.items())))
        object.__setattr__(self, "arities", dict(sorted(ar.items())))

    @property
    def universe(self) -> range:
        return range(1, self.size + 1)

    @property
    def vocabulary(self) -> dict:
        return dict(self.arities)

    def holds(self, name, args) -> bool:
        return tuple(args) in self.relations[name]


def structure(size: int, **relations) -> RelationalStructure:
    return RelationalStructure(size, relations)


def gaifman_graph(s: RelationalStructure) -> Graph:
    edges = set()
    for ts in s.relations.values():
        for t in ts:
            for i, u in enumerate(t):
                for v in t[i + 1:]:
                    if u != v:
                        edges.add((min(u, v), max(u, v)))
    return Graph(tuple(s.universe), frozenset(edges))


def parse_structure(text: str) -> RelationalStructure:
    size = None
    ar: dict = {}
    rels: dict = {}
    for n, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks or toks[0] == "c":
            continue
        try:
            if toks[0] == "p":
                if size is not None or len(toks) != 3 or toks[1] != "struct":
                    raise ParseError("expected a single 'p struct <n>' header", n)
                size = int(toks[2])
            elif size is None:
                raise ParseError("content before header", n)
            elif toks[0] == "r":
                if len(toks) != 3:
                    raise ParseError("expected 'r <name> <arity>'", n)
                if toks[1] in ar:
                    raise ParseError(f"relation {toks[1]} declared twice", n)
                ar[toks[1]] = int(toks[2])
                rels[toks[1]] = set()
            elif toks[0] == "t":
                name = toks[1] if len(toks) > 1 else None
                if name not in ar:
                    raise ParseError(f"tuple for undeclared relation {name}", n)
                t = tuple(int(x) for x in toks[2:])
                if len(t) != ar[name]:
                    raise ParseError(f"{name} has arity {ar[name]}, tuple has {len(t)}", n)
                if not all(1 <= e <= size for e in t):
                    raise ParseError(f"element outside universe 1..{size}", n)
                rels[name].add(t)
            else:
                raise ParseError(f"unknown line type {toks[0]!r}", n)
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(str(e), n) from None
    if size is None:
        raise ParseError("missing 'p struct' header")
    return RelationalStructure(size, rels, ar)


def write_structure(s: RelationalStructure) -> str:
    lines = [f"p struct {s.size}"]
    for name, a in s.arities.items():
        lines.append(f"r {name} {a}")
    for name, ts in s.relations.items():
        for t in sorted(ts):
            lines.append(f"t {name} " + " ".join(map(str, t)))
    return "\n".join(lines) + "\n"
