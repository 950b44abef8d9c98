"""Random instance generators and standard structures shared by the tests."""

from __future__ import annotations

import random
from itertools import combinations, product

from pysat.solvers import Solver

from twground.formula import Block, Cnf, Dnf, EXISTS, FORALL, make_qbf
from twground.mso import RelationalStructure, eq, ground_to_qbf, mem, parse_mso, rel
from twground.mso.syntax import FIRST, SECOND, MsoFormula, Quant

PHI_3COL = ("exists2 R, G, B forall x, y . (R(x) | G(x) | B(x)) & "
            "(E(x,y) -> !(R(x) & R(y)) & !(G(x) & G(y)) & !(B(x) & B(y)))")
PHI_UNDIR = "forall x, y . E(x,y) -> E(y,x)"
PHI_DS = "forall x exists y . X(x) | (E(x,y) & X(y))"


def random_cnf(rng: random.Random, n: int, m: int, kmax: int = 3) -> Cnf:
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), rng.randint(1, min(kmax, n)))
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return Cnf(n, tuple(clauses))


def random_qbf(rng: random.Random, n: int, nblocks: int, m: int, kmax: int = 3, first=None):
    """Blocks partition 1..n; the matrix kind follows the innermost block."""
    vs = list(range(1, n + 1))
    rng.shuffle(vs)
    cuts = sorted(rng.sample(range(1, n), nblocks - 1)) if nblocks > 1 else []
    parts = [vs[a:b] for a, b in zip([0] + cuts, cuts + [n])]
    kind = first or rng.choice([EXISTS, FORALL])
    blocks = []
    for p in parts:
        blocks.append(Block(kind, tuple(sorted(p))))
        kind = FORALL if kind == EXISTS else EXISTS
    items = []
    for _ in range(m):
        chosen = rng.sample(range(1, n + 1), rng.randint(1, min(kmax, n)))
        items.append(tuple(v if rng.random() < 0.5 else -v for v in chosen))
    mat = Cnf(n, tuple(items)) if blocks[-1].kind == EXISTS else Dnf(n, tuple(items))
    return make_qbf(blocks, mat)


def all_clauses(n: int) -> list:
    """Every non-empty clause over 1..n without complementary pairs."""
    out = []
    for k in range(1, n + 1):
        for vs in combinations(range(1, n + 1), k):
            for signs in product((1, -1), repeat=k):
                out.append(tuple(s * v for s, v in zip(signs, vs)))
    return out


def tiny_cnfs(max_vars: int = 3, max_clauses: int = 3):
    """All CNFs with up to max_vars variables and max_clauses clauses (as sets)."""
    for n in range(0, max_vars + 1):
        pool = all_clauses(n)
        for m in range(0, max_clauses + 1):
            for cs in combinations(pool, m):
                yield Cnf(n, cs)


def random_structure(rng: random.Random, n: int | None = None, maxn: int = 5) -> RelationalStructure:
    n = n or rng.randint(1, maxn)
    E = {(rng.randint(1, n), rng.randint(1, n)) for _ in range(rng.randint(0, 2 * n))}
    P = {(u,) for u in range(1, n + 1) if rng.random() < 0.5}
    return RelationalStructure(n, {"E": E, "P": P}, {"E": 2, "P": 1})


def random_mso(rng: random.Random, nso=None, nfo=None, free: int = 0) -> MsoFormula:
    """Prenex sentence over E/2 and P/1 with shuffled SO and FO quantifiers."""
    nso = rng.randint(0, 2) if nso is None else nso
    nfo = rng.randint(1, 2) if nfo is None else nfo
    qs = [(SECOND, f"X{i}") for i in range(nso)] + [(FIRST, f"x{i}") for i in range(nfo)]
    rng.shuffle(qs)
    prefix = [Quant(rng.choice([EXISTS, FORALL]), v, o) for o, v in qs]
    fvs = [q.var for q in prefix if q.order == FIRST]
    svs = [q.var for q in prefix if q.order == SECOND] + [f"F{i}" for i in range(free)]

    def atom():
        r = rng.random()
        if r < 0.3:
            return rel("E", rng.choice(fvs), rng.choice(fvs))
        if r < 0.45:
            return rel("P", rng.choice(fvs))
        if r < 0.6:
            return eq(rng.choice(fvs), rng.choice(fvs))
        if svs:
            return mem(rng.choice(svs), rng.choice(fvs))
        return rel("P", rng.choice(fvs))

    mat = [tuple((rng.random() < 0.5, atom()) for _ in range(rng.randint(1, 3)))
           for _ in range(rng.randint(1, 3))]
    return MsoFormula(tuple(prefix), tuple(mat), tuple(f"F{i}" for i in range(free)), {"E": 2, "P": 1})


def graph_structure(n: int, edges, directed: bool = False) -> RelationalStructure:
    E = set()
    for a, b in edges:
        E.add((a, b))
        if not directed:
            E.add((b, a))
    return RelationalStructure(n, {"E": E}, {"E": 2})


def cycle(n: int) -> RelationalStructure:
    return graph_structure(n, [(i, i % n + 1) for i in range(1, n + 1)])


def path(n: int) -> RelationalStructure:
    return graph_structure(n, [(i, i + 1) for i in range(1, n)])


def clique(n: int) -> RelationalStructure:
    return graph_structure(n, list(combinations(range(1, n + 1), 2)))


def parse(text: str) -> MsoFormula:
    return parse_mso(text, {"E": 2})


# Running 5-variable example: three clauses and a 3-bag path decomposition.
RUNNING_CNF = Cnf(5, ((1, 2, -5), (-2, 3, 4, 5), (1, 2, -4, -5)))
RUNNING_BAGS = ({1, 2, 5}, {1, 2, 4, 5}, {2, 3, 4, 5})


def atom_holds(a, s, pick, sets):
    if a.kind == "eq":
        return pick[a.args[0]] == pick[a.args[1]]
    if a.kind == "mem":
        return pick[a.args[0]] in sets[a.name]
    return tuple(pick[x] for x in a.args) in s.relations[a.name]


def check_models(phi, s, limit=300):
    """Enumerate up to `limit` models of the grounded matrix and check the indicator invariants.

    Existential first-order indicators must pick exactly one element, and when
    every indicator is one-hot each atom variable must match the structure.
    """
    r = ground_to_qbf(phi, s)
    q = r.formula
    ind, atoms = r.extra["indicators"], r.extra["atoms"]
    fo = [x.var for x in phi.prefix if x.order == FIRST]
    ex = {x.var for x in phi.prefix if x.order == FIRST and x.kind == EXISTS}
    so = [x.var for x in phi.prefix if x.order == SECOND]
    seen = 0
    with Solver(bootstrap_with=[list(c) for c in q.matrix.clauses]) as sv:
        while seen < limit and sv.solve():
            m = set(sv.get_model())
            chosen = {x: [u for u in s.universe if ind[x][u] in m] for x in fo}
            for x in ex:
                assert len(chosen[x]) == 1
            if all(len(v) == 1 for v in chosen.values()):
                pick = {x: v[0] for x, v in chosen.items()}
                sets = {X: {u for u in s.universe if ind[X][u] in m} for X in so}
                for a, v in atoms.items():
                    assert (v in m) == atom_holds(a, s, pick, sets)
            sv.add_clause([-l for l in m])
            seen += 1
    return seen
