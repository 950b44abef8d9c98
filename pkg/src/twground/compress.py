"""(Q)SAT encoded as MSO model checking over small-treewidth structures.

qsat_to_mso gives one element per variable and per clause; the sentence
has one set variable per quantifier block and a fixed first-order tail.

The compressed variants copy every variable into each bag that contains
it and pack the copies of one bag into "supernodes" of at most c
components.  Set variable S_i holds the i-th components, and sync
relations force copies of the same variable to agree.  Groups are
inherited along the decomposition, so the sync edges between two adjacent
bags form a matching and the structure keeps width ceil((k+1)/c).
"""

from __future__ import annotations

from math import ceil

from .common import BoundViolation, WrongShape, check_bound
from .encode import dnf_to_cnf
from .formula import Cnf, EXISTS, FORALL, Qbf, primal_graph
from .mso.structure import RelationalStructure, gaifman_graph
from .mso.syntax import FIRST, SECOND, MsoFormula, Quant, mem, rel
from .treedec import (TreeDecomposition, compact, cover_vertices, label, matching_path,
                      min_fill, validate)


class MsoInstance(tuple):
    """(structure, sentence) with a decomposition of the structure.

    `legend` maps elements back to the input: ("var", v), ("clause", i)
    or ("group", node, (v1, .., vr)).
    """

    def __new__(cls, structure, formula, td, legend, log=None, extra=None):
        obj = super().__new__(cls, (structure, formula))
        obj.td = td
        obj.legend = legend
        obj.log = list(log or [])
        obj.extra = dict(extra or {})
        return obj

    @property
    def structure(self) -> RelationalStructure:
        return self[0]

    @property
    def formula(self) -> MsoFormula:
        return self[1]


def _factored(terms) -> list:
    """CNF over atom literals equivalent to OR of the conjunctions `terms`."""
    ids: dict = {}
    back: dict = {}

    def lit(p, a):
        if a not in ids:
            ids[a] = len(ids) + 1
            back[ids[a]] = a
        return ids[a] if p else -ids[a]

    cnf = dnf_to_cnf([tuple(lit(p, a) for p, a in t) for t in terms])
    return [tuple((l > 0, back[abs(l)]) for l in c) for c in cnf]


def _matrix_cnf(q) -> Cnf:
    if isinstance(q, Cnf):
        return q
    if not isinstance(q.matrix, Cnf):
        raise WrongShape("expected a CNF matrix")
    return q.matrix


def _qbf_td(f: Cnf, td):
    g = primal_graph(f)
    if td is None:
        td = min_fill(g)
    rep = validate(g, td)
    if not rep.valid:
        raise WrongShape(f"decomposition does not fit the formula: {rep}")
    return cover_vertices(td, range(1, f.num_vars + 1))


def _attach_clauses(bags, parent, ltd, clause_elem, elems_of):
    for t, ls in enumerate(ltd.labels):
        for i in ls:
            bags.append(set(elems_of(t)) | {clause_elem[i]})
            parent.append(t)


def _path_repair(bags, parent, pairs):
    td = matching_path(TreeDecomposition(tuple(bags), tuple(parent)), pairs)
    return list(td.bags), list(td.parent)


def _finish(s, bags, parent, bound, stage, k_in):
    td = compact(TreeDecomposition(tuple(bags), tuple(parent)))
    td = cover_vertices(td, s.universe)
    rep = validate(gaifman_graph(s), td)
    if not rep.valid:
        raise BoundViolation(f"{stage}: emitted decomposition is invalid: {rep}")
    check_bound(td.width, bound, stage)
    log = [{"stage": stage, "width_in": k_in, "width_out": td.width, "bound": bound,
            "elements": s.size, "ok": True}]
    return td, log


def qsat_to_mso(q: Qbf, td: TreeDecomposition | None = None) -> MsoInstance:
    """S |= phi  iff  q is true.

    Universe: the quantified variables (ascending) followed by the clauses.
    Relations block<j>(x), clause(c), pos(x, c), neg(x, c).  The sentence
    is Q1 S1 .. Qb Sb forall c exists x . clause(c) -> OR_j
    (block<j>(x) & pos(x,c) & S<j>(x)) | (block<j>(x) & neg(x,c) & !S<j>(x)).
    """
    f = _matrix_cnf(q)
    blocks = q.prefix
    vs = sorted(v for b in blocks for v in b.vars)
    elem = {v: i + 1 for i, v in enumerate(vs)}
    cl = {i: len(vs) + i + 1 for i in range(len(f.clauses))}
    rels: dict = {f"block{j + 1}": {(elem[v],) for v in b.vars} for j, b in enumerate(blocks)}
    rels["clause"] = {(e,) for e in cl.values()}
    rels["pos"] = {(elem[l], cl[i]) for i, c in enumerate(f.clauses) for l in c if l > 0}
    rels["neg"] = {(elem[-l], cl[i]) for i, c in enumerate(f.clauses) for l in c if l < 0}
    ar = {name: 1 for name in rels}
    ar["pos"] = ar["neg"] = 2
    s = RelationalStructure(len(vs) + len(cl), rels, ar)

    prefix = [Quant(b.kind, f"S{j + 1}", SECOND) for j, b in enumerate(blocks)]
    prefix += [Quant(FORALL, "c", FIRST), Quant(EXISTS, "x", FIRST)]
    terms = []
    for j in range(len(blocks)):
        B, S = rel(f"block{j + 1}", "x"), mem(f"S{j + 1}", "x")
        terms.append(((True, B), (True, rel("pos", "x", "c")), (True, S)))
        terms.append(((True, B), (True, rel("neg", "x", "c")), (False, S)))
    matrix = [((False, rel("clause", "c")),) + c for c in _factored(terms)]
    phi = MsoFormula(tuple(prefix), tuple(matrix), (), dict(ar))

    ptd = _qbf_td(f, td)
    k_in = ptd.width
    ltd = label(ptd, f)
    bags = [{elem[v] for v in b if v in elem} for b in ltd.bags]
    parent = list(ltd.parent)
    _attach_clauses(bags, parent, ltd, cl, lambda t: bags[t])
    out_td, log = _finish(s, bags, parent, k_in + 1, "qsat2mso", k_in)
    legend = {elem[v]: ("var", v) for v in vs}
    legend.update({e: ("clause", i) for i, e in cl.items()})
    return MsoInstance(s, phi, out_td, legend, log)


def _groups(ltd, c):
    """Per node: list of groups (sorted variable tuples) and each group's origin.

    origin[t][g] is the index of the parent group it continues, or None.
    """
    groups = [None] * len(ltd.bags)
    origin = [None] * len(ltd.bags)
    for t in reversed(ltd.postorder):
        p = ltd.parent[t]
        bag = ltd.bags[t]
        cur, orig = [], []
        if p is not None:
            for gi, g in enumerate(groups[p]):
                kept = [v for v in g if v in bag]
                if kept:
                    cur.append(kept)
                    orig.append(gi)
        seen = {v for g in cur for v in g}
        new = sorted(v for v in bag if v not in seen)
        for g in cur:
            while len(g) < c and new:
                g.append(new.pop(0))
        while new:
            cur.append(new[:c])
            orig.append(None)
            new = new[c:]
        groups[t] = [tuple(sorted(g)) for g in cur]
        origin[t] = orig
    return groups, origin


def _supernodes(f: Cnf, td, c: int, blocks=None):
    """Shared structure part of the compressed encodings."""
    if c < 1:
        raise ValueError("group size must be at least 1")
    ptd = _qbf_td(f, td)
    k_in = ptd.width
    ltd = label(ptd, f)
    groups, origin = _groups(ltd, c)
    gid: dict = {}
    legend: dict = {}
    for t in range(len(ltd.bags)):
        for gi, g in enumerate(groups[t]):
            gid[t, gi] = len(gid) + 1
            legend[gid[t, gi]] = ("group", t, g)
    ncl = len(f.clauses)
    cl = {i: len(gid) + i + 1 for i in range(ncl)}
    legend.update({e: ("clause", i) for i, e in cl.items()})

    rels: dict = {"clause": {(e,) for e in cl.values()}}
    for i in range(1, c + 1):
        rels[f"pos{i}"] = set()
        rels[f"neg{i}"] = set()
        for j in range(1, c + 1):
            rels[f"sync{i}_{j}"] = set()
    for i, clause in enumerate(f.clauses):
        t = ltd.node_of[i]
        for gi, g in enumerate(groups[t]):
            for pos, v in enumerate(g, 1):
                if v in clause:
                    rels[f"pos{pos}"].add((cl[i], gid[t, gi]))
                if -v in clause:
                    rels[f"neg{pos}"].add((cl[i], gid[t, gi]))
    for t in range(1, len(ltd.bags)):
        p = ltd.parent[t]
        for gi, og in enumerate(origin[t]):
            if og is None:
                continue
            a, b = groups[p][og], groups[t][gi]
            for v in a:
                if v in b:
                    rels[f"sync{a.index(v) + 1}_{b.index(v) + 1}"].add((gid[p, og], gid[t, gi]))
    if blocks is not None:
        where = {v: j for j, b in enumerate(blocks) for v in b.vars}
        first = set()
        for j in range(1, len(blocks) + 1):
            for i in range(1, c + 1):
                rels[f"blk{j}_{i}"] = set()
        for i in range(1, c + 1):
            rels[f"canon{i}"] = set()
        for t in reversed(ltd.postorder):
            for gi, g in enumerate(groups[t]):
                for pos, v in enumerate(g, 1):
                    if v in where:
                        rels[f"blk{where[v] + 1}_{pos}"].add((gid[t, gi],))
                    if v not in first:
                        first.add(v)
                        rels[f"canon{pos}"].add((gid[t, gi],))
    ar = {name: (2 if name.startswith(("pos", "neg", "sync")) else 1) for name in rels}
    s = RelationalStructure(len(gid) + ncl, rels, ar)

    # one bag per node, clause leaves, and a swap path along every tree edge
    bags = [{gid[t, gi] for gi in range(len(groups[t]))} for t in range(len(ltd.bags))]
    parent = list(ltd.parent)
    _attach_clauses(bags, parent, ltd, cl, lambda t: bags[t])
    pairs = {}
    for t in range(1, len(ltd.bags)):
        p = ltd.parent[t]
        pairs[t] = [(gid[p, og], gid[t, gi]) for gi, og in enumerate(origin[t]) if og is not None]
    bags, parent = _path_repair(bags, parent, pairs)
    bound = ceil((k_in + 1) / c)
    out_td, log = _finish(s, bags, parent, bound, "compress", k_in)
    log[0]["group_size"] = c
    return s, out_td, legend, log, ar


def _tail():
    return [Quant(FORALL, "x", FIRST), Quant(FORALL, "z", FIRST), Quant(EXISTS, "y", FIRST)]


def _sync_clauses(T, c):
    out = []
    for i in range(1, c + 1):
        for j in range(1, c + 1):
            sy = (False, rel(f"sync{i}_{j}", "x", "z"))
            a, b = mem(f"{T}{i}", "x"), mem(f"{T}{j}", "z")
            out.append((sy, (False, a), (True, b)))
            out.append((sy, (True, a), (False, b)))
    return out


def sat_to_mso_compressed(f: Cnf, td: TreeDecomposition | None = None, c: int = 2) -> MsoInstance:
    """f is satisfiable  iff  S |= phi; S has width at most ceil((k+1)/c).

    phi = exists S1..Sc forall x forall z exists y .
          [clause(x) -> OR_i (pos_i(x,y) & S_i(y)) | (neg_i(x,y) & !S_i(y))]
        & AND_{i,j} [sync_{i,j}(x,z) -> (S_i(x) <-> S_j(z))]
    """
    f = _matrix_cnf(f)
    s, out_td, legend, log, ar = _supernodes(f, td, c)
    prefix = [Quant(EXISTS, f"S{i}", SECOND) for i in range(1, c + 1)] + _tail()
    terms = []
    for i in range(1, c + 1):
        S = mem(f"S{i}", "y")
        terms.append(((True, rel(f"pos{i}", "x", "y")), (True, S)))
        terms.append(((True, rel(f"neg{i}", "x", "y")), (False, S)))
    matrix = [((False, rel("clause", "x")),) + cl for cl in _factored(terms)]
    matrix += _sync_clauses("S", c)
    phi = MsoFormula(tuple(prefix), tuple(matrix), (), dict(ar))
    return MsoInstance(s, phi, out_td, legend, log)


def qsat_to_mso_compressed(q: Qbf, td: TreeDecomposition | None = None, c: int = 2) -> MsoInstance:
    """q is true  iff  S |= phi, with the structure of sat_to_mso_compressed.

    Block j gets set variables S<j>_1..S<j>_c.  A universal player could
    choose different values for the copies of one variable, so each
    universal block is mirrored by existential sets M<j>_i in the next
    block: the mirror must be sync-consistent and agree with S<j> on the
    canonical (topmost) copy, and clauses read the mirror.
    """
    f = _matrix_cnf(q)
    blocks = q.prefix
    s, out_td, legend, log, ar = _supernodes(f, td, c, blocks)
    comps = range(1, c + 1)
    prefix = []
    reads = {}
    for j, b in enumerate(blocks, 1):
        prefix += [Quant(b.kind, f"S{j}_{i}", SECOND) for i in comps]
        if j > 1 and blocks[j - 2].kind == FORALL:
            prefix += [Quant(EXISTS, f"M{j - 1}_{i}", SECOND) for i in comps]
        reads[j] = f"M{j}_" if b.kind == FORALL else f"S{j}_"
    prefix += _tail()
    terms = []
    for j in range(1, len(blocks) + 1):
        for i in comps:
            B, T = rel(f"blk{j}_{i}", "y"), mem(f"{reads[j]}{i}", "y")
            terms.append(((True, B), (True, rel(f"pos{i}", "x", "y")), (True, T)))
            terms.append(((True, B), (True, rel(f"neg{i}", "x", "y")), (False, T)))
    matrix = [((False, rel("clause", "x")),) + cl for cl in _factored(terms)]
    for j, b in enumerate(blocks, 1):
        matrix += _sync_clauses(reads[j], c)
        if b.kind == FORALL:
            for i in comps:
                cn = (False, rel(f"canon{i}", "x"))
                m, sv = mem(f"M{j}_{i}", "x"), mem(f"S{j}_{i}", "x")
                matrix.append((cn, (False, m), (True, sv)))
                matrix.append((cn, (True, m), (False, sv)))
    phi = MsoFormula(tuple(prefix), tuple(matrix), (), dict(ar))
    return MsoInstance(s, phi, out_td, legend, log)
