"""Elimination of the innermost quantifier block along a tree decomposition.

For a node t and an assignment alpha of the eliminated variables in
bag(t), the fresh variable sat[t, alpha] states that the part of the
matrix labeled below t is satisfied "for all" (universal block) or "for
some" (existential block) extension of alpha to the eliminated variables
forgotten below t.  Children are combined through sat<[t, t', alpha],
which ranges over the child assignments beta that agree with alpha on
the shared variables.

Universal elimination turns a DNF into a CNF whose fresh variables join
the enclosing existential block; existential elimination is the dual and
its fresh variables join the enclosing universal block, so the
definitions appear negated as DNF terms.

Fresh variables are allocated per node in post-order: the item variables
for the node's label (one per alpha), then sat<[t, c, .] for each child
c, then sat[t, .].  Within a group alphas are enumerated lexicographically
(smallest variable most significant, false before true).
"""

from __future__ import annotations

from .common import Reduction, ResourceLimit, WrongShape, check_bound
from .encode import iff_and, iff_or, local_assignments, not_iff_and, not_iff_or
from .formula import (Block, Cnf, Dnf, EXISTS, FORALL, Qbf, make_qbf, normalize_prefix)
from .graph import Graph
from .treedec import (TreeDecomposition, cover_vertices, min_fill, prepare)

DEFAULT_MAX_CLAUSES = 1 << 22
MAX_LOCAL = 24
# min-fill on larger intermediate matrices costs more than it saves
REDECOMPOSE_LIMIT = 5000


def _plan(ltd, S, items, max_clauses):
    """Local eliminated variables per node and a size estimate."""
    local = [tuple(sorted(v for v in bag if v in S)) for bag in ltd.bags]
    for t, lv in enumerate(local):
        if len(lv) > MAX_LOCAL:
            raise ResourceLimit(f"node {t} has {len(lv)} eliminated variables in its bag")
    est = 0
    for t in range(len(ltd.bags)):
        n = 1 << len(local[t])
        per = sum(len(items[i]) + 1 for i in ltd.labels[t]) + len(ltd.labels[t]) + 2
        for c in ltd.children[t]:
            extra = len(set(local[c]) - set(local[t]))
            per += 2 + 2 * (1 << extra)
        est += n * per
    if est > max_clauses:
        raise ResourceLimit(f"elimination would emit about {est} constraints (cap {max_clauses})")
    return local


def _project(alpha, shared_idx):
    return tuple(alpha[i] for i in shared_idx)


class _Emitter:
    """Allocates fresh variables and emits definitions, optionally folding.

    With folding, a definition whose right-hand side is constant or a
    single literal gets no fresh variable: the value is propagated.  The
    result is the same construction with some variables substituted, so
    every certified bag only shrinks.
    """

    def __init__(self, top, positive, fold):
        self.top = top
        self.positive = positive
        self.fold = fold
        self.out = []

    def fresh(self):
        self.top += 1
        return self.top

    def _fresh_for(self, value):
        s = self.fresh()
        if value is True:
            self.out.append((s,) if self.positive else (-s,))
        elif value is False:
            self.out.append((-s,) if self.positive else (s,))
        else:
            self.out.extend(iff_and(s, [value]) if self.positive else not_iff_and(s, [value]))
        return s

    def _combine(self, parts, conj):
        absorbing, neutral = (False, True) if conj else (True, False)
        if self.fold:
            lits = []
            for p in parts:
                if p is absorbing:
                    return absorbing
                if p is not neutral and p not in lits:
                    lits.append(p)
            if any(-l in lits for l in lits):
                return absorbing
            if not lits:
                return neutral
            if len(lits) == 1:
                return lits[0]
            parts = lits
        else:
            parts = [self._fresh_for(p) if isinstance(p, bool) else p for p in parts]
        s = self.fresh()
        if conj:
            self.out.extend(iff_and(s, parts) if self.positive else not_iff_and(s, parts))
        else:
            self.out.extend(iff_or(s, parts) if self.positive else not_iff_or(s, parts))
        return s

    def conj(self, parts):
        return self._combine(parts, True)

    def disj(self, parts):
        return self._combine(parts, False)

    def const(self, value):
        return value if self.fold else self._fresh_for(value)


def _vars_of(values):
    return {abs(v) for v in values if not isinstance(v, bool)}


def _build(q: Qbf, td: TreeDecomposition, universal: bool, max_clauses: int, fold: bool):
    m = q.matrix
    S = set(q.prefix[-1].vars)
    k_in = td.width
    td = cover_vertices(td, m.variables())
    ltd = prepare(td, m)
    items = m.items
    local = _plan(ltd, S, items, max_clauses)
    alphas = [local_assignments(lv) for lv in local]
    em = _Emitter(m.num_vars, universal, fold)
    node_val: dict = {}
    slot_vars: dict = {}

    for t in ltd.postorder:
        lv = local[t]
        mine = []
        item_vals = {}
        for i in ltd.labels[t]:
            it = items[i]
            vals = []
            for alpha in alphas[t]:
                aset = set(alpha)
                if universal:
                    # a term under alpha: falsified, or the conjunction of what remains
                    if any(-l in aset for l in it):
                        v = em.const(False)
                    else:
                        v = em.conj([l for l in it if l not in aset])
                else:
                    if any(l in aset for l in it):
                        v = em.const(True)
                    else:
                        v = em.disj([l for l in it if -l not in aset])
                vals.append(v)
            item_vals[i] = vals
            mine.extend(vals)
        edge_vals = {}
        for c in ltd.children[t]:
            pos_c = {v: i for i, v in enumerate(local[c])}
            shared = [v for v in lv if v in pos_c]
            idx_t = [lv.index(v) for v in shared]
            idx_c = [pos_c[v] for v in shared]
            by_key: dict = {}
            for b_idx, beta in enumerate(alphas[c]):
                by_key.setdefault(_project(beta, idx_c), []).append(node_val[c][b_idx])
            vals = []
            for alpha in alphas[t]:
                compat = by_key[_project(alpha, idx_t)]
                vals.append(em.conj(compat) if universal else em.disj(compat))
            edge_vals[c] = vals
            mine.extend(vals)
        nv = []
        for a_idx in range(len(alphas[t])):
            parts = [item_vals[i][a_idx] for i in ltd.labels[t]]
            parts += [edge_vals[c][a_idx] for c in ltd.children[t]]
            nv.append(em.disj(parts) if universal else em.conj(parts))
        node_val[t] = nv
        mine.extend(nv)
        slot_vars[t] = _vars_of(mine)

    if universal:
        for v in node_val[0]:
            if v is False:
                em.out.append(())
            elif v is not True:
                em.out.append((v,))
    else:
        if any(v is True for v in node_val[0]):
            em.out.append(())
        else:
            em.out.extend((v,) for v in node_val[0] if v is not False)

    bags = []
    for t, bag in enumerate(ltd.bags):
        nb = {v for v in bag if v not in S} | slot_vars[t]
        for c in ltd.children[t]:
            nb |= _vars_of(node_val[c])
        bags.append(frozenset(nb))
    out_td = TreeDecomposition(tuple(bags), ltd.parent)
    top = em.top
    # eliminated variables stay in the numbering; give them singleton bags
    out_td = cover_vertices(out_td, range(1, top + 1))
    fresh = tuple(range(m.num_vars + 1, top + 1))
    bound = 12 * (1 << max(k_in, 0))
    check_bound(out_td.width, bound, "quantifier elimination")
    return em.out, top, fresh, out_td, k_in, bound


def eliminate_forall(q: Qbf, td: TreeDecomposition, max_clauses: int = DEFAULT_MAX_CLAUSES,
                     fold: bool = False) -> Reduction:
    """Remove the innermost universal block of a QBF with DNF matrix."""
    if not q.prefix or q.prefix[-1].kind != FORALL or not isinstance(q.matrix, Dnf):
        raise WrongShape("eliminate_forall needs an innermost universal block and a DNF matrix")
    clauses, top, fresh, out_td, k_in, bound = _build(q, td, True, max_clauses, fold)
    prefix = list(q.prefix[:-1]) + [Block(EXISTS, fresh)]
    nq = Qbf(tuple(normalize_prefix(prefix)), Cnf(top, tuple(clauses)))
    log = [{"stage": "eliminate", "kind": FORALL, "block_size": len(q.prefix[-1].vars),
            "width_in": k_in, "width_out": out_td.width, "bound": bound, "vars": top,
            "items": len(clauses), "ok": True}]
    return Reduction(nq, out_td, log, extra={"fresh": fresh})


def eliminate_exists(q: Qbf, td: TreeDecomposition, max_clauses: int = DEFAULT_MAX_CLAUSES,
                     fold: bool = False) -> Reduction:
    """Remove the innermost existential block of a QBF with CNF matrix."""
    if not q.prefix or q.prefix[-1].kind != EXISTS or not isinstance(q.matrix, Cnf):
        raise WrongShape("eliminate_exists needs an innermost existential block and a CNF matrix")
    terms, top, fresh, out_td, k_in, bound = _build(q, td, False, max_clauses, fold)
    prefix = list(q.prefix[:-1]) + [Block(FORALL, fresh)]
    nq = Qbf(tuple(normalize_prefix(prefix)), Dnf(top, tuple(terms)))
    log = [{"stage": "eliminate", "kind": EXISTS, "block_size": len(q.prefix[-1].vars),
            "width_in": k_in, "width_out": out_td.width, "bound": bound, "vars": top,
            "items": len(terms), "ok": True}]
    return Reduction(nq, out_td, log, extra={"fresh": fresh})


def eliminate(q: Qbf, td: TreeDecomposition, max_clauses: int = DEFAULT_MAX_CLAUSES,
              fold: bool = False) -> Reduction:
    if q.prefix and q.prefix[-1].kind == FORALL:
        return eliminate_forall(q, td, max_clauses, fold)
    return eliminate_exists(q, td, max_clauses, fold)


def compact(q: Qbf, td: TreeDecomposition | None, keep=()):
    """Renumber q's used variables (plus `keep`) to 1..n in increasing old id.

    Returns (q', td', mapping old -> new); td' is td restricted to the kept
    variables.
    """
    used = set(q.matrix.variables()) | set(keep)
    order = sorted(used)
    mp = {v: i + 1 for i, v in enumerate(order)}

    def r(it):
        return tuple(mp[l] if l > 0 else -mp[-l] for l in it)

    m = q.matrix
    mat = (Cnf if isinstance(m, Cnf) else Dnf)(len(order), tuple(r(it) for it in m.items))
    prefix = [Block(b.kind, tuple(mp[v] for v in b.vars if v in mp)) for b in q.prefix]
    nq = make_qbf(prefix, mat)
    ntd = None
    if td is not None:
        ntd = TreeDecomposition(tuple(frozenset(mp[v] for v in b if v in mp) for b in td.bags), td.parent)
    return nq, ntd, mp


def _primal(f) -> Graph:
    from .formula import primal_graph
    return primal_graph(f)


def _final_cnf(q: Qbf) -> Cnf:
    m = q.matrix
    if isinstance(m, Cnf):
        return m
    # no quantifiers left and a DNF matrix over no variables
    return Cnf(m.num_vars, () if any(len(t) == 0 for t in m.terms) else ((),))


def qsat_to_sat(q: Qbf, td: TreeDecomposition | None = None, max_clauses: int = DEFAULT_MAX_CLAUSES,
                max_width: int | None = None, redecompose: bool = True, keep=(),
                fold: bool = True) -> Reduction:
    """Eliminate blocks until one existential block over a CNF remains.

    Between rounds the variables are renumbered densely.  With
    `redecompose` the next round uses a min-fill decomposition of the
    intermediate matrix whenever it is narrower than the certificate.
    `keep` lists input variables whose final ids are reported in varmap
    (they must belong to the outermost block to survive).
    """
    log = []
    cur, cur_td, mp = compact(q, td, keep)
    varmap = dict(mp)
    if cur_td is None:
        cur_td = min_fill(_primal(cur.matrix))
    cur_td = cover_vertices(cur_td, range(1, cur.num_vars + 1))
    rnd = 0
    last_fresh = []
    while cur.prefix and not (len(cur.prefix) == 1 and cur.prefix[0].kind == EXISTS):
        rnd += 1
        use_td = cur_td
        if redecompose and cur.num_vars <= REDECOMPOSE_LIMIT:
            alt = min_fill(_primal(cur.matrix))
            if alt.width < use_td.width:
                use_td = alt
        if max_width is not None and use_td.width > max_width:
            raise ResourceLimit(f"round {rnd}: width {use_td.width} exceeds cap {max_width}")
        red = eliminate(cur, use_td, max_clauses, fold)
        entry = dict(red.log[0])
        entry.update(round=rnd, certified_width_in=cur_td.width, width_used=use_td.width)
        log.append(entry)
        keep_ids = [varmap[v] for v in keep if v in varmap]
        nq, ntd, mp = compact(red[0], red[1], keep_ids)
        varmap = {v: mp[w] for v, w in varmap.items() if w in mp}
        last_fresh = sorted(mp[v] for v in red.extra["fresh"] if v in mp)
        cur, cur_td = nq, ntd
        cur_td = cover_vertices(cur_td, range(1, cur.num_vars + 1))
    out = _final_cnf(cur)
    if max_width is not None and cur_td.width > max_width:
        raise ResourceLimit(f"final width {cur_td.width} exceeds cap {max_width}")
    return Reduction(out, cur_td, log, varmap=varmap, extra={"last_fresh": last_fresh})
