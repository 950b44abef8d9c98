"""Projected model counting reduced to plain model counting.

Y = vars(f) \\ X are the projected-away variables.  For every node t and
assignment alpha of bag(t) & Y a fresh variable says "some extension of
alpha to the Y-variables forgotten below t satisfies every clause labeled
below t".  All fresh variables are defined by biconditionals, so each
X-assignment extends to at most one model, and exactly one when the root
disjunction holds.
"""

from __future__ import annotations

from typing import Iterable

from .common import Reduction, check_bound
from .encode import local_assignments
from .formula import Cnf
from .qelim import DEFAULT_MAX_CLAUSES, _Emitter, _plan, _project, _vars_of
from .treedec import TreeDecomposition, cover_vertices, prepare


def pmc_to_sharpsat(f: Cnf, X: Iterable[int], td: TreeDecomposition, fold: bool = False,
                    max_clauses: int = DEFAULT_MAX_CLAUSES) -> Reduction:
    """#models(output) equals the number of X-projections of models of f.

    Output numbering: X (ascending) becomes 1..|X|, fresh variables follow
    in allocation order.  varmap maps X-variables to their new ids.
    """
    X = sorted(set(X))
    xs = set(X)
    Y = {v for v in range(1, f.num_vars + 1) if v not in xs}
    k_in = td.width
    ltd = prepare(cover_vertices(td, f.variables()), f)
    items = f.clauses
    local = _plan(ltd, Y, items, max_clauses)
    alphas = [local_assignments(lv) for lv in local]
    em = _Emitter(f.num_vars, True, fold)
    node_val: dict = {}
    slot_vars: dict = {}
    for t in ltd.postorder:
        lv = local[t]
        mine = []
        item_vals = {}
        for i in ltd.labels[t]:
            c = items[i]
            vals = []
            for alpha in alphas[t]:
                aset = set(alpha)
                if any(l in aset for l in c):
                    vals.append(em.const(True))
                else:
                    vals.append(em.disj([l for l in c if -l not in aset]))
            item_vals[i] = vals
            mine.extend(vals)
        edge_vals = {}
        for ch in ltd.children[t]:
            pos_c = {v: i for i, v in enumerate(local[ch])}
            shared = [v for v in lv if v in pos_c]
            idx_t = [lv.index(v) for v in shared]
            idx_c = [pos_c[v] for v in shared]
            by_key: dict = {}
            for b_idx, beta in enumerate(alphas[ch]):
                by_key.setdefault(_project(beta, idx_c), []).append(node_val[ch][b_idx])
            vals = [em.disj(by_key[_project(alpha, idx_t)]) for alpha in alphas[t]]
            edge_vals[ch] = vals
            mine.extend(vals)
        nv = []
        for a_idx in range(len(alphas[t])):
            parts = [item_vals[i][a_idx] for i in ltd.labels[t]]
            parts += [edge_vals[ch][a_idx] for ch in ltd.children[t]]
            nv.append(em.conj(parts))
        node_val[t] = nv
        mine.extend(nv)
        slot_vars[t] = _vars_of(mine)

    root = node_val[0]
    if not any(v is True for v in root):
        em.out.append(tuple(v for v in root if v is not False))

    fresh = list(range(f.num_vars + 1, em.top + 1))
    order = X + fresh
    mp = {v: i + 1 for i, v in enumerate(order)}

    def r(c):
        return tuple(mp[l] if l > 0 else -mp[-l] for l in c)

    out = Cnf(len(order), tuple(r(c) for c in em.out))
    bags = []
    for t, bag in enumerate(ltd.bags):
        nb = {v for v in bag if v in xs} | slot_vars[t]
        for ch in ltd.children[t]:
            nb |= _vars_of(node_val[ch])
        bags.append(frozenset(mp[v] for v in nb))
    out_td = cover_vertices(TreeDecomposition(tuple(bags), ltd.parent), range(1, len(order) + 1))
    bound = 12 * (1 << max(k_in, 0))
    check_bound(out_td.width, bound, "pmc")
    log = [{"stage": "pmc", "width_in": k_in, "width_out": out_td.width, "bound": bound,
            "vars": out.num_vars, "clauses": len(out.clauses), "projected": len(X), "ok": True}]
    return Reduction(out, out_td, log, varmap={v: mp[v] for v in X})
