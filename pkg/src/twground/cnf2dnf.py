"""CNF to DNF conversion that keeps treewidth small.

The DNF is a tautology over the fresh variables under exactly those
assignments that satisfy the CNF.  One fresh variable f_C per clause says
"C is satisfied", one fresh f_t per node says "every clause below t is
satisfied".  The DNF is (violated definition) OR f_root.
"""

from __future__ import annotations

from .common import Reduction, check_bound
from .encode import not_iff_and, not_iff_or
from .formula import Cnf, Dnf
from .treedec import TreeDecomposition, prepare


def cnf_to_dnf(f: Cnf, td: TreeDecomposition) -> Reduction:
    """Returns Reduction(dnf, td) with extra['fresh'] the set of new variables.

    Fresh ids: one per clause in clause order, then one per node in node
    order of the prepared (binary, one clause per node) decomposition.
    """
    k_in = td.width
    ltd = prepare(td, f)
    top = f.num_vars
    fc = list(range(top + 1, top + len(f.clauses) + 1))
    top += len(f.clauses)
    ft = list(range(top + 1, top + len(ltd.bags) + 1))
    top += len(ltd.bags)

    terms = []
    for i, c in enumerate(f.clauses):
        terms.extend(not_iff_or(fc[i], c))
    for t in range(len(ltd.bags)):
        parts = [fc[i] for i in ltd.labels[t]] + [ft[ch] for ch in ltd.children[t]]
        terms.extend(not_iff_and(ft[t], parts))
    terms.append((ft[0],))

    bags = []
    for t, bag in enumerate(ltd.bags):
        nb = set(bag) | {ft[t]} | {fc[i] for i in ltd.labels[t]}
        nb |= {ft[ch] for ch in ltd.children[t]}
        bags.append(frozenset(nb))
    out_td = TreeDecomposition(tuple(bags), ltd.parent)
    check_bound(out_td.width, k_in + 4, "cnf2dnf")
    fresh = set(fc) | set(ft)
    log = [{"stage": "cnf2dnf", "width_in": k_in, "width_out": out_td.width, "bound": k_in + 4,
            "vars": top, "terms": len(terms), "fresh": len(fresh), "ok": True}]
    return Reduction(Dnf(top, tuple(terms)), out_td, log, extra={"fresh": fresh})
