"""Cardinality constraints over a tree decomposition.

A unary counter is threaded bottom-up through a binary decomposition with
empty leaves.  Every literal of X is "watched" by one single-child node;
that node adds the literal to its child's count.  Counters saturate at
c+1, so node t carries c+1 cells where cell i means "at least i watched
literals below t are true".
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable

from .common import Reduction, check_bound
from .encode import iff_dnf, iff_or
from .formula import Cnf
from .treedec import (TreeDecomposition, _Builder, add_empty_leaves, normalize)


class Cmp(str, Enum):
    LE = "le"
    EQ = "eq"
    GE = "ge"


class MissingVariable(ValueError):
    pass


def build_watch(td: TreeDecomposition, X: Iterable[int]):
    """Extend td by duplicated bags so every literal of X has a watcher.

    Returns (td, watch) with watch a dict node -> literal; nodes not in
    the dict watch nothing.  td should already be binary.
    """
    lits = list(dict.fromkeys(X))
    occ: dict = {}
    for t, bag in enumerate(td.bags):
        for v in bag:
            occ.setdefault(v, []).append(t)
    for l in lits:
        if abs(l) not in occ:
            raise MissingVariable(f"variable {abs(l)} occurs in no bag")
    b = _Builder(td)
    watch: dict = {}
    for l in lits:
        nodes = occ[abs(l)]
        free = [t for t in nodes if len(b.children[t]) == 1 and t not in watch]
        if free:
            t = free[0]
        else:
            # fresh single-child node: the original keeps the bag and gets a copy below
            t = nodes[0]
            n = b.split(t)
            for v in b.bags[n]:
                occ[v].append(n)
            if t in watch:
                t = n
        watch[t] = l
    return b.freeze(), watch


def encode_cardinality(f: Cnf, X: Iterable[int], c: int, cmp, td: TreeDecomposition) -> Reduction:
    """f AND (number of true literals of X  cmp  c), with a width certificate.

    Counter cells are allocated after f's variables, node by node in
    post-order, c+1 cells per node.
    """
    if c < 0:
        raise ValueError("c must be non-negative")
    cmp = Cmp(cmp.value if isinstance(cmp, Cmp) else str(cmp).lower())
    k_in = td.width
    base = add_empty_leaves(normalize(td))
    wtd, watch = build_watch(base, X)
    n = c + 1
    top = f.num_vars
    ctr = {}
    for t in wtd.postorder:
        ctr[t] = list(range(top + 1, top + n + 1))
        top += n

    clauses = list(f.clauses)
    for t in wtd.postorder:
        kids = wtd.children[t]
        cur = ctr[t]
        if not kids:
            clauses.extend((-v,) for v in cur)
            continue
        if len(kids) == 1:
            sub = ctr[kids[0]]
            w = watch.get(t)
            for i in range(1, n + 1):
                if w is None:
                    clauses.extend(iff_or(cur[i - 1], [sub[i - 1]]))
                elif i == 1:
                    clauses.extend(iff_or(cur[0], [sub[0], w]))
                else:
                    clauses.extend(iff_dnf(cur[i - 1], [(sub[i - 1],), (sub[i - 2], w)]))
            continue
        left, right = ctr[kids[0]], ctr[kids[1]]
        for i in range(1, n + 1):
            terms = [(left[i - 1],), (right[i - 1],)]
            terms += [(left[a - 1], right[i - a - 1]) for a in range(1, i)]
            clauses.extend(iff_dnf(cur[i - 1], terms))

    root = ctr[0]
    if cmp in (Cmp.LE, Cmp.EQ):
        clauses.append((-root[c],))
    if cmp in (Cmp.GE, Cmp.EQ) and c >= 1:
        clauses.append((root[c - 1],))

    bags = []
    for t, bag in enumerate(wtd.bags):
        nb = set(bag) | set(ctr[t])
        for ch in wtd.children[t]:
            nb |= set(ctr[ch])
        bags.append(frozenset(nb))
    out_td = TreeDecomposition(tuple(bags), wtd.parent)
    bound = k_in + 3 * c + 3
    check_bound(out_td.width, bound, "cardinality")
    log = [{"stage": "card", "width_in": k_in, "width_out": out_td.width, "bound": bound,
            "vars": top, "clauses": len(clauses), "ok": True}]
    return Reduction(Cnf(top, tuple(clauses)), out_td, log, extra={"counters": ctr, "watch": watch})
