"""TD-guided dynamic programming for SAT, #SAT and MaxSAT, plus oracles.

The DP walks a labeled tree decomposition bottom-up.  A table maps each
assignment of a bag that satisfies the items labeled there to a value
(a bool, a count, or a best weight with witness).  Child tables are
projected onto the shared variables before being joined, which handles
introduce, forget and join nodes without building a nice decomposition.

The brute_* functions enumerate exhaustively and are the reference
semantics for the tests.  sat_solve/maxsat_solve/qbf_eval hand larger
instances to a CDCL backend (python-sat).
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product
from operator import itemgetter
from typing import Iterable

from .formula import (Cnf, Dnf, EXISTS, FORALL, Qbf, Wcnf, condition, make_qbf, Block)
from .treedec import LabeledTreeDecomposition, TreeDecomposition, label


class HardUnsat(Exception):
    pass


class TooLarge(Exception):
    pass


BRUTE_LIMIT = 24
DP_BAG_LIMIT = 22


def _labeled(items, td) -> LabeledTreeDecomposition:
    if isinstance(td, LabeledTreeDecomposition) and sum(map(len, td.labels)) == len(items):
        return td
    return label(td, items)


def _compile(ltd, items):
    """Per node: sorted bag vars and labeled items as (index, wanted bit) lists."""
    nodes = []
    for t, bag in enumerate(ltd.bags):
        vs = tuple(sorted(bag))
        pos = {v: i for i, v in enumerate(vs)}
        its = []
        for i in ltd.labels[t]:
            its.append((i, tuple((pos[abs(l)], 1 if l > 0 else 0) for l in items[i])))
        nodes.append((vs, its))
    return nodes


def _shared(vs_t, vs_c):
    pos_t = {v: i for i, v in enumerate(vs_t)}
    pos_c = {v: i for i, v in enumerate(vs_c)}
    sh = [v for v in vs_c if v in pos_t]
    return tuple(pos_t[v] for v in sh), tuple(pos_c[v] for v in sh)


def _picker(positions):
    """Fast tuple projection onto `positions` (always returns a tuple)."""
    positions = tuple(positions)
    if len(positions) == 1:
        i = positions[0]
        return lambda key: (key[i],)
    if not positions:
        return lambda key: ()
    return itemgetter(*positions)


def _join(projs, mul, one):
    """Join projected child tables into partial assignments of the bag.

    Returns (indices, table) where table maps value tuples over `indices`
    to accumulated values.
    """
    idx: list = []
    cur = {(): one}
    for st, pj in projs:
        pos = {i: k for k, i in enumerate(idx)}
        common = [(j, pos[i]) for j, i in enumerate(st) if i in pos]
        fresh = [j for j, i in enumerate(st) if i not in pos]
        child_common = _picker(j for j, _ in common)
        own_common = _picker(p for _, p in common)
        child_fresh = _picker(fresh)
        groups: dict = {}
        for ck, cv in pj.items():
            groups.setdefault(child_common(ck), []).append((child_fresh(ck), cv))
        nxt = {}
        for key, val in cur.items():
            for ext, cv in groups.get(own_common(key), ()):
                nxt[key + ext] = mul(val, cv)
        idx += [st[j] for j in fresh]
        cur = nxt
        if not cur:
            break
    return idx, cur


def _run(items, ltd, zero, one, add, mul, node_weight=None):
    """Generic semiring DP; returns the sum over the root table."""
    nodes = _compile(ltd, items)
    tables = {}
    for t in ltd.postorder:
        vs, its = nodes[t]
        projs = []
        for c in ltd.children[t]:
            st, sc = _shared(vs, nodes[c][0])
            pj = {}
            proj = _picker(sc)
            for key, val in tables.pop(c).items():
                k = proj(key)
                pj[k] = add(pj[k], val) if k in pj else val
            projs.append((st, pj))
        idx, part = _join(projs, mul, one)
        seen = set(idx)
        rest = [i for i in range(len(vs)) if i not in seen]
        if len(rest) > DP_BAG_LIMIT:
            raise TooLarge(f"node {t} introduces {len(rest)} variables (limit {DP_BAG_LIMIT})")
        order = idx + rest
        back = [0] * len(vs)
        for k, i in enumerate(order):
            back[i] = k
        # check each item as soon as its last variable is assigned, so
        # hopeless prefixes are cut before the remaining bits are enumerated
        due = [[] for _ in range(len(rest) + 1)]
        for _, lits in its:
            at = max((back[i] for i, _ in lits), default=-1)  # empty item: rejected at once
            due[max(at - len(idx) + 1, 0)].append(tuple((back[i], b) for i, b in lits))
        to_bag = _picker(back)
        tab = {}
        for key, val in part.items():
            level = [key] if all(any(key[j] == b for j, b in c) for c in due[0]) else []
            for d in range(1, len(rest) + 1):
                checks = due[d]
                level = [x + (bit,) for x in level for bit in (0, 1)]
                if checks:
                    level = [x for x in level if all(any(x[j] == b for j, b in c) for c in checks)]
                if not level:
                    break
            for full in level:
                a = to_bag(full)
                tab[a] = val if node_weight is None else mul(node_weight(t, a), val)
        tables[t] = tab
    root = tables[0]
    total = zero
    for v in root.values():
        total = add(total, v)
    return total


def td_count(f: Cnf, td) -> int:
    ltd = _labeled(f.clauses, td)
    n = _run(f.clauses, ltd, 0, 1, lambda a, b: a + b, lambda a, b: a * b)
    covered = ltd.vertices()
    free = sum(1 for v in range(1, f.num_vars + 1) if v not in covered)
    return n << free


def td_sat(f: Cnf, td) -> bool:
    ltd = _labeled(f.clauses, td)
    return _run(f.clauses, ltd, False, True, lambda a, b: a or b, lambda a, b: a and b)


def td_maxsat(w: Wcnf, td):
    """Maximum total weight of satisfied soft clauses subject to the hard ones.

    Returns (optimum, witness) where witness is a tuple of literals over
    all variables 1..num_vars.
    """
    items = w.items
    nh = len(w.hard)
    ltd = _labeled(items, td)
    # soft items are checked as weights, not as filters
    hard_only = LabeledTreeDecomposition(
        ltd.bags, ltd.parent, tuple(tuple(i for i in ls if i < nh) for ls in ltd.labels))
    nodes = _compile(ltd, items)
    soft_at = []
    for t, (vs, _) in enumerate(nodes):
        pos = {v: i for i, v in enumerate(vs)}
        soft_at.append([(tuple((pos[abs(l)], 1 if l > 0 else 0) for l in items[i]),
                         w.soft[i - nh][1]) for i in ltd.labels[t] if i >= nh])

    def node_weight(t, a):
        s = Fraction(0)
        for lits, wt in soft_at[t]:
            if any(a[i] == b for i, b in lits):
                s += wt
        vs = nodes[t][0]
        return (s, tuple(v if a[i] else -v for i, v in enumerate(vs)))

    def add(x, y):
        return x if x[0] >= y[0] else y

    def mul(x, y):
        return (x[0] + y[0], x[1] + y[1])

    best = _run(items, hard_only, None, (Fraction(0), ()), lambda x, y: y if x is None else add(x, y),
                mul, node_weight)
    if best is None:
        raise HardUnsat("hard clauses are unsatisfiable")
    opt, lits = best
    chosen = {}
    for l in lits:
        chosen[abs(l)] = l
    witness = tuple(chosen.get(v, -v) for v in range(1, w.num_vars + 1))
    return opt, witness


# ---------------------------------------------------------------- oracles

def _guard(n, limit):
    if n > (BRUTE_LIMIT if limit is None else limit):
        raise TooLarge(f"{n} boolean dimensions exceed the brute-force limit")


def _models(num_vars):
    for bits in product((False, True), repeat=num_vars):
        yield {v if b else -v for v, b in zip(range(1, num_vars + 1), bits)}


def _sat(items, model):
    return all(any(l in model for l in c) for c in items)


def brute_sat(f: Cnf, limit=None) -> bool:
    _guard(f.num_vars, limit)
    return any(_sat(f.clauses, m) for m in _models(f.num_vars))


def brute_count(f: Cnf, limit=None) -> int:
    _guard(f.num_vars, limit)
    return sum(1 for m in _models(f.num_vars) if _sat(f.clauses, m))


def brute_pmc(f: Cnf, X: Iterable[int], limit=None) -> int:
    _guard(f.num_vars, limit)
    X = sorted(set(X))
    seen = set()
    for m in _models(f.num_vars):
        if _sat(f.clauses, m):
            seen.add(tuple(v in m for v in X))
    return len(seen)


def brute_maxsat(w: Wcnf, limit=None):
    _guard(w.num_vars, limit)
    best = None
    for m in _models(w.num_vars):
        if not _sat(w.hard, m):
            continue
        s = sum((wt for c, wt in w.soft if any(l in m for l in c)), Fraction(0))
        if best is None or s > best[0]:
            best = (s, tuple(sorted(m, key=abs)))
    if best is None:
        raise HardUnsat("hard clauses are unsatisfiable")
    return best


def brute_qbf_eval(q: Qbf, limit=None) -> bool:
    order = [(b.kind, v) for b in q.prefix for v in b.vars]
    _guard(len(order), limit)
    m = q.matrix
    is_cnf = isinstance(m, Cnf)
    items = [frozenset(c) for c in m.items]

    def rec(i, items):
        if is_cnf:
            if any(not c for c in items):
                return False
            if not items:
                return True
        else:
            if any(not t for t in items):
                return True
            if not items:
                return False
        if i == len(order):
            raise AssertionError("matrix variable outside prefix")
        kind, v = order[i]
        results = []
        for lit in (-v, v):
            if is_cnf:
                nxt = [c - {-lit} for c in items if lit not in c]
            else:
                nxt = [t - {lit} for t in items if -lit not in t]
            r = rec(i + 1, nxt)
            if kind == EXISTS and r:
                return True
            if kind == FORALL and not r:
                return False
            results.append(r)
        return kind == FORALL

    return rec(0, items)


# ------------------------------------------------------- CDCL-backed helpers

def sat_solve(f: Cnf):
    """(satisfiable, model) via python-sat."""
    from pysat.solvers import Solver

    if any(len(c) == 0 for c in f.clauses):
        return False, None
    with Solver(name="cadical153", bootstrap_with=[list(c) for c in f.clauses]) as s:
        ok = s.solve()
        return ok, (s.get_model() if ok else None)


def count_solve(f: Cnf, limit: int = 1 << 20) -> int:
    """Model count by blocking-clause enumeration; for small counts only."""
    from pysat.solvers import Solver

    if any(len(c) == 0 for c in f.clauses):
        return 0
    used = sorted(f.variables())
    n = 0
    with Solver(name="cadical153", bootstrap_with=[list(c) for c in f.clauses]) as s:
        while s.solve():
            n += 1
            if n > limit:
                raise TooLarge("too many models to enumerate")
            m = s.get_model()
            s.add_clause([-m[v - 1] for v in used])
    return n << (f.num_vars - len(used))


def maxsat_solve(w: Wcnf):
    """(optimum, witness) via RC2; rational weights are scaled to integers."""
    from pysat.examples.rc2 import RC2
    from pysat.formula import WCNF

    soft = [(c, wt) for c, wt in w.soft if wt != 0]
    den = 1
    for _, wt in soft:
        den = den * wt.denominator // math.gcd(den, wt.denominator)
    top = w.num_vars
    wc = WCNF()
    for c in w.hard:
        if not c:
            raise HardUnsat("empty hard clause")
        wc.append(list(c))
    offset = Fraction(0)
    for c, wt in soft:
        iw = int(wt * den)
        if iw > 0:
            if not c:
                continue
            wc.append(list(c), weight=iw)
        else:
            # negative weight: reward falsifying the clause instead
            offset += wt
            top += 1
            r = top
            wc.append([-r] + list(c))
            for l in c:
                wc.append([r, -l])
            wc.append([-r], weight=-iw)
    if not wc.hard and not wc.soft:
        return offset, tuple(-v for v in range(1, w.num_vars + 1))
    with RC2(wc) as rc2:
        model = rc2.compute()
        if model is None:
            raise HardUnsat("hard clauses are unsatisfiable")
        ms = set(model)
        opt = Fraction(0)
        for c, wt in w.soft:
            if any(l in ms for l in c):
                opt += wt
        witness = tuple(v if v in ms else -v for v in range(1, w.num_vars + 1))
        return opt, witness


# ---------------------------------------------------------------- QBF

def _dual(q: Qbf) -> Qbf:
    flip = {EXISTS: FORALL, FORALL: EXISTS}
    m = q.matrix
    negated = tuple(tuple(-l for l in it) for it in m.items)
    mat = Cnf(m.num_vars, negated) if isinstance(m, Dnf) else Dnf(m.num_vars, negated)
    return Qbf(tuple(Block(flip[b.kind], b.vars) for b in q.prefix), mat)


def _unit_simplify(clauses, local):
    """Unit propagation over the `local` variables only.

    Returns the simplified clause list, or None when a clause becomes empty.
    """
    clauses = [list(c) for c in clauses]
    assigned = {}
    changed = True
    while changed:
        changed = False
        nxt = []
        for c in clauses:
            lits = []
            sat = False
            for l in c:
                v = abs(l)
                if v in assigned:
                    if (l > 0) == assigned[v]:
                        sat = True
                        break
                    continue
                lits.append(l)
            if sat:
                continue
            if not lits:
                return None
            if len(lits) == 1 and abs(lits[0]) in local:
                assigned[abs(lits[0])] = lits[0] > 0
                changed = True
                continue
            nxt.append(lits)
        clauses = nxt
    return [tuple(c) for c in clauses]


def qbf_eval(q: Qbf, max_literals: int = 20_000_000) -> bool:
    """Decide a QBF by expanding universal blocks and calling a SAT solver.

    Innermost universal blocks are expanded first; every copy conditions
    the matrix on one universal assignment and renames the existential
    variables that follow.  Exponential in the universal block sizes.
    """
    if isinstance(q.matrix, Dnf):
        if not q.prefix:
            return any(len(t) == 0 for t in q.matrix.terms)
        return not qbf_eval(_dual(q), max_literals)
    blocks = [(b.kind, list(b.vars)) for b in q.prefix]
    clauses = [tuple(c) for c in q.matrix.clauses]
    top = q.num_vars
    while any(k == FORALL for k, _ in blocks):
        i = max(j for j, (k, _) in enumerate(blocks) if k == FORALL)
        occurring = {abs(l) for c in clauses for l in c}
        # universal variables absent from the matrix do not matter
        Y = [v for v in blocks[i][1] if v in occurring]
        Z = blocks[i + 1][1] if i + 1 < len(blocks) else []
        yz = set(Y) | set(Z)
        outer, inner = [], []
        for c in clauses:
            (inner if any(abs(l) in yz for l in c) else outer).append(c)
        if len(Y) > 30 or (len(inner) + 1) << len(Y) > max_literals:
            raise TooLarge("universal block too large to expand")
        newvars = []
        out = list(outer)
        size = sum(len(c) for c in out)
        for bits in product((False, True), repeat=len(Y)):
            tau = {v if b else -v for v, b in zip(Y, bits)}
            cond = []
            for c in inner:
                if any(l in tau for l in c):
                    continue
                cond.append(tuple(l for l in c if -l not in tau))
            simp = _unit_simplify(cond, set(Z))
            if simp is None:
                return False
            ren = {}
            for c in simp:
                nc = []
                for l in c:
                    v = abs(l)
                    if v in yz:
                        if v not in ren:
                            top += 1
                            ren[v] = top
                            newvars.append(top)
                        v = ren[v]
                    nc.append(v if l > 0 else -v)
                out.append(tuple(nc))
                size += len(nc)
            if size > max_literals:
                raise TooLarge("universal expansion exceeds the literal budget")
        clauses = out
        rest = blocks[:i]
        if rest and rest[-1][0] == EXISTS:
            rest[-1] = (EXISTS, rest[-1][1] + newvars)
        else:
            rest.append((EXISTS, newvars))
        blocks = rest
    ok, _ = sat_solve(Cnf(top, tuple(clauses)))
    return ok
