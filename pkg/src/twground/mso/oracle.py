"""Reference model checkers for small instances.

brute_mc_mso evaluates the formula on a dense array with one axis per
quantifier (2^n set values or n elements) and reduces axes innermost
first.  expand_mc_mso unrolls the first-order quantifiers into an
AND/OR circuit over set-variable indicators and hands the resulting QBF to
the QBF evaluator, which scales to larger universes when few set
variables are universal.
"""

from __future__ import annotations

import math

import numpy as np

from ..formula import Block, Cnf, EXISTS, FORALL, VarPool, make_qbf
from ..solver import TooLarge, qbf_eval
from .ground import check_vocabulary
from .structure import RelationalStructure
from .syntax import FIRST, MsoError, MsoFormula, SECOND

BRUTE_LIMIT = 24
_CHUNK = 1 << 24


def _dims(phi, n):
    so = len(phi.so_vars)
    fo = len(phi.fo_vars)
    return so * n + fo * max(1, math.ceil(math.log2(max(n, 1))))


def _eval(phi, s, axes_vals, kinds, axis_of, n):
    """axes_vals: per axis an int array of values; returns reduced bool."""
    sizes = [len(v) for v in axes_vals]
    total = math.prod(sizes)
    if total > _CHUNK and len(sizes) > 1:
        # axes before the first wide one have a single value, so slicing it is exact
        i = next(i for i, sz in enumerate(sizes) if sz > 1)
        res = []
        for val in axes_vals[i]:
            sub = list(axes_vals)
            sub[i] = np.array([val])
            r = _eval(phi, s, sub, kinds, axis_of, n)
            res.append(r)
            if r == (kinds[i] == EXISTS):
                break
        return any(res) if kinds[i] == EXISTS else all(res)
    m = np.ones(sizes, dtype=bool)
    for cl in phi.matrix:
        acc = np.zeros([1] * len(sizes), dtype=bool)
        for pos, a in cl:
            arr = _atom_on(a, axis_of, axes_vals, s, n)
            acc = acc | (arr if pos else ~arr)
        m &= acc
    for ax in reversed(range(len(sizes))):
        m = m.any(axis=ax) if kinds[ax] == EXISTS else m.all(axis=ax)
    return bool(m)


def _atom_on(a, axis_of, axes_vals, s, n):
    vars_ = sorted({x for x in a.args} | ({a.name} if a.kind == "mem" else set()), key=axis_of.__getitem__)
    axes = [axis_of[v] for v in vars_]
    grids = np.meshgrid(*[axes_vals[ax] for ax in axes], indexing="ij")
    g = dict(zip(vars_, grids))
    if a.kind == "eq":
        val = g[a.args[0]] == g[a.args[1]]
    elif a.kind == "mem":
        val = ((g[a.name] >> g[a.args[0]]) & 1).astype(bool)
    else:
        table = np.zeros((n,) * len(a.args), dtype=bool)
        for t in s.relations[a.name]:
            table[tuple(e - 1 for e in t)] = True
        val = table[tuple(g[x] for x in a.args)]
    shape = [1] * len(axes_vals)
    for ax in axes:
        shape[ax] = len(axes_vals[ax])
    return val.reshape(shape)


def _mask(elems):
    m = 0
    for u in elems:
        m |= 1 << (u - 1)
    return m


def brute_mc_mso(phi: MsoFormula, s: RelationalStructure, free: dict | None = None,
                 limit: int | None = None) -> bool:
    """S |= phi(free) by exhaustive evaluation.

    `free` maps each free set variable to a set of elements.  Raises
    TooLarge when the quantified search space exceeds 2^limit.
    """
    limit = BRUTE_LIMIT if limit is None else limit
    n = s.size
    if n < 1:
        raise MsoError("the universe must not be empty")
    check_vocabulary(phi, s)
    free = dict(free or {})
    missing = [X for X in phi.free_set_vars if X not in free]
    if missing:
        raise MsoError(f"no value for free set variables {missing}")
    if _dims(phi, n) > limit:
        raise TooLarge(f"search space 2^{_dims(phi, n)} exceeds 2^{limit}")
    axes_vals, kinds, axis_of = [], [], {}
    for X in phi.free_set_vars:
        axis_of[X] = len(axes_vals)
        axes_vals.append(np.array([_mask(free[X])], dtype=np.int64))
        kinds.append(EXISTS)
    for q in phi.prefix:
        axis_of[q.var] = len(axes_vals)
        axes_vals.append(np.arange(1 << n, dtype=np.int64) if q.order == SECOND else np.arange(n))
        kinds.append(q.kind)
    return _eval(phi, s, axes_vals, kinds, axis_of, n)


def witness_sets(phi: MsoFormula, s: RelationalStructure, limit: int | None = None) -> list:
    """All values of the leading existential set block that make phi true.

    Each witness is a dict var -> frozenset of elements.
    """
    lead = []
    for q in phi.prefix:
        if q.kind != EXISTS or q.order != SECOND:
            break
        lead.append(q.var)
    rest = type(phi)(phi.prefix[len(lead):], phi.matrix, tuple(phi.free_set_vars) + tuple(lead), phi.vocabulary)
    out = []
    n = s.size
    for code in range(1 << (n * len(lead))):
        val = {X: frozenset(u for u in s.universe if (code >> (i * n + u - 1)) & 1) for i, X in enumerate(lead)}
        if brute_mc_mso(rest, s, val, limit=limit):
            out.append(val)
    return out


def expand_mc_mso(phi: MsoFormula, s: RelationalStructure, free: dict | None = None,
                  max_nodes: int = 2_000_000) -> bool:
    """S |= phi(free) via first-order expansion into a QBF.

    Set variables quantified after first-order ones get one copy per
    assignment of the preceding first-order variables.  Literals are
    resolved as soon as their variables are bound, and clauses that do
    not mention the next first-order variable are moved out of its scope
    (miniscoping), so relation atoms keep the expansion small.
    """
    check_vocabulary(phi, s)
    n = s.size
    if n < 1:
        raise MsoError("the universe must not be empty")
    free = dict(free or {})
    fo_before: dict = {}
    seen_fo = []
    for q in phi.prefix:
        if q.order == SECOND:
            fo_before[q.var] = tuple(seen_fo)
        else:
            seen_fo.append(q.var)
    fo = [q for q in phi.prefix if q.order == FIRST]
    pool = VarPool(0)
    copies: dict = {}  # (X, key) -> {u: var}

    def needs(a):
        out = set(a.args)
        if a.kind == "mem" and a.name not in free:
            out |= set(fo_before[a.name])
        return out

    def resolve(p, a, env):
        """True/False, or a propositional literal."""
        if a.kind == "eq":
            v = env[a.args[0]] == env[a.args[1]]
        elif a.kind == "rel":
            v = s.holds(a.name, [env[x] for x in a.args])
        elif a.name in free:
            v = env[a.args[0]] in free[a.name]
        else:
            key = (a.name, tuple(env[x] for x in fo_before[a.name]))
            if key not in copies:
                copies[key] = {e: pool.new() for e in s.universe}
            lit = copies[key][env[a.args[0]]]
            return lit if p else -lit
        return v == p

    gates: list = []
    count = [0]

    def mk(kind, kids):
        absorb = kind == "or"
        lits = []
        for k in kids:
            if isinstance(k, bool):
                if k == absorb:
                    return absorb
                continue
            lits.append(k)
        if not lits:
            return not absorb
        lits = list(dict.fromkeys(lits))
        if len(lits) == 1:
            return lits[0]
        count[0] += 1
        if count[0] > max_nodes:
            raise TooLarge("expansion exceeds the node cap")
        g = pool.new()
        gates.append((kind, g, lits))
        return g

    def node(level, env, clauses):
        parts, rest = [], []
        for pending, props in clauses:
            keep, lits, sat = [], list(props), False
            for p, a in pending:
                if needs(a) <= env.keys():
                    v = resolve(p, a, env)
                    if v is True:
                        sat = True
                        break
                    if v is not False:
                        lits.append(v)
                else:
                    keep.append((p, a))
            if sat:
                continue
            if keep:
                rest.append((tuple(keep), tuple(lits)))
            elif not lits:
                return False
            else:
                parts.append(mk("or", lits))
        if not rest:
            return mk("and", parts)
        # conjuncts over disjoint unbound variables are quantified separately
        groups: list = []
        for c in rest:
            vs = set().union(*(needs(a) for _, a in c[0])) - env.keys()
            hit = [g for g in groups if g[0] & vs]
            for g in hit:
                groups.remove(g)
                vs |= g[0]
            groups.append((vs, [c] + [d for g in hit for d in g[1]]))
        for vs, comp in groups:
            lv = level
            while fo[lv].var not in vs:
                lv += 1
            q = fo[lv]
            kids = []
            stop = q.kind == EXISTS
            for u in s.universe:
                env[q.var] = u
                r = node(lv + 1, env, comp)
                del env[q.var]
                if r is stop:
                    kids = [stop]
                    break
                kids.append(r)
            r = mk("or" if q.kind == EXISTS else "and", kids)
            if r is False:
                return False
            parts.append(r)
        return mk("and", parts)

    root = node(0, {}, [(tuple(cl), ()) for cl in phi.matrix])
    if isinstance(root, bool):
        return root
    clauses = [(root,)]
    for kind, g, kids in gates:
        if kind == "and":
            clauses += [(-g, k) for k in kids] + [(g,) + tuple(-k for k in kids)]
        else:
            clauses += [(-g,) + tuple(kids)] + [(g, -k) for k in kids]
    prefix = []
    for q in phi.prefix:
        if q.order == SECOND:
            vs = tuple(v for (X, _), m in copies.items() if X == q.var for v in m.values())
            prefix.append(Block(q.kind, vs))
    prefix.append(Block(EXISTS, tuple(g for _, g, _ in gates)))
    return qbf_eval(make_qbf(prefix, Cnf(pool.top, tuple(clauses))))
