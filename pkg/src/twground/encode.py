"""Clause/term builders for the biconditionals used by the encoders.

CNF helpers return lists of clauses, DNF helpers return lists of terms
whose disjunction is the negated biconditional.  Tautological clauses and
contradictory terms are never returned.
"""

from __future__ import annotations

from itertools import product
from typing import Iterable, Sequence


def _tidy(lits: Iterable[int]):
    out = []
    seen = set()
    for l in lits:
        if -l in seen:
            return None
        if l not in seen:
            seen.add(l)
            out.append(l)
    return tuple(out)


def tidy_all(items: Iterable[Iterable[int]]) -> list:
    out = []
    for it in items:
        t = _tidy(it)
        if t is not None:
            out.append(t)
    return out


def iff_and(s: int, lits: Sequence[int]) -> list:
    """s <-> AND(lits)."""
    return tidy_all([(-s, l) for l in lits] + [(s,) + tuple(-l for l in lits)])


def iff_or(s: int, lits: Sequence[int]) -> list:
    """s <-> OR(lits)."""
    return tidy_all([(s, -l) for l in lits] + [(-s,) + tuple(lits)])


def iff_dnf(s: int, terms: Sequence[Sequence[int]]) -> list:
    """s <-> OR of conjunctions, the forward direction by distribution."""
    terms = [t for t in (_tidy(t) for t in terms) if t is not None]
    if any(len(t) == 0 for t in terms):
        return [(s,)]
    if not terms:
        return [(-s,)]
    back = [(s,) + tuple(-l for l in t) for t in terms]
    forward = set()
    out = []
    for pick in product(*terms):
        c = _tidy((-s,) + pick)
        if c is None:
            continue
        key = frozenset(c)
        if key not in forward:
            forward.add(key)
            out.append(c)
    # drop clauses subsumed by a strictly smaller one
    keys = sorted(forward, key=len)
    kept = []
    for k in keys:
        if not any(small < k for small in kept):
            kept.append(k)
    kept = set(kept)
    out = [c for c in out if frozenset(c) in kept]
    return tidy_all(back) + out


def not_iff_and(s: int, lits: Sequence[int]) -> list:
    """Terms of NOT(s <-> AND(lits))."""
    return tidy_all([(s, -l) for l in lits] + [(-s,) + tuple(lits)])


def not_iff_or(s: int, lits: Sequence[int]) -> list:
    """Terms of NOT(s <-> OR(lits))."""
    return tidy_all([(s,) + tuple(-l for l in lits)] + [(-s, l) for l in lits])


def negate_items(items: Iterable[Sequence[int]]) -> list:
    """Clause -> term (or term -> clause) by negating every literal."""
    return [tuple(-l for l in it) for it in items]


def local_assignments(vars_: Sequence[int]) -> list:
    """All assignments to vars_ (sorted ascending) in lexicographic order, false < true."""
    n = len(vars_)
    out = []
    for m in range(1 << n):
        out.append(tuple(v if (m >> (n - 1 - i)) & 1 else -v for i, v in enumerate(vars_)))
    return out


def _subsume(clauses):
    keys = sorted({frozenset(c) for c in clauses}, key=len)
    kept = []
    for k in keys:
        if not any(small <= k for small in kept):
            kept.append(k)
    kept = set(kept)
    out, seen = [], set()
    for c in clauses:
        k = frozenset(c)
        if k in kept and k not in seen:
            seen.add(k)
            out.append(c)
    return out


def dnf_to_cnf(terms: Sequence[Sequence[int]]) -> list:
    """CNF equivalent to OR(terms), factoring terms on their first literal.

    OR_l (l AND R_l) is expanded as a product over the groups only, which
    keeps relation-atom definitions small: with one group per element the
    clause count is 2^(groups) instead of (arity)^(terms).
    """
    terms = [t for t in (_tidy(t) for t in terms) if t is not None]
    if any(len(t) == 0 for t in terms):
        return []
    if not terms:
        return [()]
    groups: dict = {}
    for t in terms:
        groups.setdefault(t[0], []).append(t[1:])
    parts = []
    for l, rests in groups.items():
        sub = dnf_to_cnf(rests)
        parts.append([(l,)] + sub)
    out = []
    for pick in product(*parts):
        c = _tidy(l for cl in pick for l in cl)
        if c is not None:
            out.append(c)
    return _subsume(out)


def iff_dnf_factored(s: int, terms: Sequence[Sequence[int]]) -> list:
    """s <-> OR of conjunctions via dnf_to_cnf for the forward direction."""
    terms = [t for t in (_tidy(t) for t in terms) if t is not None]
    if any(len(t) == 0 for t in terms):
        return [(s,)]
    if not terms:
        return [(-s,)]
    back = [(s,) + tuple(-l for l in t) for t in terms]
    fwd = [(-s,) + c for c in dnf_to_cnf(terms)]
    return tidy_all(back + fwd)


def iff_atleast2(s: int, lits: Sequence[int]) -> list:
    """s <-> at least two of lits are true."""
    lits = list(dict.fromkeys(lits))
    out = [(-s,) + tuple(l for j, l in enumerate(lits) if j != i) for i in range(len(lits))]
    if len(lits) < 2:
        out = [(-s,)]
    out += [(s, -a, -b) for i, a in enumerate(lits) for b in lits[i + 1:]]
    return tidy_all(out)
