"""Optimization and counting over free set variables (Fagin-style problems).

phi(X1..Xl) is closed as EXISTS X1..Xl phi and sent through the MSO to SAT
pipeline with the X indicators kept.  Maximization adds one soft unit
clause per indicator; counting reads the models of the final CNF, which
are in bijection with the satisfying X choices whenever everything except
the X indicators is fixed by definitions.  Otherwise an explicit
projected-counting round is appended.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from .common import Reduction
from .formula import EXISTS, FORALL, Wcnf, primal_graph
from .mso.ground import mc_to_sat
from .mso.oracle import brute_mc_mso
from .mso.structure import RelationalStructure
from .mso.syntax import MsoError, MsoFormula
from .pmc import pmc_to_sharpsat
from .qelim import DEFAULT_MAX_CLAUSES, REDECOMPOSE_LIMIT
from .treedec import TreeDecomposition, min_fill


def expected_rounds(phi: MsoFormula) -> int:
    """Elimination rounds for the closed formula: one extra if phi starts universally."""
    if not phi.prefix:
        return 0
    return phi.qa + (1 if phi.prefix[0].kind == FORALL else 0)


def _pipeline(phi, s, td, max_clauses, max_width):
    if not phi.free_set_vars:
        raise MsoError("a Fagin problem needs at least one free set variable")
    closed = phi.close(EXISTS)
    r = mc_to_sat(closed, s, td, max_clauses=max_clauses, max_width=max_width, keep_vars=phi.free_set_vars)
    rounds = r.extra["rounds"]
    want = expected_rounds(phi)
    entry = {"stage": "rounds", "rounds": rounds, "expected": want, "ok": rounds == want}
    return r, entry


def _weight_of(weights, X, u):
    try:
        return Fraction(weights[X][u])
    except KeyError:
        raise MsoError(f"no weight for {X} at element {u}") from None


def fd_to_maxsat(phi: MsoFormula, weights: dict, s: RelationalStructure, td: TreeDecomposition | None = None,
                 max_clauses: int = DEFAULT_MAX_CLAUSES, max_width: int | None = None) -> Reduction:
    """WCNF whose optimum is max sum of w_X(u) over u in X, X ranging over the solutions.

    weights: set variable -> element -> rational.
    """
    ws = {X: {u: _weight_of(weights, X, u) for u in s.universe} for X in phi.free_set_vars}
    r, entry = _pipeline(phi, s, td, max_clauses, max_width)
    f = r.formula
    soft = tuple(((r.varmap[X, u],), ws[X][u]) for X in phi.free_set_vars for u in s.universe)
    w = Wcnf(f.num_vars, f.clauses, soft)
    return Reduction(w, r.td, r.log + [entry], varmap=r.varmap)


def count_fd_to_sharpsat(phi: MsoFormula, s: RelationalStructure, td: TreeDecomposition | None = None,
                         max_clauses: int = DEFAULT_MAX_CLAUSES, max_width: int | None = None) -> Reduction:
    """CNF whose model count is the number of solutions (S1..Sl)."""
    r, entry = _pipeline(phi, s, td, max_clauses, max_width)
    f = r.formula
    xs = set(r.varmap.values())
    last = r.log[-1] if r.log and r.log[-1].get("stage") == "eliminate" else None
    determined = set(r.extra["last_fresh"]) if last and last.get("kind") == FORALL else set()
    shortcut = f.variables() <= xs | determined
    log = r.log + [entry]
    if shortcut:
        # every non-indicator variable is fixed by the last round's definitions
        log.append({"stage": "count", "shortcut": True, "vars": f.num_vars, "clauses": len(f.clauses)})
        return Reduction(f, r.td, log, varmap=r.varmap, extra={"shortcut": True})
    use = r.td
    if f.num_vars <= REDECOMPOSE_LIMIT:
        # the certificate can be far wider than the CNF needs (no rounds ran)
        alt = min_fill(primal_graph(f))
        if alt.width < use.width:
            use = alt
    p = pmc_to_sharpsat(f, sorted(xs), use, max_clauses=max_clauses)
    vm = {key: p.varmap[v] for key, v in r.varmap.items()}
    log.append({"stage": "count", "shortcut": False, "width_used": use.width})
    return Reduction(p.formula, p.td, log + p.log, varmap=vm, extra={"shortcut": False})


def _choices(phi, s):
    n = s.size
    for bits in product((False, True), repeat=n * len(phi.free_set_vars)):
        yield {X: frozenset(u for u in s.universe if bits[i * n + u - 1])
               for i, X in enumerate(phi.free_set_vars)}


def brute_fd_maxsat(phi: MsoFormula, weights: dict, s: RelationalStructure):
    """Best total weight over all solutions, or None when there is none."""
    best = None
    for ch in _choices(phi, s):
        if brute_mc_mso(phi, s, ch):
            val = sum((_weight_of(weights, X, u) for X, S in ch.items() for u in S), Fraction(0))
            best = val if best is None or val > best else best
    return best


def brute_fd_count(phi: MsoFormula, s: RelationalStructure) -> int:
    return sum(1 for ch in _choices(phi, s) if brute_mc_mso(phi, s, ch))


def parse_weights(text: str) -> dict:
    """Lines `w <var> <element> <num>/<den>` (or a plain integer/decimal)."""
    out: dict = {}
    for n, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks or toks[0] == "c":
            continue
        if toks[0] != "w" or len(toks) != 4:
            raise ValueError(f"line {n}: expected 'w <var> <element> <weight>'")
        out.setdefault(toks[1], {})[int(toks[2])] = Fraction(toks[3])
    return out


def uniform_weights(phi: MsoFormula, s: RelationalStructure, w) -> dict:
    return {X: {u: Fraction(w) for u in s.universe} for X in phi.free_set_vars}
