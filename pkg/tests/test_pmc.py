import random

from twground.formula import Cnf, condition, primal_graph
from twground.pmc import pmc_to_sharpsat
from twground.solver import brute_count, brute_pmc, brute_sat, count_solve, td_count
from twground.treedec import min_fill, validate

from helpers import random_cnf


def reduce(f, X):
    td = min_fill(primal_graph(f))
    r = pmc_to_sharpsat(f, X, td)
    out, otd = r
    assert validate(primal_graph(out), otd).valid
    assert otd.width <= 12 * 2 ** max(td.width, 0)
    return r


def test_single_clause_projection():
    out, otd = reduce(Cnf(2, ((1, 2),)), [1])
    assert td_count(out, otd) == 2


def test_full_projection_is_plain_count():
    rng = random.Random(1)
    for _ in range(30):
        f = random_cnf(rng, rng.randint(1, 6), rng.randint(0, 6))
        out, otd = reduce(f, range(1, f.num_vars + 1))
        assert count_solve(out) == brute_count(f)


def test_empty_projection():
    sat = Cnf(2, ((1, 2), (-1,)))
    unsat = Cnf(1, ((1,), (-1,)))
    assert count_solve(reduce(sat, []).formula) == 1
    assert count_solve(reduce(unsat, []).formula) == 0


def test_random_against_brute_projection():
    rng = random.Random(8)
    for _ in range(100):
        n = rng.randint(1, 8)
        f = random_cnf(rng, n, rng.randint(0, 8))
        X = rng.sample(range(1, n + 1), rng.randint(0, n))
        out, otd = reduce(f, X)
        assert count_solve(out) == brute_pmc(f, X)


def test_auxiliaries_determined_by_projection():
    rng = random.Random(12)
    for _ in range(40):
        n = rng.randint(2, 6)
        f = random_cnf(rng, n, rng.randint(1, 5))
        X = sorted(rng.sample(range(1, n + 1), rng.randint(1, n)))
        r = reduce(f, X)
        out = r.formula
        for bits in range(1 << len(X)):
            beta = [r.varmap[x] if bits >> i & 1 else -r.varmap[x] for i, x in enumerate(X)]
            orig = [x if bits >> i & 1 else -x for i, x in enumerate(X)]
            extendable = brute_sat(Cnf(f.num_vars, condition(f, orig).clauses))
            g = Cnf(out.num_vars, condition(out, beta).clauses)
            if not extendable:
                assert count_solve(g) == 0
                continue
            # every auxiliary variable is still constrained and has one value
            assert len(g.variables()) == out.num_vars - len(X)
            assert count_solve(g) >> len(X) == 1
