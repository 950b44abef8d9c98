import random
from fractions import Fraction

import pytest

from twground.formula import Block, Cnf, Dnf, EXISTS, FORALL, Qbf, Wcnf, condition, primal_graph
from twground.solver import (HardUnsat, TooLarge, brute_count, brute_maxsat, brute_pmc, brute_qbf_eval,
                             brute_sat, count_solve, maxsat_solve, qbf_eval, sat_solve, td_count,
                             td_maxsat, td_sat)
from twground.treedec import min_fill

from helpers import random_cnf, random_qbf, tiny_cnfs


def td(f):
    return min_fill(primal_graph(f))


def test_examples():
    f = Cnf(2, ((1, 2),))
    assert td_count(f, td(f)) == 3
    g = Cnf(1, ((1,), (-1,)))
    assert not td_sat(g, td(g))
    w = Wcnf(1, (), (((1,), 1), ((-1,), 2)))
    opt, wit = td_maxsat(w, td(w))
    assert opt == 2 and wit == (-1,)


def test_oracle_examples():
    q = Qbf((Block(FORALL, (1,)), Block(EXISTS, (2,))), Cnf(2, ((-1, 2), (1, -2))))
    assert brute_qbf_eval(q)
    assert brute_pmc(Cnf(2, ((1, 2),)), [1]) == 2


def test_hard_unsat():
    w = Wcnf(1, ((1,), (-1,)), (((1,), 1),))
    with pytest.raises(HardUnsat):
        td_maxsat(w, td(w))
    with pytest.raises(HardUnsat):
        brute_maxsat(w)


def test_brute_guard():
    with pytest.raises(TooLarge):
        brute_count(Cnf(30, ()))


def test_free_variables_counted():
    f = Cnf(4, ((1, 2),))
    assert td_count(f, td(f)) == 12


def test_exhaustive_tiny_corpus():
    for f in tiny_cnfs(3, 3):
        t = td(f)
        assert td_sat(f, t) == brute_sat(f)
        assert td_count(f, t) == brute_count(f)


def random_wcnf(rng, n):
    f = random_cnf(rng, n, rng.randint(0, 6))
    soft = [(c, Fraction(rng.randint(-4, 6), rng.randint(1, 3))) for c in random_cnf(rng, n, rng.randint(0, 6)).clauses]
    return Wcnf(n, f.clauses, tuple(soft))


def test_random_agreement():
    rng = random.Random(13)
    for _ in range(200):
        n = rng.randint(1, 12)
        f = random_cnf(rng, n, rng.randint(0, 2 * n))
        t = td(f)
        assert td_sat(f, t) == brute_sat(f) == sat_solve(f)[0]
        assert td_count(f, t) == brute_count(f)


def test_maxsat_random_agreement():
    rng = random.Random(14)
    for _ in range(150):
        w = random_wcnf(rng, rng.randint(1, 8))
        try:
            want = brute_maxsat(w)[0]
        except HardUnsat:
            with pytest.raises(HardUnsat):
                td_maxsat(w, td(w))
            continue
        opt, wit = td_maxsat(w, td(w))
        assert opt == want
        m = set(wit)
        assert all(any(l in m for l in c) for c in w.hard)
        assert sum((x for c, x in w.soft if any(l in m for l in c)), Fraction(0)) == opt
        assert maxsat_solve(w)[0] == want


def test_shannon_expansion():
    rng = random.Random(15)
    for _ in range(100):
        n = rng.randint(1, 10)
        f = random_cnf(rng, n, rng.randint(0, 2 * n))
        x = rng.randint(1, n)
        parts = 0
        for lit in (x, -x):
            g = Cnf(n, condition(f, [lit]).clauses)
            parts += td_count(g, td(g)) // 2  # x itself is free in f|lit
        assert td_count(f, td(f)) == parts


def test_count_solve_matches_dp():
    rng = random.Random(16)
    for _ in range(50):
        f = random_cnf(rng, rng.randint(1, 8), rng.randint(0, 8))
        assert count_solve(f) == td_count(f, td(f))


def test_qbf_eval_matches_brute():
    rng = random.Random(17)
    for _ in range(300):
        n = rng.randint(1, 8)
        q = random_qbf(rng, n, rng.randint(1, min(4, n)), rng.randint(1, 8))
        assert qbf_eval(q) == brute_qbf_eval(q)


def test_dnf_qbf_without_prefix():
    assert qbf_eval(Qbf((), Dnf(0, ((),))))
    assert not qbf_eval(Qbf((), Dnf(0, ())))
