import random
from itertools import product

import pytest

from twground.common import ResourceLimit, WrongShape
from twground.formula import Block, Cnf, Dnf, EXISTS, FORALL, Qbf, condition, make_qbf, primal_graph, qa
from twground.qelim import eliminate, eliminate_exists, eliminate_forall, qsat_to_sat
from twground.solver import brute_qbf_eval, brute_sat, count_solve, qbf_eval, td_count
from twground.treedec import min_fill, validate

from helpers import all_clauses, random_qbf


def td_of(q):
    return min_fill(primal_graph(q.matrix))


def one_round(q):
    td = td_of(q)
    r = eliminate(q, td, fold=False)
    nq, ntd = r
    assert validate(primal_graph(nq.matrix), ntd).valid
    assert ntd.width <= 12 * 2 ** max(td.width, 0)
    assert len(nq.prefix) in (len(q.prefix) - 1, len(q.prefix))
    assert type(nq.matrix) is not type(q.matrix)
    return r


def test_forall_tautology():
    q = Qbf((Block(FORALL, (1,)),), Dnf(1, ((1,), (-1,))))
    nq, _ = eliminate_forall(q, td_of(q))
    assert brute_sat(nq.matrix)


def test_forall_single_term():
    q = Qbf((Block(FORALL, (1,)),), Dnf(1, ((1,),)))
    nq, _ = eliminate_forall(q, td_of(q))
    assert not brute_sat(nq.matrix)


def test_exists_examples():
    q = Qbf((Block(EXISTS, (1,)),), Cnf(1, ((1,),)))
    assert brute_qbf_eval(eliminate_exists(q, td_of(q))[0])
    q = Qbf((Block(EXISTS, (1,)),), Cnf(1, ((1,), (-1,))))
    assert not brute_qbf_eval(eliminate_exists(q, td_of(q))[0])


def test_wrong_shape():
    q = Qbf((Block(EXISTS, (1,)),), Cnf(1, ((1,),)))
    with pytest.raises(WrongShape):
        eliminate_forall(q, td_of(q))
    q = Qbf((Block(FORALL, (1,)),), Dnf(1, ((1,),)))
    with pytest.raises(WrongShape):
        eliminate_exists(q, td_of(q))


def test_qsat_to_sat_examples():
    q = Qbf((Block(FORALL, (1,)), Block(EXISTS, (2,))), Cnf(2, ((-1, 2), (1, -2))))
    assert brute_sat(qsat_to_sat(q).formula)
    q = Qbf((Block(EXISTS, (1,)), Block(FORALL, (2,))), Dnf(2, ((1, 2),)))
    assert not brute_sat(qsat_to_sat(q).formula)


def test_resource_cap():
    rng = random.Random(1)
    q = random_qbf(rng, 8, 3, 12, first=FORALL)
    with pytest.raises(ResourceLimit):
        qsat_to_sat(q, max_clauses=5)


def exhaustive_two_block():
    """2-block QBFs over <= 3 variables with up to 2 items, all splits and kinds."""
    for n in (1, 2, 3):
        pool = all_clauses(n)
        for mask in range(1, 1 << n):
            outer = tuple(v for v in range(1, n + 1) if mask >> (v - 1) & 1)
            inner = tuple(v for v in range(1, n + 1) if not mask >> (v - 1) & 1)
            if not inner:
                continue
            for first in (EXISTS, FORALL):
                second = FORALL if first == EXISTS else EXISTS
                for a in range(len(pool)):
                    for b in range(a, len(pool)):
                        items = (pool[a],) if a == b else (pool[a], pool[b])
                        mat = Cnf(n, items) if second == EXISTS else Dnf(n, items)
                        yield Qbf((Block(first, outer), Block(second, inner)), mat)


def outer_count(q):
    """Number of outer-block assignments under which the inner block holds."""
    outer = q.prefix[0].vars
    n = 0
    for bits in product((False, True), repeat=len(outer)):
        a = [v if b else -v for v, b in zip(outer, bits)]
        rest = make_qbf(q.prefix[1:], condition(q.matrix, a))
        n += brute_qbf_eval(rest)
    return n


def test_exhaustive_two_block_validity_and_bijection():
    for q in exhaustive_two_block():
        r = one_round(q)
        nq = r.formula
        assert qbf_eval(nq) == brute_qbf_eval(q)
        if q.prefix[-1].kind == FORALL:
            # fresh variables are defined, so models biject with good outer assignments
            m = nq.matrix
            keep = set(q.prefix[0].vars) | set(r.extra["fresh"])
            assert m.variables() <= keep
            assert count_solve(m) == outer_count(q) << (m.num_vars - len(keep))


def test_random_rounds_match_evaluator():
    rng = random.Random(9)
    for _ in range(150):
        n = rng.randint(1, 7)
        q = random_qbf(rng, n, rng.randint(1, min(3, n)), rng.randint(1, 6))
        if len(q.prefix) == 1 and q.prefix[0].kind == EXISTS:
            continue
        r = one_round(q)
        assert qbf_eval(r.formula) == brute_qbf_eval(q)


def test_full_pipeline_random():
    rng = random.Random(21)
    for _ in range(150):
        n = rng.randint(1, 6)
        q = random_qbf(rng, n, rng.randint(1, min(3, n)), rng.randint(1, 6))
        r = qsat_to_sat(q)
        f, td = r
        assert validate(primal_graph(f), td).valid
        for e in r.log:
            assert e["ok"] and e["width_out"] <= e["bound"]
        assert td_count(f, td) > 0 if brute_qbf_eval(q) else not brute_sat(f) if f.num_vars <= 24 else True
