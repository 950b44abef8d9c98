from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from twground.dimacs import (ParseError, read_cnf, read_dnf, read_qdimacs, read_wcnf, write_cnf,
                             write_dnf, write_qdimacs, write_wcnf)
from twground.formula import (Block, Cnf, Dnf, EXISTS, FORALL, InconsistentAssignment, InvalidFormula,
                              PartialAssignment, Qbf, Wcnf, block_count, block_sizes, condition,
                              evaluate, make_qbf, neg, primal_graph, qa)

from helpers import tiny_cnfs


def edges(f):
    return {tuple(e) for e in primal_graph(f).edges}


def test_condition_examples():
    assert condition(Cnf(2, ((1, -2),)), [1]).clauses == ()
    assert condition(Cnf(2, ((1, -2),)), [2]).clauses == ((1,),)
    assert condition(Dnf(2, ((1, 2),)), [-1]).terms == ()


def test_condition_keeps_order():
    f = Cnf(3, ((3, 1), (2,), (-1, 2), (1, -3)))
    assert condition(f, [-1]).clauses == ((3,), (2,), (-3,))


def test_evaluate_examples():
    f = Cnf(1, ((1,), (-1,)))
    assert not evaluate(f, [1]) and not evaluate(f, [-1])
    assert evaluate(Cnf(0, ()), [])
    assert not evaluate(Dnf(1, ()), [1])
    assert evaluate(Dnf(2, ((1, -2),)), [1, -2])


def test_evaluate_partial_assignment():
    with pytest.raises(PartialAssignment):
        evaluate(Cnf(2, ((1,),)), [1])


def test_inconsistent_assignment():
    with pytest.raises(InconsistentAssignment):
        condition(Cnf(1, ((1,),)), [1, -1])


def test_literal_negation_is_involution():
    for l in (1, -1, 7, -42):
        assert neg(neg(l)) == l


def test_variable_range_checked():
    with pytest.raises(InvalidFormula):
        Cnf(2, ((3,),))


def test_primal_graph_examples():
    f = Cnf(5, ((1, 2, -5), (-2, 3, 4, 5), (1, 2, -4, -5)))
    want = {(1, 2), (1, 5), (2, 5), (2, 3), (2, 4), (3, 5), (4, 5), (3, 4), (1, 4)}
    assert edges(f) == want
    assert edges(Cnf(1, ((1,),))) == set()
    assert edges(Cnf(3, ((1, 2), (2, 3)))) == {(1, 2), (2, 3)}


def test_qa_examples():
    m = Dnf(5, ((1, 4), (2, -5), (3,)))
    q = Qbf((Block(EXISTS, (1, 2, 3)), Block(FORALL, (4, 5))), m)
    assert qa(q) == 1 and block_count(q) == 2 and block_sizes(q) == [3, 2]
    assert qa(Qbf((Block(EXISTS, (1,)),), Cnf(1, ((1,),)))) == 0
    q3 = Qbf((Block(EXISTS, (1,)), Block(FORALL, (2,)), Block(EXISTS, (3,))), Cnf(3, ((1, 2, 3),)))
    assert qa(q3) == 2


def test_prefix_merges_adjacent_blocks():
    q = Qbf((Block(EXISTS, (1,)), Block(EXISTS, (2,)), Block(FORALL, (3,))), Dnf(3, ((1, 2, 3),)))
    assert [b.vars for b in q.prefix] == [(1, 2), (3,)]


def test_matrix_kind_must_follow_innermost_block():
    with pytest.raises(InvalidFormula):
        Qbf((Block(FORALL, (1,)),), Cnf(1, ((1,),)))


def test_make_qbf_universal_reduction():
    q = make_qbf([Block(EXISTS, (1,)), Block(FORALL, (2,))], Cnf(2, ((1, 2),)))
    assert q.matrix.clauses == ((1,),) and len(q.prefix) == 1


def test_evaluate_matches_truth_table_exhaustively():
    for f in tiny_cnfs(3, 3):
        for bits in product((False, True), repeat=f.num_vars):
            beta = [v if b else -v for v, b in zip(range(1, f.num_vars + 1), bits)]
            want = all(any((l > 0) == bits[abs(l) - 1] for l in c) for c in f.clauses)
            assert evaluate(f, beta) == want


clause_st = st.lists(st.integers(1, 5).flatmap(lambda v: st.sampled_from([v, -v])), min_size=1, max_size=3)
cnf_st = st.lists(clause_st, max_size=5).map(lambda cs: Cnf(5, tuple(map(tuple, cs))))
assign_st = st.lists(st.integers(1, 5), unique=True, max_size=5).flatmap(
    lambda vs: st.tuples(*[st.sampled_from([v, -v]) for v in vs]))


@settings(max_examples=200, deadline=None)
@given(cnf_st, assign_st, assign_st)
def test_conditioning_composes(f, a, b):
    a_vars = {abs(l) for l in a}
    b = tuple(l for l in b if abs(l) not in a_vars)
    assert condition(condition(f, a), b) == condition(f, set(a) | set(b))


@settings(max_examples=200, deadline=None)
@given(cnf_st)
def test_primal_graph_symmetric_irreflexive_and_duplicate_free(f):
    g = primal_graph(f)
    assert all(u < v for u, v in g.edges)
    if f.clauses:
        dup = Cnf(f.num_vars, f.clauses + (f.clauses[0],))
        assert primal_graph(dup) == g


def test_dimacs_round_trip():
    f = Cnf(4, ((1, -2), (3,), (), (-4, 2, 1)))
    assert read_cnf(write_cnf(f)) == f
    d = Dnf(3, ((1, 2), (-3,)))
    assert read_dnf(write_dnf(d)).terms == d.terms
    q = Qbf((Block(EXISTS, (1, 2)), Block(FORALL, (3,)), Block(EXISTS, (4,))), Cnf(4, ((1, 3, 4), (-2, -4))))
    back = read_qdimacs(write_qdimacs(q))
    assert back.prefix == q.prefix and back.matrix == q.matrix


def test_wcnf_rational_weights_round_trip():
    from fractions import Fraction
    w = Wcnf(2, ((1, 2),), (((1,), Fraction(1, 2)), ((-2,), Fraction(-3, 4)), ((2,), Fraction(2))))
    text = write_wcnf(w)
    assert "c scale 4" in text
    back = read_wcnf(text)
    assert back.hard == w.hard and back.soft == w.soft


def test_wcnf_rejects_floats():
    with pytest.raises(InvalidFormula):
        Wcnf(1, (), (((1,), 0.5),))


@pytest.mark.parametrize("text", ["p cnf 2 1\n1 x 0\n", "p cnf 1 1\n2 0\n", "1 2 0\n", "p foo 1 1\n1 0\n"])
def test_dimacs_parse_errors(text):
    with pytest.raises((ParseError, InvalidFormula)):
        read_cnf(text)
