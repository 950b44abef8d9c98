import random
from itertools import combinations, permutations

import pytest

from twground.formula import Cnf
from twground.graph import Graph, graph_from_edges
from twground.treedec import (InvalidInput, LabeledTreeDecomposition, TreeDecomposition, Uncoverable,
                              add_empty_leaves, elimination_td, from_tree, label, matching_path, min_fill,
                              normalize, read_gr, read_td, validate, width, write_gr, write_td)

from helpers import RUNNING_BAGS, RUNNING_CNF

# a=1 .. g=7
DIPPER = graph_from_edges([(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 4)])
DIPPER_TD = from_tree([{1, 2}, {2, 3}, {3, 4}, {4, 6}, {4, 6, 5}, {4, 6, 7}],
                      [(0, 1), (1, 2), (2, 3), (3, 4), (3, 5)])


def treewidth(g: Graph) -> int:
    if not g.vertices:
        return -1
    return min(elimination_td(g, order).width for order in permutations(g.vertices))


def all_graphs(n):
    pairs = list(combinations(range(1, n + 1), 2))
    for mask in range(1 << len(pairs)):
        yield Graph(tuple(range(1, n + 1)), frozenset(p for i, p in enumerate(pairs) if mask >> i & 1))


def random_graph(rng, n, p):
    return Graph(tuple(range(1, n + 1)),
                 frozenset(e for e in combinations(range(1, n + 1), 2) if rng.random() < p))


def check_connected_tree(td):
    assert len(td.postorder) == len(td.bags)


def test_big_dipper_width_two():
    rep = validate(DIPPER, DIPPER_TD)
    assert rep.valid and rep.width == 2 and width(DIPPER_TD) == 2


def test_single_bag_path():
    g = graph_from_edges([(1, 2), (2, 3)])
    td = TreeDecomposition(({1, 2, 3},), (None,))
    assert validate(g, td).valid and td.width == 2


def test_uncovered_edge_reported():
    g = graph_from_edges([(1, 2)])
    td = TreeDecomposition(({1}, {2}), (None, 0))
    rep = validate(g, td)
    assert not rep.valid and rep.uncovered_edges == [(1, 2)]


def test_disconnected_vertex_reported():
    g = graph_from_edges([(1, 2), (2, 3)])
    td = TreeDecomposition(({1, 2}, {3}, {2, 3}), (None, 0, 1))
    rep = validate(g, td)
    assert not rep.valid and rep.disconnected_vertices == [2]


def test_width_conventions():
    assert TreeDecomposition((set(),), (None,)).width == -1
    td = TreeDecomposition(({1, 2, 3}, {1, 2, 3, 4}, {4, 5, 6}), (None, 0, 1))
    assert td.width == 3


@pytest.mark.parametrize("g, w", [
    (graph_from_edges([(1, 2), (2, 3), (3, 4), (4, 1)]), 2),
    (graph_from_edges([(1, 2), (1, 3), (3, 4), (3, 5)]), 1),
    (graph_from_edges(list(combinations(range(1, 5), 2))), 3),
])
def test_min_fill_examples(g, w):
    td = min_fill(g)
    assert validate(g, td).valid and td.width == w


def test_min_fill_deterministic():
    g = random_graph(random.Random(3), 8, 0.4)
    assert min_fill(g) == min_fill(g)


def test_min_fill_valid_on_random_graphs():
    rng = random.Random(11)
    for _ in range(300):
        g = random_graph(rng, rng.randint(0, 8), rng.random())
        assert validate(g, min_fill(g)).valid


def test_min_fill_never_beats_treewidth_exhaustive():
    for n in range(0, 6):
        for g in all_graphs(n):
            td = min_fill(g)
            assert validate(g, td).valid
            assert td.width >= treewidth(g)


def test_normalize_star():
    td = TreeDecomposition(({1}, {1, 2}, {1, 3}, {1, 4}), (None, 0, 0, 0))
    g = graph_from_edges([(1, 2), (1, 3), (1, 4)])
    out = normalize(td, g)
    assert all(len(c) <= 2 for c in out.children)
    assert out.width == td.width and validate(g, out).valid


def test_normalize_identity_cases():
    single = TreeDecomposition(({1, 2},), (None,))
    assert normalize(single) == single
    assert normalize(DIPPER_TD, DIPPER) == DIPPER_TD


def test_normalize_rejects_invalid():
    with pytest.raises(InvalidInput):
        normalize(TreeDecomposition(({1}, {2}), (None, 0)), graph_from_edges([(1, 2)]))


def test_label_running_example():
    td = TreeDecomposition(RUNNING_BAGS, (None, 0, 1))
    ltd = label(td, RUNNING_CNF)
    assert ltd.bags[ltd.node_of[0]] == {1, 2, 5}
    assert ltd.bags[ltd.node_of[1]] == {2, 3, 4, 5}
    assert ltd.bags[ltd.node_of[2]] == {1, 2, 4, 5}


def test_label_duplicates_root_for_two_clauses():
    f = Cnf(2, ((1, 2), (-1, -2)))
    ltd = label(TreeDecomposition(({1, 2},), (None,)), f)
    assert len(ltd.bags) == 2 and sorted(map(len, ltd.labels)) == [1, 1]
    assert ltd.parent == (None, 0) and ltd.width == 1


def test_label_empty_formula():
    ltd = label(TreeDecomposition(({1, 2},), (None,)), Cnf(2, ()))
    assert ltd.labels == ((),)


def test_label_uncoverable():
    with pytest.raises(Uncoverable):
        label(TreeDecomposition(({1}, {2}), (None, 0)), Cnf(2, ((1, 2),)))


def test_label_invariants_random():
    rng = random.Random(5)
    from helpers import random_cnf
    from twground.formula import primal_graph
    for _ in range(200):
        f = random_cnf(rng, rng.randint(1, 8), rng.randint(0, 10), 4)
        td = min_fill(primal_graph(f))
        ltd = label(normalize(td), f)
        assert ltd.width == td.width
        seen = sorted(i for ls in ltd.labels for i in ls)
        assert seen == list(range(len(f.clauses)))
        assert all(len(ls) <= 1 for ls in ltd.labels)
        for t, ls in enumerate(ltd.labels):
            for i in ls:
                assert {abs(l) for l in f.clauses[i]} <= ltd.bags[t]
        assert validate(primal_graph(f), ltd).valid


def test_empty_leaves():
    out = add_empty_leaves(DIPPER_TD)
    assert validate(DIPPER, out).valid
    assert all(not out.bags[t] for t in range(len(out.bags)) if not out.children[t])


def test_matching_path_keeps_width():
    td = TreeDecomposition(({1, 2, 3}, {4, 5, 6}), (None, 0))
    g = graph_from_edges([(1, 2), (2, 3), (1, 3), (4, 5), (5, 6), (4, 6), (1, 4), (2, 5), (3, 6)])
    out = matching_path(td, {1: [(1, 4), (2, 5), (3, 6)]})
    assert validate(g, out).valid and out.width == 3


def test_pace_round_trip():
    text = write_td(DIPPER_TD, 7)
    td, nv = read_td(text)
    assert nv == 7 and td.bags == DIPPER_TD.bags and td.parent == DIPPER_TD.parent
    assert read_gr(write_gr(DIPPER)) == DIPPER


def test_pace_labels_round_trip():
    ltd = label(TreeDecomposition(RUNNING_BAGS, (None, 0, 1)), RUNNING_CNF)
    back, _ = read_td(write_td(ltd, 5))
    assert isinstance(back, LabeledTreeDecomposition) and back.labels == ltd.labels


@pytest.mark.parametrize("text", ["b 1 1\n", "s td 2 1 2\nb 1 1\nb 2 2\n", "s tw 1 1 1\nb 1 1\n"])
def test_pace_errors(text):
    with pytest.raises(ValueError):
        read_td(text)
