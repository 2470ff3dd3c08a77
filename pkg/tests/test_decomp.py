import random

import pytest
from hypothesis import given, strategies as st

from instances import partial_ktree, shuffled
from lowtw.decomp import (InvalidDecomposition, PathDecomposition, TreeDecomposition,
                          TreePartitionDecomposition, balanced_tree_node, clean, is_clean,
                          nice_form, require_valid, topmost_edge_counts, validate)
from lowtw.graph import Graph, components_avoiding, is_tree, one_subdivision, rooted_tree
from lowtw.oracles import exact_treewidth

P4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


def test_path_decomposition_of_path_is_valid():
    pd = PathDecomposition.from_bags([{0, 1}, {1, 2}, {2, 3}])
    assert validate(pd, P4) is None
    assert pd.width == 1


@pytest.mark.parametrize("bags, clause", [
    ([{0, 1}, {2, 3}], "edge not covered"),
    ([{0, 1}, {1, 2}, {3}], "edge not covered"),
    ([{0, 1}, {1, 2}, {0, 2, 3}], "interval property violated"),
    ([{0, 1}, {1, 2}], "vertex not covered"),
])
def test_path_decomposition_violations(bags, clause):
    bad = validate(PathDecomposition.from_bags(bags), P4)
    assert bad is not None and bad.clause == clause


def test_tree_decomposition_violations():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    split_vertex = TreeDecomposition.from_bags([{0, 1}, {2}, {1, 2}], [(0, 1), (1, 2)])
    assert validate(split_vertex, g).clause == "subtree disconnected"
    not_tree = TreeDecomposition.from_bags([{0, 1}, {1, 2}], [])
    assert validate(not_tree, g).clause == "tree is not a tree"
    with pytest.raises(InvalidDecomposition):
        require_valid(not_tree, g)


def test_tree_partition_violations():
    g = Graph.from_edges(3, [(0, 1), (0, 2)])
    tree = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert validate(TreePartitionDecomposition(tree, (frozenset({0}), frozenset({1}), frozenset({2}))),
                    g).clause == "edge not covered"
    assert validate(TreePartitionDecomposition(tree, (frozenset({0, 1}), frozenset({1}), frozenset({2}))),
                    g).clause == "vertex in two bags"
    ok = TreePartitionDecomposition(tree, (frozenset({1}), frozenset({0}), frozenset({2})))
    assert validate(ok, g) is None
    assert ok.width == 1


def test_clean_merges_nested_bags():
    td = TreeDecomposition.from_bags([{0, 1}, {1}, {1, 2}, {1, 2}], [(0, 1), (1, 2), (2, 3)], root=1)
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    c = clean(td)
    assert is_clean(c)
    assert sorted(map(sorted, c.bags)) == [[0, 1], [1, 2]]
    assert validate(c, g) is None


@given(st.integers(2, 40), st.integers(1, 4), st.integers(0, 10**6))
def test_clean_and_nice_form_properties(n, k, seed):
    rng = random.Random(seed)
    g, td = partial_ktree(n, k, rng)
    g, td = shuffled(g, td, rng)
    c = clean(td)
    assert validate(c, g) is None and is_clean(c)
    assert c.width <= td.width
    assert c.num_nodes <= max(n, 1)
    nf = nice_form(td, g)
    assert validate(nf, g) is None
    assert nf.width == c.width
    assert nf.num_nodes <= 5 * n
    rt = nf.rooting
    assert all(len(ch) <= 2 for ch in rt.children)
    assert max(topmost_edge_counts(nf, g)) <= max(nf.width, 0)
    # the root is empty and reached by dropping one vertex at a time
    assert nf.bags[rt.root] == frozenset()
    t = rt.root
    while len(rt.children[t]) == 1 and len(nf.bags[rt.children[t][0]]) == len(nf.bags[t]) + 1:
        assert nf.bags[t] < nf.bags[rt.children[t][0]]
        t = rt.children[t][0]


def test_nice_form_forgets_singly_when_bound_would_break():
    # a node forgetting two vertices of a dense bag would be topmost for too many edges
    g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    td = TreeDecomposition.from_bags([{0, 1}, {0, 1, 2, 3}], [(0, 1)], root=0)
    nf = nice_form(td, g)
    assert max(topmost_edge_counts(nf, g)) <= nf.width


@given(st.integers(1, 30), st.integers(0, 10**6))
def test_balanced_tree_node_halves_the_measure(n, seed):
    rng = random.Random(seed)
    tree = Graph.from_edges(n, [(rng.randrange(i), i) for i in range(1, n)])
    mu = [rng.randint(0, 3) for _ in range(n)]
    if sum(mu) == 0:
        mu[0] = 1
    x = balanced_tree_node(tree, mu)
    for comp in components_avoiding(tree, [x]):
        assert 2 * sum(mu[v] for v in comp) <= sum(mu)


def test_one_subdivision_and_rooting():
    tree = Graph.from_edges(3, [(0, 1), (1, 2)])
    sub, edge_vertex = one_subdivision(tree)
    assert is_tree(sub) and sub.n == 5
    assert set(edge_vertex) == {(0, 1), (1, 2)}
    parent, order = rooted_tree(sub, 0)
    assert order[0] == 0 and parent[0] == -1


def test_partial_ktree_decomposition_matches_exact_treewidth():
    rng = random.Random(3)
    for _ in range(20):
        g, td = partial_ktree(rng.randint(2, 10), rng.randint(1, 3), rng, p=1.0)
        assert validate(td, g) is None
        assert exact_treewidth(g) == td.width
