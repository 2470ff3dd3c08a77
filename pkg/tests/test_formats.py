import pytest
from hypothesis import given, strategies as st

from lowtw.algebra import QQ, PrimeField, SparseMatrix
from lowtw.decomp import TreeDecomposition, TreePartitionDecomposition
from lowtw.formats import (DuplicateEntry, MalformedHeader, OutOfRange, ParseError,
                           emit_decomposition, emit_graph, emit_matrix, emit_vector,
                           parse_decomposition, parse_graph, parse_matrix, parse_vector, path_bags)
from lowtw.graph import DiGraph, Graph


def test_graph_round_trip_with_comments():
    text = "c a path\np tw 4 3\n1 2\n2 3\nc inline comment\n3 4\n"
    g = parse_graph(text)
    assert sorted(g.edges()) == [(0, 1), (1, 2), (2, 3)]
    assert parse_graph(emit_graph(g)) == g


def test_directed_graph_round_trip():
    g = parse_graph("p dg 3 3\n1 2\n2 1\n2 3\n")
    assert isinstance(g, DiGraph)
    assert sorted(g.arcs()) == [(0, 1), (1, 0), (1, 2)]
    assert emit_graph(parse_graph(emit_graph(g))) == emit_graph(g)


@pytest.mark.parametrize("text, err", [
    ("", MalformedHeader),
    ("p td 3 1\n1 2\n", MalformedHeader),
    ("p tw 3 1\n1 4\n", OutOfRange),
    ("p tw 3 2\n1 2\n2 1\n", DuplicateEntry),
    ("p tw 3 2\n1 2\n", MalformedHeader),
    ("p tw 3 1\n1 x\n", ParseError),
    ("p tw 3 1\n2 2\n", ParseError),
])
def test_graph_parse_errors(text, err):
    with pytest.raises(err):
        parse_graph(text)


def test_parse_error_carries_line():
    with pytest.raises(OutOfRange) as info:
        parse_graph("p tw 2 1\nc\n1 3\n")
    assert info.value.line == 3


def test_decomposition_round_trip():
    td = TreeDecomposition.from_bags([{0, 1}, {1, 2}, {2, 3}], [(0, 1), (1, 2)])
    text = emit_decomposition(td, 4)
    assert text.startswith("s td 3 2 4\n")
    back = parse_decomposition(text)
    assert back.bags == td.bags and sorted(back.tree.edges()) == sorted(td.tree.edges())
    assert path_bags(back) == list(td.bags)
    star = TreeDecomposition.from_bags([{0, 1}, {1, 2}, {1, 3}], [(0, 1), (0, 2)])
    assert path_bags(parse_decomposition(emit_decomposition(star, 4))) is None


def test_tree_partition_round_trip():
    tpd = TreePartitionDecomposition.from_bags([{0}, {1, 2}], [(0, 1)])
    back = parse_decomposition(emit_decomposition(tpd, 3))
    assert isinstance(back, TreePartitionDecomposition) and back.bags == tpd.bags


@pytest.mark.parametrize("text, err", [
    ("s td 2 2 3\nb 1 1 2\n", ParseError),
    ("s td 1 1 3\nb 1 1 2\n", ParseError),
    ("s td 1 2 3\nb 1 1 1\n", DuplicateEntry),
    ("s td 2 2 3\nb 1 1\nb 1 2\n", DuplicateEntry),
    ("s xx 1 1 1\n", MalformedHeader),
])
def test_decomposition_parse_errors(text, err):
    with pytest.raises(err):
        parse_decomposition(text)


def test_matrix_and_vector_round_trip():
    m = SparseMatrix.from_dense([[1, 0], [0, -2]], QQ)
    text = emit_matrix(m)
    assert text == "m 2 2 0\n1 1 1\n2 2 -2\n"
    assert parse_matrix(text) == m
    F = PrimeField(7)
    assert parse_vector("1/2\n3\n", F) == [4, 3]
    assert emit_vector([QQ(1) / 3, QQ(2)], QQ) == "1/3\n2\n"


@pytest.mark.parametrize("text", [
    "m 1 1 0\n1 1 0\n",
    "m 1 1 4\n1 1 1\n",
    "m 1 1 0\n1 1 1\n1 1 2\n",
    "m 1 1 0\n2 1 1\n",
])
def test_matrix_parse_errors(text):
    with pytest.raises(ParseError):
        parse_matrix(text)


@given(st.integers(1, 8), st.sets(st.tuples(st.integers(0, 7), st.integers(0, 7)), max_size=20))
def test_graph_emit_parse_is_stable(n, pairs):
    edges = {(min(u, v), max(u, v)) for u, v in pairs if u != v and u < n and v < n}
    g = Graph.from_edges(n, edges)
    text = emit_graph(g)
    assert emit_graph(parse_graph(text)) == text
