import random

import pytest
from hypothesis import given, strategies as st

from instances import SMALL_PRIME, path_matrix, random_field, tpd_matrix
from lowtw.algebra import QQ, PrimeField, SparseMatrix, bipartite_graph
from lowtw.decomp import PathDecomposition, TreePartitionDecomposition
from lowtw.elimination import (FillInError, StrongOrdering, check_strong_ordering, determinant,
                               guided_elimination, ordering_from_path_decomp, ordering_from_tpd,
                               pluq, rank_det_maxsubmatrix, solve)
from lowtw.graph import Graph
from lowtw.oracles import brute_strongness, dense_rank_det, dense_solve

F = PrimeField(SMALL_PRIME)


def _factor(m, so, backend="parray"):
    return pluq(guided_elimination(m, so, backend=backend))


def test_identity():
    m = SparseMatrix.identity(4, F)
    pd = PathDecomposition.from_bags([{i, 4 + i} for i in range(4)])
    res = guided_elimination(m, ordering_from_path_decomp(m, pd))
    assert res.U == m and res.L == m
    assert len(res.pivots) == 4


def test_antidiagonal_finds_pivots():
    m = SparseMatrix.from_dense([[0, 1], [1, 0]], QQ)
    pd = PathDecomposition.from_bags([{0, 1, 2, 3}])
    f = _factor(m, ordering_from_path_decomp(m, pd))
    info = rank_det_maxsubmatrix(f)
    assert info.rank == 2 and info.det == -1
    assert f.product() == m


def test_tridiagonal_lu_product():
    n = 50
    rng = random.Random(5)
    rows = [{j: F(rng.randrange(1, F.p)) for j in (i - 1, i, i + 1) if 0 <= j < n} for i in range(n)]
    m = SparseMatrix(n, n, F, rows)
    seq = []
    for i in range(n):
        seq += [i, n + i]
    pd = PathDecomposition.from_bags(seq[a:a + 4] for a in range(len(seq) - 3))
    so = ordering_from_path_decomp(m, pd)
    res = guided_elimination(m, so)
    nb = so.neighbours
    for r, row in enumerate(res.U.rows):
        assert all(m.n_rows + c in nb[r] for c in row)
    assert pluq(res).product() == m


def test_fill_in_outside_h_is_detected():
    # H = G_M; eliminating column 0 with row 0 would create entry (1, 1)
    m = SparseMatrix.from_dense([[1, 1], [1, 0]], QQ)
    nbrs = ((2, 3), (2,), (0, 1), (0,))
    so = StrongOrdering(nbrs, (0, 1, 2, 3), 2, 2)
    assert check_strong_ordering(so) is not None
    with pytest.raises(FillInError):
        guided_elimination(m, so)


def test_adversarial_c6_order_is_not_strong():
    # bipartite 6-cycle r0 c0 r1 c1 r2 c2
    nbrs = ((3, 5), (3, 4), (4, 5), (0, 1), (1, 2), (0, 2))
    pos = (0, 3, 1, 4, 2, 5)
    nb = tuple(tuple(sorted(a, key=pos.__getitem__)) for a in nbrs)
    so = StrongOrdering(nb, pos, 3, 3)
    witness = check_strong_ordering(so)
    assert witness is not None
    assert brute_strongness(so.h, so.order) is not None


def test_clique_orderings_are_strong():
    m = SparseMatrix.from_dense([[1, 2, 3], [4, 5, 6]], QQ)
    so = ordering_from_path_decomp(m, PathDecomposition.from_bags([range(5)]))
    assert check_strong_ordering(so) is None
    assert brute_strongness(so.h, so.order) is None


def test_two_bag_tpd_orders_child_before_root():
    m = SparseMatrix.from_dense([[1, 1], [0, 1]], QQ)
    tpd = TreePartitionDecomposition.from_bags([{0, 2}, {1, 3}], [(0, 1)])
    so = ordering_from_tpd(m, tpd, root=0)
    assert so.order == [1, 3, 0, 2]
    assert check_strong_ordering(so) is None


@given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 5), st.integers(0, 10**6))
def test_path_orderings_are_strong_with_small_degeneracy(nr, nc, w, seed):
    rng = random.Random(seed)
    m, pd = path_matrix(nr, nc, w, F, rng)
    so = ordering_from_path_decomp(m, pd)
    assert check_strong_ordering(so) is None
    assert so.degeneracy <= pd.width
    assert so.num_edges <= so.degeneracy * so.num_vertices <= 2 * pd.width * so.num_vertices
    if so.num_vertices <= 30:
        assert brute_strongness(so.h, so.order) is None


@given(st.integers(1, 15), st.integers(1, 4), st.integers(0, 10**6))
def test_tpd_orderings_are_strong_with_small_degeneracy(nb, w, seed):
    rng = random.Random(seed)
    m, tpd = tpd_matrix(nb, w, F, rng)
    so = ordering_from_tpd(m, tpd, root=rng.randrange(nb))
    assert check_strong_ordering(so) is None
    assert so.degeneracy <= 2 * tpd.width
    assert so.num_edges <= so.degeneracy * so.num_vertices
    if so.num_vertices <= 30:
        assert brute_strongness(so.h, so.order) is None


@given(st.integers(1, 25), st.integers(1, 25), st.integers(1, 5), st.integers(0, 10**6))
def test_pluq_against_dense_oracle(nr, nc, w, seed):
    rng = random.Random(seed)
    field = random_field(rng)
    m, pd = path_matrix(nr, nc, w, field, rng)
    so = ordering_from_path_decomp(m, pd)
    res = guided_elimination(m, so)
    f = pluq(res)
    assert f.product() == m
    assert res.L.nnz <= so.num_edges + so.num_vertices
    info = rank_det_maxsubmatrix(f)
    rank, det = dense_rank_det(m.to_dense(), field)
    assert info.rank == rank
    assert info.det == det
    sub, _, _ = m.submatrix(info.rows, info.cols)
    assert dense_rank_det(sub.to_dense(), field)[0] == info.rank


@given(st.integers(1, 12), st.integers(1, 4), st.integers(0, 10**6))
def test_backends_agree(nb, w, seed):
    rng = random.Random(seed)
    m, tpd = tpd_matrix(nb, w, QQ, rng)
    so = ordering_from_tpd(m, tpd)
    a = guided_elimination(m, so, backend="parray")
    b = guided_elimination(m, so, backend="hashmap")
    assert a.pivots == b.pivots
    assert a.U == b.U and a.L == b.L


@given(st.integers(1, 12), st.integers(1, 4), st.integers(0, 10**6))
def test_solve_matches_dense_oracle(nb, w, seed):
    rng = random.Random(seed)
    m, tpd = tpd_matrix(nb, w, QQ, rng)
    f = _factor(m, ordering_from_tpd(m, tpd))
    if rng.random() < 0.5:
        x0 = [QQ(rng.randint(-3, 3)) for _ in range(m.n_cols)]
        r = m.matvec(x0)
    else:
        r = [QQ(rng.randint(-3, 3)) for _ in range(m.n_rows)]
    x = solve(f, r)
    ref = dense_solve(m.to_dense(), r, QQ)
    assert (x is None) == (ref is None)
    if x is not None:
        assert m.matvec(x) == r


def test_determinant_rejects_rectangular():
    m = SparseMatrix.from_dense([[1, 2, 3]], QQ)
    f = _factor(m, ordering_from_path_decomp(m, PathDecomposition.from_bags([range(4)])))
    with pytest.raises(ValueError):
        determinant(f)


def test_ordering_must_match_shape():
    m = SparseMatrix.identity(2, QQ)
    other = SparseMatrix.identity(3, QQ)
    so = ordering_from_path_decomp(other, PathDecomposition.from_bags([range(6)]))
    with pytest.raises(ValueError):
        guided_elimination(m, so)


def test_bipartite_graph_numbering():
    m = SparseMatrix.from_dense([[1, 0], [0, 2]], QQ)
    bs = bipartite_graph(m)
    assert sorted(bs.graph.edges()) == [(0, 2), (1, 3)]
    assert isinstance(bs.graph, Graph)
