"""Gaussian elimination guided by a strong ordering of a completion H of G_M.

Columns are eliminated in order; the pivot of a column is its earliest row with
a nonzero entry. When the ordering is strong, every entry the elimination
touches is an edge of H, so the work stays proportional to |E(H)|·b. H keeps
only row-column pairs: those are the only positions elimination can touch.
"""

from __future__ import annotations

import gc
from array import array
from bisect import bisect_left
from dataclasses import dataclass, field
from functools import cached_property
from itertools import chain
from typing import Sequence

import numpy as np

from .algebra import SparseMatrix, bipartite_graph
from .decomp import (PathDecomposition, TreePartitionDecomposition,
                     require_valid)
from .graph import Graph, rooted_tree


class FillInError(AssertionError):
    """Elimination needed an entry outside H: the ordering is not strong."""


@dataclass(frozen=True)
class StrongOrdering:
    """Completion H of the bipartite graph (rows first) and a total order on its vertices.

    ``neighbours[v]`` lists the H-neighbours of v sorted by position. Vertices
    with the same neighbourhood may share one sequence object, which keeps H
    small in memory when it is a union of bicliques.
    """

    neighbours: tuple[Sequence[int], ...]
    position: tuple[int, ...]
    n_rows: int
    n_cols: int

    @cached_property
    def h(self) -> Graph:
        return Graph(len(self.neighbours), tuple(tuple(sorted(a)) for a in self.neighbours))

    @property
    def num_vertices(self) -> int:
        return len(self.neighbours)

    @cached_property
    def num_edges(self) -> int:
        return sum(len(self.neighbours[r]) for r in range(self.n_rows))

    @cached_property
    def order(self) -> list[int]:
        out = [0] * len(self.position)
        for v, p in enumerate(self.position):
            out[p] = v
        return out

    @property
    def row_order(self) -> list[int]:
        return [v for v in self.order if v < self.n_rows]

    @property
    def col_order(self) -> list[int]:
        return [v - self.n_rows for v in self.order if v >= self.n_rows]

    @cached_property
    def degeneracy(self) -> int:
        pos = self.position
        return max((sum(1 for w in a if pos[w] > pos[v]) for v, a in enumerate(self.neighbours)), default=0)

    @cached_property
    def width(self) -> int:
        """Largest, over edges ij, of the smaller count of neighbours of i or j at or after the other."""
        return _edge_index(self)[3]


def _edge_index(so: StrongOrdering) -> tuple[list[int], list[int], array, int]:
    """Edge ids of H and the width of the ordering.

    Row r owns the ids ``rbase[r] .. rbase[r + 1] - 1`` in the order of its
    neighbour list; slot ``cbase[c] + i`` of ``ceid`` holds the id of the edge
    to the i-th neighbour of column c.
    """
    nb = so.neighbours
    nr, nc = so.n_rows, so.n_cols
    rdeg = np.fromiter((len(nb[r]) for r in range(nr)), np.int64, nr)
    cdeg = np.fromiter((len(nb[nr + k]) for k in range(nc)), np.int64, nc)
    rbase = np.zeros(nr + 1, np.int64)
    np.cumsum(rdeg, out=rbase[1:])
    cbase = np.zeros(nc + 1, np.int64)
    np.cumsum(cdeg, out=cbase[1:])
    num_edges = int(rbase[-1])
    if int(cbase[-1]) != num_edges:
        raise ValueError("neighbour lists of rows and columns disagree")
    erow = np.repeat(np.arange(nr, dtype=np.int32), rdeg)
    ecol = np.fromiter(chain.from_iterable(nb[:nr]), np.int32, num_edges)
    ecol -= nr
    # column slots: edges grouped by column, rows in position order
    ceid = np.lexsort((np.asarray(so.position, np.int32)[erow], ecol))
    if not np.array_equal(erow[ceid], np.fromiter(chain.from_iterable(nb[nr:]), np.int32, num_edges)):
        raise ValueError("neighbour lists of rows and columns disagree")
    width = 0
    # slot s of column c holds edge e: c has cbase[c + 1] - s neighbours from
    # the row onwards, the row has rbase[row + 1] - e from the column onwards
    for lo in range(0, num_edges, 1 << 20):
        s = np.arange(lo, min(num_edges, lo + (1 << 20)), dtype=np.int64)
        e = ceid[s]
        tails = np.minimum(cbase[ecol[e] + 1] - s, rbase[erow[e] + 1] - e)
        width = max(width, int(tails.max()))
    del erow, ecol
    out = array("q")
    out.frombytes(ceid.astype(np.int64).tobytes())
    return rbase.tolist(), cbase.tolist(), out, width


def _ordering(n_rows: int, n_cols: int, adj: list[set[int]], keys: Sequence) -> StrongOrdering:
    order = sorted(range(n_rows + n_cols), key=keys.__getitem__)
    position = [0] * len(order)
    for p, v in enumerate(order):
        position[v] = p
    nbrs = tuple(tuple(sorted(a, key=position.__getitem__)) for a in adj)
    return StrongOrdering(nbrs, tuple(position), n_rows, n_cols)


def ordering_from_path_decomp(m: SparseMatrix, pd: PathDecomposition) -> StrongOrdering:
    """Bags become bicliques; vertices are ordered by the last bag that contains them."""
    bs = bipartite_graph(m)
    require_valid(pd, bs.graph)
    nr = m.n_rows
    adj: list[set[int]] = [set() for _ in range(bs.graph.n)]
    last = [0] * bs.graph.n
    for t, bag in enumerate(pd.bags):
        rows = [v for v in bag if v < nr]
        cols = [v for v in bag if v >= nr]
        for v in bag:
            last[v] = t
        for r in rows:
            adj[r].update(cols)
        for c in cols:
            adj[c].update(rows)
    keys = [(last[v], v) for v in range(bs.graph.n)]
    return _ordering(nr, m.n_cols, adj, keys)


def ordering_from_tpd(m: SparseMatrix, tpd: TreePartitionDecomposition, root: int = 0) -> StrongOrdering:
    """Bags and adjacent bag pairs become bicliques; every bag follows all its descendants.

    Within a bag vertices are ordered by index, so the neighbours of a vertex
    in bag t are the opposite side of t and its tree neighbours, concatenated
    in bag order. All vertices of one side of a bag share that sequence.
    """
    bs = bipartite_graph(m)
    require_valid(tpd, bs.graph)
    nr = m.n_rows
    nv = bs.graph.n
    q = len(tpd.bags)
    _, bfs = rooted_tree(tpd.tree, root)
    bag_order = bfs[::-1]
    rank = [0] * q
    for i, t in enumerate(bag_order):
        rank[t] = i
    rows = [tuple(sorted(v for v in b if v < nr)) for b in tpd.bags]
    cols = [tuple(sorted(v for v in b if v >= nr)) for b in tpd.bags]
    neighbours: list[Sequence[int]] = [()] * nv
    for t in range(q):
        near = sorted((t, *tpd.tree.adj[t]), key=rank.__getitem__)
        row_side = tuple(c for s in near for c in cols[s])
        col_side = tuple(r for s in near for r in rows[s])
        for r in rows[t]:
            neighbours[r] = row_side
        for c in cols[t]:
            neighbours[c] = col_side
    order = [v for t in bag_order for v in sorted(tpd.bags[t])]
    position = [0] * nv
    for p, v in enumerate(order):
        position[v] = p
    return StrongOrdering(tuple(neighbours), tuple(position), nr, m.n_cols)


def check_strong_ordering(so: StrongOrdering) -> tuple[int, int, int, int] | None:
    """Return a witness (i, j, k, l) of non-strongness or None."""
    pos = so.position
    nbr = so.h.adj_sets
    for i in range(so.h.n):
        ns = sorted(so.h.adj[i], key=pos.__getitem__)
        for a, j in enumerate(ns):
            later = [l for l in so.h.adj[j] if pos[l] >= pos[i]]
            for k in ns[a + 1:]:
                for l in later:
                    if l not in nbr[k]:
                        return (i, j, k, l)
    return None


@dataclass
class EliminationResult:
    """U is the reduced matrix, L the unit lower multipliers (indexed by original rows).

    ``pivots`` lists (row, column) pairs in elimination order; the row removal
    order is the pivot rows followed by the remaining (zero) rows.
    """

    m: SparseMatrix
    U: SparseMatrix
    L: SparseMatrix
    pivots: list[tuple[int, int]]
    row_removal_order: list[int]
    col_removal_order: list[int]
    h_edges: int
    h_vertices: int
    width: int
    stats: dict = field(default_factory=dict)


def guided_elimination(m: SparseMatrix, so: StrongOrdering, *, backend: str = "parray") -> EliminationResult:
    if (so.n_rows, so.n_cols) != m.shape:
        raise ValueError("ordering does not match matrix shape")
    run = {"parray": _eliminate_parray, "hashmap": _eliminate_hashmap}.get(backend)
    if run is None:
        raise ValueError(f"unknown backend {backend!r}")
    # the elimination allocates millions of acyclic containers; cyclic GC only slows it down
    paused = gc.isenabled()
    gc.disable()
    try:
        return run(m, so)
    finally:
        if paused:
            gc.enable()


def _eliminate_parray(m: SparseMatrix, so: StrongOrdering) -> EliminationResult:
    F = m.field
    zero = F.zero
    submul, mul, inv = F.submul, F.mul, F.inv
    nr, nc = m.shape
    nv = nr + nc
    pos = so.position
    nb = so.neighbours
    # one value per edge of H: row r's edges are rbase[r] + i, columns go through ceid
    rbase, cbase, ceid, b = _edge_index(so)
    num_edges = rbase[nr]
    val = [zero] * num_edges
    key = pos.__getitem__
    for r in range(nr):
        ns = nb[r]
        for c, v in m.rows[r].items():
            i = bisect_left(ns, pos[nr + c], key=key)
            if i == len(ns) or ns[i] != nr + c:
                raise ValueError(f"H does not contain nonzero ({r}, {c})")
            val[rbase[r] + i] = v
    stamp = array("q", [-1]) * num_edges
    mark = [-1] * nv
    a = [zero] * nv
    alive_row = bytearray(b"\x01") * nr
    L_rows: list[dict] = [dict() for _ in range(nr)]
    pivots = []
    col_removed = []
    ops = 0
    for colv in so.order:
        if colv < nr:
            continue
        cb = cbase[colv - nr]
        ns = nb[colv]
        nz = [(r, e) for r, e in zip(ns, ceid[cb:cb + len(ns)]) if alive_row[r] and val[e] != zero]
        if not nz:
            col_removed.append(colv - nr)
            continue
        j, pe = nz[0]  # neighbour lists are sorted by position
        if len(nz) > 1:
            R = nz[1:]
            jb = rbase[j]
            C = [(l, e) for l, e in zip(nb[j], range(jb, rbase[j + 1])) if mark[l] != -2 and val[e] != zero]
            step = colv
            for k, e in R:
                mark[k] = step
            for l, e in C:
                mark[l] = step
                a[l] = val[e]
            piv_inv = inv(val[pe])
            mult = {}
            for k, e in R:
                mk = mul(val[e], piv_inv)
                mult[k] = mk
                L_rows[k][j] = mk
            done = 0
            # each update lies among the last b neighbours of its row or of its column
            for k, _ in R:
                mk = mult[k]
                ns = nb[k]
                lo = len(ns) - b if len(ns) > b else 0
                for l, e in zip(ns[lo:], range(rbase[k] + lo, rbase[k + 1])):
                    if mark[l] == step and stamp[e] != step:
                        stamp[e] = step
                        val[e] = submul(val[e], mk, a[l])
                        done += 1
            for l, _ in C:
                al = a[l]
                ns = nb[l]
                lo = len(ns) - b if len(ns) > b else 0
                cb = cbase[l - nr]
                for k, e in zip(ns[lo:], ceid[cb + lo:cb + len(ns)]):
                    if mark[k] == step and stamp[e] != step:
                        stamp[e] = step
                        val[e] = submul(val[e], mult[k], al)
                        done += 1
            if done != len(R) * len(C):
                raise FillInError(f"column {colv - nr}: {len(R) * len(C) - done} updates outside H")
            ops += 1 + len(R) + 2 * done
        alive_row[j] = 0
        mark[colv] = -2
        pivots.append((j, colv - nr))
        col_removed.append(colv - nr)
    pivot_rows = [j for j, _ in pivots]
    rest = [v for v in so.order if v < nr and alive_row[v]]
    U_rows: list[dict] = [dict() for _ in range(nr)]
    for r in range(nr):
        base = rbase[r]
        for i, c in enumerate(nb[r]):
            v = val[base + i]
            if v != zero:
                U_rows[r][c - nr] = v
    for r in rest:
        if U_rows[r]:
            raise AssertionError(f"row {r} left nonzero after elimination")
    for r in range(nr):
        L_rows[r][r] = F.one
    return EliminationResult(
        m=m, U=SparseMatrix.from_rows(nr, nc, F, U_rows), L=SparseMatrix.from_rows(nr, nr, F, L_rows),
        pivots=pivots, row_removal_order=pivot_rows + rest, col_removal_order=col_removed,
        h_edges=num_edges, h_vertices=nv, width=b, stats={"field_ops": ops})


def _eliminate_hashmap(m: SparseMatrix, so: StrongOrdering) -> EliminationResult:
    F = m.field
    zero = F.zero
    nr, nc = m.shape
    pos = so.position
    hset = so.h.adj_sets
    rows = [dict(r) for r in m.rows]
    cols: list[dict] = [dict() for _ in range(nc)]
    for r, row in enumerate(rows):
        for c, v in row.items():
            if nr + c not in hset[r]:
                raise ValueError(f"H does not contain nonzero ({r}, {c})")
            cols[c][r] = v
    alive_row = [True] * nr
    alive_col = [True] * nc
    L_rows: list[dict] = [dict() for _ in range(nr)]
    pivots = []
    col_removed = []
    ops = 0
    for colv in (v for v in so.order if v >= nr):
        i = colv - nr
        nz = sorted((r for r in cols[i] if alive_row[r]), key=pos.__getitem__)
        if not nz:
            alive_col[i] = False
            col_removed.append(i)
            continue
        j = nz[0]
        piv_inv = F.inv(rows[j][i])
        C = [(l, v) for l, v in rows[j].items() if alive_col[l]]
        for k in nz[1:]:
            mk = F.mul(rows[k][i], piv_inv)
            L_rows[k][j] = mk
            for l, v in C:
                if nr + l not in hset[k]:
                    raise FillInError(f"entry ({k}, {l}) outside H")
                new = F.submul(rows[k].get(l, zero), mk, v)
                if new != zero:
                    rows[k][l] = new
                    cols[l][k] = new
                else:
                    rows[k].pop(l, None)
                    cols[l].pop(k, None)
            ops += 1 + 2 * len(C)
        ops += 1
        alive_row[j] = False
        alive_col[i] = False
        pivots.append((j, i))
        col_removed.append(i)
    pivot_rows = [j for j, _ in pivots]
    rest = [v for v in so.order if v < nr and alive_row[v]]
    for r in rest:
        if rows[r]:
            raise AssertionError(f"row {r} left nonzero after elimination")
    for r in range(nr):
        L_rows[r][r] = F.one
    return EliminationResult(
        m=m, U=SparseMatrix(nr, nc, F, rows), L=SparseMatrix(nr, nr, F, L_rows),
        pivots=pivots, row_removal_order=pivot_rows + rest, col_removal_order=col_removed,
        h_edges=so.num_edges, h_vertices=so.num_vertices, width=so.width, stats={"field_ops": ops})


def _permutation_sign(perm: Sequence[int]) -> int:
    seen = bytearray(len(perm))
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = 1
            x = perm[x]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass
class PluqFactorization:
    """M = P·L'·U'·Q.

    Row a of U' is original row ``row_order[a]``, column b of U' is original
    column ``col_order[b]``. ``pivot_cols[a]`` is the original column holding the
    leading entry of U' row a, for a < rank.
    """

    field: object
    row_order: list[int]
    col_order: list[int]
    rank: int
    pivots: list[tuple[int, int]]
    L: SparseMatrix
    U: SparseMatrix

    @cached_property
    def L_prime(self) -> SparseMatrix:
        rpos = {r: a for a, r in enumerate(self.row_order)}
        rows: list[dict] = [dict() for _ in self.row_order]
        for r, a in rpos.items():
            rows[a] = {rpos[j]: v for j, v in self.L.rows[r].items()}
        n = len(rows)
        return SparseMatrix.from_rows(n, n, self.field, rows)

    @cached_property
    def U_prime(self) -> SparseMatrix:
        cpos = {c: b for b, c in enumerate(self.col_order)}
        rows: list[dict] = [dict() for _ in self.row_order]
        for a, r in enumerate(self.row_order):
            rows[a] = {cpos[c]: v for c, v in self.U.rows[r].items()}
        return SparseMatrix.from_rows(len(rows), len(self.col_order), self.field, rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.row_order), len(self.col_order))

    def P(self) -> SparseMatrix:
        targets = [0] * len(self.row_order)
        for a, r in enumerate(self.row_order):
            targets[r] = a
        return SparseMatrix.permutation(targets, self.field)

    def Q(self) -> SparseMatrix:
        return SparseMatrix.permutation(self.col_order, self.field)

    def product(self) -> SparseMatrix:
        return self.P().matmul(self.L_prime).matmul(self.U_prime).matmul(self.Q())


def pluq(res: EliminationResult) -> PluqFactorization:
    return PluqFactorization(res.m.field, list(res.row_removal_order), list(res.col_removal_order),
                             len(res.pivots), list(res.pivots), res.L, res.U)


@dataclass(frozen=True)
class RankInfo:
    rank: int
    det: object | None
    rows: tuple[int, ...]
    cols: tuple[int, ...]


def rank_det_maxsubmatrix(f: PluqFactorization) -> RankInfo:
    """Rank, determinant (None unless square) and a maximal nonsingular submatrix."""
    nr, nc = f.shape
    F = f.field
    det = None
    if nr == nc:
        if f.rank < nr:
            det = F.zero
        else:
            det = F.one
            for j, i in f.pivots:
                det = F.mul(det, f.U.rows[j][i])
            if _permutation_sign(f.row_order) * _permutation_sign(f.col_order) < 0:
                det = F.neg(det)
    rows = tuple(sorted(j for j, _ in f.pivots))
    cols = tuple(sorted(i for _, i in f.pivots))
    return RankInfo(f.rank, det, rows, cols)


def determinant(f: PluqFactorization):
    if f.shape[0] != f.shape[1]:
        raise ValueError("determinant of a non-square matrix")
    return rank_det_maxsubmatrix(f).det


def solve(f: PluqFactorization, r: Sequence) -> list | None:
    """A solution of M·x = r with free variables set to zero, or None if inconsistent."""
    nr, nc = f.shape
    if len(r) != nr:
        raise ValueError("right-hand side has the wrong length")
    F = f.field
    zero = F.zero
    # forward substitution with L (rows in removal order)
    w = {}
    for k in f.row_order:
        acc = F(r[k])
        for j, v in f.L.rows[k].items():
            if j != k:
                acc = F.submul(acc, v, w[j])
        w[k] = acc
    for k in f.row_order[f.rank:]:
        if w[k] != zero:
            return None
    x = [zero] * nc
    for j, i in reversed(f.pivots):
        acc = w[j]
        for c, v in f.U.rows[j].items():
            if c != i:
                acc = F.submul(acc, v, x[c])
        x[i] = F.div(acc, f.U.rows[j][i])
    return x
