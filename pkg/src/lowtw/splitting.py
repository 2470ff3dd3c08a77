"""Vertex splitting of a matrix along a tree decomposition of its bipartite graph.

Every row and column is replaced by one copy per node of the subtree of bags
that contain it; consecutive copies are chained by ±1 entries in extra rows
and columns. The split matrix has a tree-partition decomposition over the
1-subdivision of the decomposition tree, so the elimination for
tree-partition decompositions applies, and rank, determinant and solutions
of the original matrix can be read off.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import chain

import numpy as np

from .algebra import SparseMatrix, bipartite_graph
from .decomp import (TreeDecomposition, TreePartitionDecomposition,
                     nice_form, require_valid)
from .elimination import (PluqFactorization, guided_elimination,
                          ordering_from_tpd, pluq, rank_det_maxsubmatrix)
from .elimination import solve as pluq_solve
from .graph import Graph


@dataclass(frozen=True)
class TreeSplit:
    """Per bipartite vertex v: the nodes of its tree E(v) in pre-order (root first)
    and, for every non-root position i, the position of its parent in the same
    list (``parent_slot[v][0]`` is -1); per nonzero (row, col): the node pair
    (t, t') it is attached to."""

    n_rows: int
    n_cols: int
    nodes: tuple[tuple[int, ...], ...]
    parent_slot: tuple[tuple[int, ...], ...]
    edge_nodes: dict[tuple[int, int], tuple[int, int]]
    td: TreeDecomposition | None = None

    @property
    def norm(self) -> int:
        return sum(len(ns) - 1 for ns in self.nodes)

    def parent(self, v: int, i: int) -> int:
        """Parent node of the i-th node of E(v)."""
        return self.nodes[v][self.parent_slot[v][i]]


def tree_split_from_td(m: SparseMatrix, td: TreeDecomposition) -> TreeSplit:
    """E(v) is the subtree of bags containing v; a nonzero sits at the topmost bag holding both ends."""
    bs = bipartite_graph(m)
    require_valid(td, bs.graph)
    rt = td.rooting
    nv = bs.graph.n
    nodes: list[list[int]] = [[] for _ in range(nv)]
    for t in rt.preorder:
        for v in td.bags[t]:
            nodes[v].append(t)
    parent_slot = []
    for ns in nodes:
        slot = {t: i for i, t in enumerate(ns)}
        parent_slot.append((-1,) + tuple(slot[rt.parent[t]] for t in ns[1:]))
    depth = rt.depth
    nr = m.n_rows
    edge_nodes = {}
    for r, row in enumerate(m.rows):
        for c in row:
            a, b = nodes[r][0], nodes[nr + c][0]
            t = a if depth[a] >= depth[b] else b
            edge_nodes[(r, c)] = (t, t)
    return TreeSplit(nr, m.n_cols, tuple(tuple(ns) for ns in nodes), tuple(parent_slot), edge_nodes, td)


class _CopyIndex:
    """Index arithmetic for copies and chains of a tree-split.

    The i-th copy of vertex v has the global id ``offset[v] + i``. Split rows
    are the root copies of the original rows, then their other copies, then
    one chain row per non-root copy of a column vertex; columns likewise.
    """

    def __init__(self, ts: TreeSplit):
        self.ts = ts
        nr = ts.n_rows
        sizes = np.fromiter((len(ns) for ns in ts.nodes), np.int64, len(ts.nodes))
        self.offset = np.zeros(len(sizes) + 1, np.int64)
        np.cumsum(sizes, out=self.offset[1:])
        self.n_row_chains = int(self.offset[nr]) - nr
        self.n_col_chains = int(self.offset[-1] - self.offset[nr]) - ts.n_cols
        q = 1 + max((max(ns) for ns in ts.nodes if ns), default=0)
        self.q = q
        owner = np.repeat(np.arange(len(sizes), dtype=np.int64), sizes)
        flat = np.fromiter(chain.from_iterable(ts.nodes), np.int64, int(self.offset[-1]))
        keys = owner * q + flat
        self.by_key = np.argsort(keys, kind="stable")
        self.sorted_keys = keys[self.by_key]

    def slots(self, vs: np.ndarray, ts_: np.ndarray) -> np.ndarray:
        """Positions of nodes ``ts_`` in the lists of vertices ``vs``."""
        keys = vs * self.q + ts_
        at = np.searchsorted(self.sorted_keys, keys)
        at = np.minimum(at, len(self.sorted_keys) - 1)
        if len(keys) and not np.array_equal(self.sorted_keys[at], keys):
            raise ValueError("tree-split attaches a nonzero to a node outside its vertex tree")
        return self.by_key[at] - self.offset[vs]

    def copy_row(self, v: int, i: int) -> int:
        nr = self.ts.n_rows
        return v if i == 0 else nr + int(self.offset[v]) - v - 1 + i

    def copy_col(self, v: int, i: int) -> int:
        nr, nc = self.ts.n_rows, self.ts.n_cols
        k = v - nr
        return k if i == 0 else nc + int(self.offset[v] - self.offset[nr]) - k - 1 + i

    def chain_row(self, v: int, i: int) -> int:
        """Chain row of column vertex v joining its i-th copy to that copy's parent."""
        nr = self.ts.n_rows
        k = v - nr
        return nr + self.n_row_chains + int(self.offset[v] - self.offset[nr]) - k - 1 + i

    def chain_col(self, v: int, i: int) -> int:
        """Chain column of row vertex v joining its i-th copy to that copy's parent."""
        nc = self.ts.n_cols
        return nc + self.n_col_chains + int(self.offset[v]) - v - 1 + i


@dataclass(frozen=True)
class SplitMatrix:
    """The split matrix with back-maps to the original rows and columns.

    Row labels are ("copy", v, t) for a copy of bipartite vertex v at node t, or
    ("chain", v, (t, t')) for a chain row of a column vertex v; column labels
    likewise. The first ``n_rows`` rows are the root copies of the original rows
    and the first ``n_cols`` columns the root copies of the original columns.
    """

    matrix: SparseMatrix
    split: TreeSplit
    n_rows: int
    n_cols: int
    norm: int
    tpd: TreePartitionDecomposition | None
    tpd_root: int

    @cached_property
    def row_labels(self) -> tuple[tuple, ...]:
        ts = self.split
        rows_v = range(ts.n_rows)
        cols_v = range(ts.n_rows, ts.n_rows + ts.n_cols)
        out: list[tuple] = [("copy", v, ts.nodes[v][0]) for v in rows_v]
        out += [("copy", v, t) for v in rows_v for t in ts.nodes[v][1:]]
        out += [("chain", v, (ts.parent(v, i), ts.nodes[v][i])) for v in cols_v for i in range(1, len(ts.nodes[v]))]
        return tuple(out)

    @cached_property
    def col_labels(self) -> tuple[tuple, ...]:
        ts = self.split
        rows_v = range(ts.n_rows)
        cols_v = range(ts.n_rows, ts.n_rows + ts.n_cols)
        out: list[tuple] = [("copy", v, ts.nodes[v][0]) for v in cols_v]
        out += [("copy", v, t) for v in cols_v for t in ts.nodes[v][1:]]
        out += [("chain", v, (ts.parent(v, i), ts.nodes[v][i])) for v in rows_v for i in range(1, len(ts.nodes[v]))]
        return tuple(out)

    @property
    def row_owner(self) -> list[int]:
        """Original row of each split row that is a copy, -1 for chain rows."""
        ts = self.split
        out = list(range(ts.n_rows))
        for v in range(ts.n_rows):
            out += [v] * (len(ts.nodes[v]) - 1)
        return out + [-1] * (self.matrix.n_rows - len(out))

    @property
    def col_owner(self) -> list[int]:
        """Original column of each split column that is a copy, -1 for chain columns."""
        ts = self.split
        out = list(range(ts.n_cols))
        for k in range(ts.n_cols):
            out += [k] * (len(ts.nodes[ts.n_rows + k]) - 1)
        return out + [-1] * (self.matrix.n_cols - len(out))

    def row_index(self) -> dict[tuple, int]:
        return {lab: i for i, lab in enumerate(self.row_labels)}

    def col_index(self) -> dict[tuple, int]:
        return {lab: i for i, lab in enumerate(self.col_labels)}


def split_matrix(m: SparseMatrix, ts: TreeSplit) -> SplitMatrix:
    F = m.field
    nr, nc = m.n_rows, m.n_cols
    if len(ts.nodes) != nr + nc or (ts.n_rows, ts.n_cols) != (nr, nc):
        raise ValueError("tree-split does not match the matrix shape")
    ix = _CopyIndex(ts)
    N = ts.norm
    n_split_rows, n_split_cols = nr + N, nc + N
    # Chain entries are σ at the lower copy and -σ at its parent. σ is constant per
    # kind: expanding along the chains from last to first then contributes no sign,
    # which gives det[M]_{I,J} = (-1)^{N(n+m)} det[M_E]_{I_E,J_E}.
    sigma_row = F(1) if (nr + nc + ix.n_col_chains) % 2 == 0 else F(-1)
    sigma_col = F(1) if (nr + nc) % 2 == 0 else F(-1)
    out: list[dict] = [dict() for _ in range(n_split_rows)]
    pairs = list(ts.edge_nodes.items())
    if len(pairs) != m.nnz or any(c not in m.rows[r] for (r, c), _ in pairs):
        raise ValueError("tree-split must attach exactly the nonzeros of the matrix")
    er = np.fromiter((r for (r, _), _ in pairs), np.int64, len(pairs))
    ec = np.fromiter((nr + c for (_, c), _ in pairs), np.int64, len(pairs))
    et = np.fromiter((t for _, (t, _) in pairs), np.int64, len(pairs))
    et2 = np.fromiter((t2 for _, (_, t2) in pairs), np.int64, len(pairs))
    rslot = ix.slots(er, et).tolist()
    cslot = ix.slots(ec, et2).tolist()
    for ((r, c), _), i, j in zip(pairs, rslot, cslot):
        out[ix.copy_row(r, i)][ix.copy_col(nr + c, j)] = m.rows[r][c]
    neg_row, neg_col = F.neg(sigma_row), F.neg(sigma_col)
    for v in range(nr, nr + nc):
        ps = ts.parent_slot[v]
        for i in range(1, len(ps)):
            row = out[ix.chain_row(v, i)]
            row[ix.copy_col(v, i)] = sigma_col
            row[ix.copy_col(v, ps[i])] = neg_col
    for v in range(nr):
        ps = ts.parent_slot[v]
        for i in range(1, len(ps)):
            j = ix.chain_col(v, i)
            out[ix.copy_row(v, i)][j] = sigma_row
            out[ix.copy_row(v, ps[i])][j] = neg_row
    mat = SparseMatrix.from_rows(n_split_rows, n_split_cols, F, out)
    tpd, root = (None, 0)
    if ts.td is not None:
        tpd, root = _split_tpd(ts, ix, n_split_rows)
    return SplitMatrix(mat, ts, nr, nc, N, tpd, root)


def _split_tpd(ts: TreeSplit, ix: _CopyIndex, n_split_rows: int
               ) -> tuple[TreePartitionDecomposition, int]:
    """Tree-partition decomposition of the split matrix over the 1-subdivision of the tree."""
    td = ts.td
    q = td.num_nodes
    parent = td.rooting.parent
    bags: list[list[int]] = [[] for _ in range(q)]
    edges = []
    above: dict[int, int] = {}  # child node -> subdivision node of its parent edge
    for a, b in td.tree.edges():
        w = len(bags)
        above[b if parent[b] == a else a] = w
        edges += [(a, w), (w, b)]
        bags.append([])
    nr = ts.n_rows
    for v, ns in enumerate(ts.nodes):
        is_row = v < nr
        for i, t in enumerate(ns):
            bags[t].append(ix.copy_row(v, i) if is_row else n_split_rows + ix.copy_col(v, i))
            if i:
                chain_v = n_split_rows + ix.chain_col(v, i) if is_row else ix.chain_row(v, i)
                bags[above[t]].append(chain_v)
    tree = Graph.from_edges(len(bags), edges)
    root = td.root or 0
    return TreePartitionDecomposition(tree, tuple(frozenset(b) for b in bags)), root


def lift_index_sets(I, J, ts: TreeSplit) -> tuple[list[int], list[int]]:
    """Row/column sets of the split matrix whose minor matches the minor (I, J) of M."""
    for i in I:
        if not 0 <= i < ts.n_rows:
            raise ValueError(f"row {i} out of range")
    for j in J:
        if not 0 <= j < ts.n_cols:
            raise ValueError(f"column {j} out of range")
    N = ts.norm
    return (sorted(I) + list(range(ts.n_rows, ts.n_rows + N)),
            sorted(J) + list(range(ts.n_cols, ts.n_cols + N)))


@dataclass
class GeneralizedLU:
    """M = P'⁻¹ · U'' · L' · U' · L'' · Q'⁻¹.

    The middle pair is the PLUQ factorization of the split matrix with its
    permutations folded into the outer echelon factors U'' (row-echelon 0/1
    matrix summing the copies of each row) and L'' (column-echelon 0/1 matrix
    spreading each column to its copies).
    """

    split: SplitMatrix
    inner: PluqFactorization
    row_perm: list[int]
    col_perm: list[int]
    U_outer: SparseMatrix
    L_outer: SparseMatrix

    @property
    def factors(self) -> list[tuple[str, SparseMatrix]]:
        F = self.inner.field
        n = len(self.row_perm)
        m = len(self.col_perm)
        Pinv = SparseMatrix(n, n, F, [dict() for _ in range(n)])
        for q, i in enumerate(self.row_perm):
            Pinv.rows[i][q] = F.one
        Qinv = SparseMatrix(m, m, F, [dict() for _ in range(m)])
        for q, j in enumerate(self.col_perm):
            Qinv.rows[q][j] = F.one
        return [("permutation", Pinv), ("row-echelon", self.U_outer),
                ("column-echelon", self.inner.L_prime), ("row-echelon", self.inner.U_prime),
                ("column-echelon", self.L_outer), ("permutation", Qinv)]

    def product(self) -> SparseMatrix:
        out = None
        for _, f in self.factors:
            out = f if out is None else out.matmul(f)
        return out

    def solve(self, r) -> list | None:
        F = self.inner.field
        n = len(self.row_perm)
        if len(r) != n:
            raise ValueError("right-hand side has the wrong length")
        y1 = [F(r[i]) for i in self.row_perm]
        # row-echelon back-substitution with free variables at zero
        y2 = [F.zero] * self.U_outer.n_cols
        for q in range(n - 1, -1, -1):
            row = self.U_outer.rows[q]
            lead = min(row)
            acc = y1[q]
            for c, v in row.items():
                if c != lead:
                    acc = F.submul(acc, v, y2[c])
            y2[lead] = F.div(acc, row[lead])
        rhs = [F.zero] * len(y2)
        for a, orig in enumerate(self.inner.row_order):
            rhs[orig] = y2[a]
        x_split = pluq_solve(self.inner, rhs)
        if x_split is None:
            return None
        y4 = [x_split[c] for c in self.inner.col_order]
        lcols = self.L_outer.cols
        x = [F.zero] * len(self.col_perm)
        for q, j in enumerate(self.col_perm):
            col = lcols[q]
            lead = min(col)
            x[j] = F.div(y4[lead], col[lead])
        return x


@dataclass
class TwResult:
    rank: int
    det: object | None
    factorization: GeneralizedLU
    solution: list | None
    consistent: bool | None
    norm: int
    elimination_stats: dict


def tw_rank_det_solve(m: SparseMatrix, td: TreeDecomposition, r=None, *,
                      backend: str = "parray") -> TwResult:
    """Rank, determinant, generalized LU factorization and optionally a solution of M·x = r.

    ``td`` decomposes the bipartite graph of M (row i is vertex i, column j is
    vertex n_rows + j).
    """
    bs = bipartite_graph(m)
    nice = nice_form(td, bs.graph)
    ts = tree_split_from_td(m, nice)
    sm = split_matrix(m, ts)
    so = ordering_from_tpd(sm.matrix, sm.tpd, root=sm.tpd_root)
    res = guided_elimination(sm.matrix, so, backend=backend)
    f = pluq(res)
    info = rank_det_maxsubmatrix(f)
    N = sm.norm
    det = None
    if m.n_rows == m.n_cols:
        det = info.det
        if (N * (m.n_rows + m.n_cols)) % 2:
            det = m.field.neg(det)
    glu = _generalized_lu(sm, f)
    solution = consistent = None
    if r is not None:
        solution = glu.solve(r)
        consistent = solution is not None
    stats = dict(res.stats, h_edges=res.h_edges, h_vertices=res.h_vertices, width=res.width,
                 split_shape=sm.matrix.shape)
    return TwResult(info.rank - N, det, glu, solution, consistent, N, stats)


def _generalized_lu(sm: SplitMatrix, f: PluqFactorization) -> GeneralizedLU:
    F = f.field
    n, m = sm.n_rows, sm.n_cols
    nE, mE = sm.matrix.shape
    # U_E sums the copies of each original row; L_E spreads each column to its copies
    row_owner = sm.row_owner
    col_owner = sm.col_owner
    UP: list[dict] = [dict() for _ in range(n)]
    for a, orig in enumerate(f.row_order):
        if row_owner[orig] >= 0:
            UP[row_owner[orig]][a] = F.one
    QL: list[dict] = [dict() for _ in range(mE)]
    for b, orig in enumerate(f.col_order):
        if col_owner[orig] >= 0:
            QL[b][col_owner[orig]] = F.one
    row_perm = sorted(range(n), key=lambda i: min(UP[i]))
    col_lead = [mE] * m
    for b, row in enumerate(QL):
        for j in row:
            col_lead[j] = min(col_lead[j], b)
    col_perm = sorted(range(m), key=col_lead.__getitem__)
    U_outer = SparseMatrix(n, nE, F, [UP[i] for i in row_perm])
    cpos = {j: q for q, j in enumerate(col_perm)}
    L_outer = SparseMatrix(mE, m, F, [{cpos[j]: v for j, v in row.items()} for row in QL])
    return GeneralizedLU(sm, f, row_perm, col_perm, U_outer, L_outer)
