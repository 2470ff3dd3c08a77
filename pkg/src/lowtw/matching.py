"""Randomized maximum matching through the Tutte matrix.

The size is half the rank of a random evaluation of the Tutte matrix. A
maximum matching is built by splitting the graph into one with a tree-partition
decomposition, restricting to a maximal nonsingular principal block, and then
finding a perfect matching by ousting the vertices of a balanced bag and
recursing on the remaining pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algebra import DEFAULT_PRIME, PrimeField, SparseMatrix, is_prime
from .decomp import (TreeDecomposition, TreePartitionDecomposition, balanced_tree_node,
                     bipartite_decomp_from_symmetric, clean, is_clean, require_valid)
from .elimination import (PluqFactorization, guided_elimination, ordering_from_tpd,
                          pluq, rank_det_maxsubmatrix, solve)
from .graph import Graph, components_avoiding, induced_subgraph, one_subdivision
from .splitting import tw_rank_det_solve

MAX_RESAMPLES = 3
# small graphs still get a prime large enough that a wrong answer is rare
PRIME_FLOOR = 2**30

# random streams are keyed by (seed, path); these prefixes keep the uses apart
_BASE_PATH = (0,)
_PERFECT_PATH = (1,)
_PRIME_PATH = (2,)


class MatchingFailure(RuntimeError):
    """A random evaluation stayed singular after every allowed resample."""


@dataclass(frozen=True)
class Matching:
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, edges: Iterable[tuple[int, int]]) -> Matching:
        return cls(tuple(sorted((min(u, v), max(u, v)) for u, v in edges)))

    @property
    def size(self) -> int:
        return len(self.edges)


def matching_violation(g: Graph, m: Matching) -> str | None:
    """Reason why ``m`` is not a matching of g, or None."""
    seen = set()
    for u, v in m.edges:
        if not g.has_edge(u, v):
            return f"({u}, {v}) is not an edge"
        if u in seen or v in seen:
            return f"vertex of ({u}, {v}) matched twice"
        seen.update((u, v))
    return None


def _rng(seed: int, path: Sequence[int]) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))


def choose_prime(n: int, c: int, seed: int = 0) -> int:
    """A prime in [lo, 2·lo) for lo = max(n^(c+5), 2^30), or the fixed 62-bit prime if that does not fit."""
    lo = max(max(n, 2) ** (c + 5), PRIME_FLOOR)
    if 2 * lo > 2**62:
        return DEFAULT_PRIME
    rng = _rng(seed, _PRIME_PATH)
    for _ in range(10_000):
        x = int(rng.integers(lo, 2 * lo))
        if is_prime(x):
            return x
    return next(x for x in range(lo, 2 * lo) if is_prime(x))


@dataclass(frozen=True)
class TutteSample:
    """Skew-symmetric evaluation of the Tutte matrix: a[i][j] = x_ij = -a[j][i] for edges i < j."""

    a: SparseMatrix
    values: dict[tuple[int, int], int]
    seed: int
    path: tuple[int, ...]


def tutte_sample(g: Graph, p: int, seed: int, path: Sequence[int] = ()) -> TutteSample:
    F = PrimeField(p)
    edges = list(g.edges())
    xs = _rng(seed, path).integers(0, p, size=len(edges), dtype=np.int64).tolist() if edges else []
    rows: list[dict] = [dict() for _ in range(g.n)]
    values = {}
    for (u, v), x in zip(edges, xs):
        values[(u, v)] = x
        if x:
            rows[u][v] = x
            rows[v][u] = F.neg(x)
    return TutteSample(SparseMatrix(g.n, g.n, F, rows), values, seed, tuple(path))


def tutte_rank(g: Graph, td: TreeDecomposition, c: int = 1, seed: int = 0) -> int:
    """Rank of a random evaluation of the Tutte matrix; always even, at most twice the matching number."""
    require_valid(td, g)
    if g.n == 0:
        return 0
    p = choose_prime(g.n, c, seed)
    sample = tutte_sample(g, p, seed, _BASE_PATH)
    return tw_rank_det_solve(sample.a, bipartite_decomp_from_symmetric(td, g.n)).rank


def matching_size(g: Graph, td: TreeDecomposition, c: int = 1, seed: int = 0) -> int:
    """Half the rank of a random Tutte evaluation; never more than the true maximum."""
    return tutte_rank(g, td, c, seed) // 2


def _doubled_tpd(tpd: TreePartitionDecomposition, n: int) -> TreePartitionDecomposition:
    """Bag-wise row and column copies, for the bipartite graph of an n×n matrix."""
    return TreePartitionDecomposition(tpd.tree, tuple(b | frozenset(n + v for v in b) for b in tpd.bags))


def eliminate_tutte(sample: TutteSample, tpd: TreePartitionDecomposition,
                    root: int = 0) -> PluqFactorization:
    so = ordering_from_tpd(sample.a, _doubled_tpd(tpd, sample.a.n_rows), root=root)
    return pluq(guided_elimination(sample.a, so))


def find_allowed_edge(g: Graph, fact: PluqFactorization, u: int) -> tuple[int, int]:
    """An edge at u lying in some perfect matching, read off column u of the inverse."""
    n = g.n
    if fact.rank < n:
        raise MatchingFailure("Tutte sample is singular")
    F = fact.field
    e = [F.zero] * n
    e[u] = F.one
    col = solve(fact, e)
    for j in sorted(g.adj[u]):
        if col[j] != F.zero:
            return (min(u, j), max(u, j))
    raise MatchingFailure(f"no allowed edge found at vertex {u}")


def perfect_matching_tpd(g: Graph, tpd: TreePartitionDecomposition, c: int = 1, seed: int = 0,
                         *, prime: int | None = None, stats: dict | None = None) -> Matching:
    """Perfect matching of a graph that has one, guided by a tree-partition decomposition."""
    require_valid(tpd, g)
    if g.n % 2:
        raise MatchingFailure("odd number of vertices")
    p = prime or choose_prime(g.n, c, seed)
    alive = bytearray([1]) * g.n
    matched: list[tuple[int, int]] = []
    if stats is not None:
        stats.update(eliminations=0, resamples=0, max_depth=0, subproblems=0)
    nonempty = [t for t in range(len(tpd.bags)) if tpd.bags[t]]
    # (tree nodes, rng path, depth)
    work = [(nodes, _PERFECT_PATH + (i,), 0) for i, nodes in enumerate(_node_components(tpd, nonempty))]
    work.reverse()
    while work:
        nodes, path, depth = work.pop()
        if stats is not None:
            stats["subproblems"] += 1
            stats["max_depth"] = max(stats["max_depth"], depth)
        node_index = {t: i for i, t in enumerate(nodes)}
        local_tree = Graph.from_edges(len(nodes), [(node_index[a], node_index[b])
                                                   for a in nodes for b in tpd.tree.adj[a]
                                                   if b in node_index and a < b])
        x = nodes[balanced_tree_node(local_tree, [1] * len(nodes))]
        for step, u in enumerate(sorted(tpd.bags[x])):
            if not alive[u]:
                continue
            verts = sorted(v for t in nodes for v in tpd.bags[t] if alive[v])
            sub, index_map = induced_subgraph(g, verts)
            local = {v: i for i, v in enumerate(index_map)}
            sub_tpd = TreePartitionDecomposition(
                local_tree, tuple(frozenset(local[v] for v in tpd.bags[t] if alive[v]) for t in nodes))
            for attempt in range(MAX_RESAMPLES + 1):
                sample = tutte_sample(sub, p, seed, path + (0, step, attempt))
                fact = eliminate_tutte(sample, sub_tpd, root=node_index[x])
                if stats is not None:
                    stats["eliminations"] += 1
                if fact.rank == sub.n:
                    break
                if stats is not None:
                    stats["resamples"] += 1
            else:
                raise MatchingFailure(f"singular Tutte sample after {MAX_RESAMPLES} resamples")
            a, b = find_allowed_edge(sub, fact, local[u])
            a, b = index_map[a], index_map[b]
            matched.append((a, b))
            alive[a] = alive[b] = 0
        rest = [t for t in nodes if t != x and any(alive[v] for v in tpd.bags[t])]
        kids = _node_components(tpd, rest, alive)
        for i in range(len(kids) - 1, -1, -1):
            work.append((kids[i], path + (1, i), depth + 1))
    return Matching.of(matched)


def _node_components(tpd: TreePartitionDecomposition, nodes: Iterable[int],
                     alive: bytearray | None = None) -> list[list[int]]:
    """Connected pieces of the tree induced on ``nodes`` with nonempty (alive) bags."""
    if alive is not None:
        nodes = [t for t in nodes if any(alive[v] for v in tpd.bags[t])]
    keep = set(nodes)
    removed = [t for t in range(len(tpd.bags)) if t not in keep]
    return components_avoiding(tpd.tree, removed)


@dataclass(frozen=True)
class GraphSplit:
    """Graph G' whose vertices are copies (u, t) per bag and (u, (a, b)) per tree edge."""

    graph: Graph
    tpd: TreePartitionDecomposition
    labels: tuple[tuple, ...]
    owner: tuple[int, ...]
    index: dict[tuple, int]
    trees: tuple[tuple[int, ...], ...]
    base_n: int

    @property
    def lam(self) -> int:
        return self.graph.n - self.base_n


def split_graph(g: Graph, td: TreeDecomposition) -> GraphSplit:
    """Per vertex u a tree of copies T_u; edges of g are copied into every bag holding both ends."""
    require_valid(td, g)
    if not is_clean(td):
        raise ValueError("decomposition is not clean")
    labels: list[tuple] = []
    for t, bag in enumerate(td.bags):
        labels += [(u, t) for u in sorted(bag)]
    tree_edges = list(td.tree.edges())
    for a, b in tree_edges:
        labels += [(u, (a, b)) for u in sorted(td.bags[a] & td.bags[b])]
    index = {lab: i for i, lab in enumerate(labels)}
    edges = []
    for u, where in labels:
        if isinstance(where, tuple):
            i = index[(u, where)]
            edges += [(i, index[(u, where[0])]), (i, index[(u, where[1])])]
    for t, bag in enumerate(td.bags):
        for u in bag:
            for v in g.adj[u]:
                if u < v and v in bag:
                    edges.append((index[(u, t)], index[(v, t)]))
    graph = Graph.from_edges(len(labels), edges)
    sub_tree, edge_node = one_subdivision(td.tree)
    bags: list[set[int]] = [set() for _ in range(sub_tree.n)]
    for i, (u, where) in enumerate(labels):
        bags[edge_node[where] if isinstance(where, tuple) else where].add(i)
    owner = tuple(u for u, _ in labels)
    trees: list[list[int]] = [[] for _ in range(g.n)]
    for i, u in enumerate(owner):
        trees[u].append(i)
    tpd = TreePartitionDecomposition(sub_tree, tuple(frozenset(b) for b in bags))
    return GraphSplit(graph, tpd, tuple(labels), owner, index,
                      tuple(tuple(t) for t in trees), g.n)


def _tree_matching(split: GraphSplit, u: int, w: int) -> list[tuple[int, int]]:
    """Matching of T_u covering everything except the copy w: each edge copy takes its child."""
    owner = split.owner
    adj = split.graph.adj
    parent = {w: -1}
    order = [w]
    for x in order:
        for y in adj[x]:
            if owner[y] == u and y not in parent:
                parent[y] = x
                order.append(y)
    out = []
    for x in order:
        if isinstance(split.labels[x][1], tuple):
            child = next(y for y in adj[x] if owner[y] == u and y != parent[x])
            out.append((x, child))
    return out


def lift_matching(split: GraphSplit, g: Graph, m: Matching) -> Matching:
    """Matching of G' of size |m| + Λ/2."""
    if (err := matching_violation(g, m)) is not None:
        raise ValueError(err)
    out = []
    anchor: dict[int, int] = {}
    for u, v in m.edges:
        t = min(t for t in range(len(split.tpd.bags))
                if (u, t) in split.index and (v, t) in split.index)
        a, b = split.index[(u, t)], split.index[(v, t)]
        out.append((a, b))
        anchor[u], anchor[v] = a, b
    for u, tree in enumerate(split.trees):
        out += _tree_matching(split, u, anchor.get(u, tree[0]))
    return Matching.of(out)


def project_matching(split: GraphSplit, m_prime: Matching) -> Matching:
    """Matching of G of size at least |m'| - Λ/2.

    A tree T_u with several externally matched copies keeps only the
    lexicographically smallest external edge and is re-matched internally.
    """
    if (err := matching_violation(split.graph, m_prime)) is not None:
        raise ValueError(err)
    owner = split.owner
    mate: dict[int, int] = {}
    for a, b in m_prime.edges:
        mate[a], mate[b] = b, a
    for u, tree in enumerate(split.trees):
        external = sorted((min(x, mate[x]), max(x, mate[x]))
                          for x in tree if x in mate and owner[mate[x]] != u)
        if len(external) <= 1:
            continue
        keep = external[0]
        w = keep[0] if owner[keep[0]] == u else keep[1]
        for x in tree:
            if x in mate and x != w:
                y = mate.pop(x)
                mate.pop(y, None)
        for a, b in _tree_matching(split, u, w):
            mate[a], mate[b] = b, a
    pairs = {(min(owner[a], owner[b]), max(owner[a], owner[b]))
             for a, b in mate.items() if a < b and owner[a] != owner[b]}
    return Matching.of(pairs)


@dataclass
class MatchingResult:
    matching: Matching
    split_vertices: int
    lam: int
    base_rank: int
    stats: dict = field(default_factory=dict)


def max_matching(g: Graph, td: TreeDecomposition, c: int = 1, seed: int = 0,
                 *, stats: dict | None = None) -> Matching:
    """Maximum matching with one-sided error: a failure or a smaller matching, never an invalid one."""
    return max_matching_detailed(g, td, c, seed, stats=stats).matching


def max_matching_detailed(g: Graph, td: TreeDecomposition, c: int = 1, seed: int = 0,
                          *, stats: dict | None = None) -> MatchingResult:
    require_valid(td, g)
    stats = {} if stats is None else stats
    if g.n == 0:
        return MatchingResult(Matching(()), 0, 0, 0, stats)
    split = split_graph(g, clean(td))
    gp = split.graph
    p = choose_prime(gp.n, c, seed)
    sample = tutte_sample(gp, p, seed, _BASE_PATH)
    info = rank_det_maxsubmatrix(eliminate_tutte(sample, split.tpd))
    X = info.rows
    sub, index_map = induced_subgraph(gp, X)
    local = {v: i for i, v in enumerate(index_map)}
    sub_tpd = TreePartitionDecomposition(
        split.tpd.tree, tuple(frozenset(local[v] for v in b if v in local) for b in split.tpd.bags))
    pm = perfect_matching_tpd(sub, sub_tpd, c, seed, prime=p, stats=stats)
    m_prime = Matching.of((index_map[a], index_map[b]) for a, b in pm.edges)
    m = project_matching(split, m_prime)
    assert matching_violation(g, m) is None
    return MatchingResult(m, gp.n, split.lam, info.rank, stats)
