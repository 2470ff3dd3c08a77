"""Simple undirected and directed graphs with dense 0-based vertex labels."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph. ``adj[v]`` is the sorted tuple of neighbours of v."""

    n: int
    adj: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> Graph:
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    @classmethod
    def empty(cls, n: int) -> Graph:
        return cls(n, tuple(() for _ in range(n)))

    @cached_property
    def adj_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adj)

    @cached_property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as pairs (u, v) with u < v, in lexicographic order."""
        for u, a in enumerate(self.adj):
            for v in a:
                if u < v:
                    yield (u, v)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj_sets[u]

    def degree(self, v: int) -> int:
        return len(self.adj[v])


@dataclass(frozen=True)
class DiGraph:
    """Directed simple graph with both out- and in-adjacency (sorted)."""

    n: int
    out_adj: tuple[tuple[int, ...], ...]
    in_adj: tuple[tuple[int, ...], ...]

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int]]) -> DiGraph:
        out: list[set[int]] = [set() for _ in range(n)]
        for u, v in arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"arc ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            out[u].add(v)
        inn: list[list[int]] = [[] for _ in range(n)]
        for u in range(n):
            for v in out[u]:
                inn[v].append(u)
        return cls(n, tuple(tuple(sorted(s)) for s in out), tuple(tuple(sorted(s)) for s in inn))

    @classmethod
    def from_undirected(cls, g: Graph) -> DiGraph:
        """Replace every edge uv by the arcs (u, v) and (v, u)."""
        return cls(g.n, g.adj, g.adj)

    @cached_property
    def num_arcs(self) -> int:
        return sum(len(a) for a in self.out_adj)

    @cached_property
    def out_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.out_adj)

    def arcs(self) -> Iterator[tuple[int, int]]:
        for u, a in enumerate(self.out_adj):
            for v in a:
                yield (u, v)

    def has_arc(self, u: int, v: int) -> bool:
        return v in self.out_sets[u]

    def underlying(self) -> Graph:
        return Graph.from_edges(self.n, self.arcs())


def total_measure(mu: Sequence[int], vertices: Iterable[int] | None = None) -> int:
    if vertices is None:
        return sum(mu)
    return sum(mu[v] for v in vertices)


def components_avoiding(g: Graph, removed: Iterable[int] = ()) -> list[list[int]]:
    """Connected components of g minus ``removed``, each sorted, ordered by smallest vertex."""
    seen = bytearray(g.n)
    for v in removed:
        seen[v] = 1
    comps = []
    adj = g.adj
    for start in range(g.n):
        if seen[start]:
            continue
        seen[start] = 1
        comp = [start]
        stack = [start]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = 1
                    comp.append(w)
                    stack.append(w)
        comp.sort()
        comps.append(comp)
    return comps


def connected_components(g: Graph) -> list[list[int]]:
    return components_avoiding(g)


def induced_subgraph(g: Graph, vs: Iterable[int]) -> tuple[Graph, list[int]]:
    """Return ``(g[vs], index_map)`` where new vertex i is original vertex ``index_map[i]``."""
    index_map = sorted(set(vs))
    if index_map and (index_map[0] < 0 or index_map[-1] >= g.n):
        raise ValueError("vertex out of range")
    local = {v: i for i, v in enumerate(index_map)}
    adj = []
    for v in index_map:
        adj.append(tuple(local[w] for w in g.adj[v] if w in local))
    return Graph(len(index_map), tuple(adj)), index_map


def is_tree(g: Graph) -> bool:
    if g.n == 0:
        return False
    return g.num_edges == g.n - 1 and len(connected_components(g)) == 1


def one_subdivision(tree: Graph) -> tuple[Graph, dict[tuple[int, int], int]]:
    """Subdivide every edge once. Edge (u, v), u < v, becomes vertex ``n + index``."""
    if not is_tree(tree):
        raise ValueError("input is not a tree")
    edge_vertex: dict[tuple[int, int], int] = {}
    new_edges = []
    for u, v in tree.edges():
        w = tree.n + len(edge_vertex)
        edge_vertex[(u, v)] = w
        new_edges.append((u, w))
        new_edges.append((w, v))
    return Graph.from_edges(tree.n + len(edge_vertex), new_edges), edge_vertex


def spanning_tree(g: Graph, component: Iterable[int]) -> Graph:
    """BFS spanning tree of ``component`` from its smallest vertex.

    The result keeps the labels of g; vertices outside the component are isolated.
    """
    comp = set(component)
    if not comp:
        raise ValueError("empty component")
    root = min(comp)
    parent = {root: -1}
    queue = deque([root])
    edges = []
    while queue:
        u = queue.popleft()
        for w in g.adj[u]:
            if w in comp and w not in parent:
                parent[w] = u
                edges.append((u, w))
                queue.append(w)
    if len(parent) != len(comp):
        raise ValueError("component is not connected")
    return Graph.from_edges(g.n, edges)


def rooted_tree(tree: Graph, root: int = 0) -> tuple[list[int], list[int]]:
    """BFS from ``root``: returns (parent array with -1 at root, BFS order)."""
    parent = [-1] * tree.n
    seen = bytearray(tree.n)
    seen[root] = 1
    order = [root]
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for w in tree.adj[u]:
            if not seen[w]:
                seen[w] = 1
                parent[w] = u
                order.append(w)
    return parent, order


def reachable(g: DiGraph, sources: Iterable[int], blocked: Iterable[int] = ()) -> set[int]:
    """Vertices reachable from ``sources`` along arcs, never entering ``blocked``."""
    block = set(blocked)
    seen = {s for s in sources if s not in block}
    stack = list(seen)
    while stack:
        u = stack.pop()
        for w in g.out_adj[u]:
            if w not in seen and w not in block:
                seen.add(w)
                stack.append(w)
    return seen
