"""Tree decompositions of width O(k²), or a certificate-free verdict tw(G) ≥ k."""

from __future__ import annotations

from typing import Iterable

from .decomp import TreeDecomposition
from .graph import Graph, components_avoiding, induced_subgraph
from .separators import (LargeSeparator, SmallSeparator, TreewidthAtLeast,
                         find_balanced_separator)


def approximate_treewidth(g: Graph, k: int, *, stats: dict | None = None
                          ) -> TreeDecomposition | TreewidthAtLeast:
    """Decomposition with bags of at most 1800k² vertices, or ``TreewidthAtLeast(k)``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if g.num_edges > k * g.n:
        return TreewidthAtLeast(k)
    return decompose_rec(g, (), k, stats=stats)


def decompose_rec(h: Graph, s: Iterable[int], k: int, *, stats: dict | None = None
                  ) -> TreeDecomposition | TreewidthAtLeast:
    """Rooted decomposition of h whose root bag contains s (|s| ≤ 17η, s ≠ V(h)).

    Each work item is a vertex set of h together with its boundary; the item
    becomes one node whose bag is the boundary plus a separator, and the
    components left after removing that bag become the children.
    """
    eta = 100 * k * k
    s = frozenset(s)
    if len(s) > 17 * eta or (h.n > 0 and len(s) == h.n):
        raise ValueError("boundary precondition violated")
    if stats is not None:
        stats.update(cases={"i": 0, "ii": 0, "iii": 0}, max_depth=0, nodes=0)
    bags: list[frozenset[int]] = []
    edges: list[tuple[int, int]] = []
    # (vertices, boundary, parent node, depth)
    work = [(frozenset(range(h.n)), s, -1, 0)]
    while work:
        verts, bound, parent, depth = work.pop()
        node = len(bags)
        if parent >= 0:
            edges.append((parent, node))
        if stats is not None:
            stats["max_depth"] = max(stats["max_depth"], depth)
            stats["nodes"] += 1
        if len(verts) - len(bound) <= eta:
            bags.append(verts)
            if stats is not None:
                stats["cases"]["i"] += 1
            continue
        sub, index_map = induced_subgraph(h, verts)
        if sub.num_edges > k * sub.n:
            return TreewidthAtLeast(k)
        local_bound = {i for i, v in enumerate(index_map) if v in bound}
        if len(bound) <= 16 * eta:
            case = "ii"
            mu = [0 if i in local_bound else 1 for i in range(sub.n)]
        else:
            case = "iii"
            mu = [1 if i in local_bound else 0 for i in range(sub.n)]
        out = find_balanced_separator(sub, mu, k)
        if isinstance(out, TreewidthAtLeast):
            return out
        assert isinstance(out, (LargeSeparator, SmallSeparator))
        bag_local = local_bound | out.vertices
        bag = frozenset(index_map[i] for i in bag_local)
        assert len(bag) <= 18 * eta
        bags.append(bag)
        if stats is not None:
            stats["cases"][case] += 1
        children = []
        for comp in components_avoiding(sub, bag_local):
            closed = set(comp)
            for v in comp:
                closed.update(sub.adj[v])
            nbhd = closed.difference(comp)
            child_verts = frozenset(index_map[i] for i in closed)
            child_bound = frozenset(index_map[i] for i in nbhd)
            if case == "ii":
                h_x, h_y = len(verts) - len(bound), len(child_verts) - len(child_bound)
                if 100 * k * h_y > (100 * k - 1) * h_x:
                    raise AssertionError("case (ii) child did not shrink enough")
            elif len(child_bound) > len(bound) - k:
                raise AssertionError("case (iii) child boundary did not shrink by k")
            children.append((child_verts, child_bound, node, depth + 1))
        work.extend(reversed(children))
    return TreeDecomposition(Graph.from_edges(len(bags), edges), tuple(bags), 0)
