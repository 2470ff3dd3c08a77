"""Vertex-disjoint flows with unit vertex capacities.

A flow is a tuple of directed paths from the source set S to the sink set T
whose internal vertices avoid S ∪ T and are pairwise disjoint. Paths may share
their endpoints.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .decomp import (TreeDecomposition, balanced_tree_node, clean, relabel,
                     require_valid)
from .graph import DiGraph, Graph


@dataclass(frozen=True)
class VertexFlow:
    paths: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.paths)


@dataclass(frozen=True)
class VertexCut:
    vertices: frozenset[int]

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class MaxFlowCut:
    flow: VertexFlow
    cut: VertexCut

    @property
    def value(self) -> int:
        return len(self.flow)


EMPTY_FLOW = VertexFlow(())


def check_flow(g: DiGraph, S: Iterable[int], T: Iterable[int], flow: VertexFlow) -> str | None:
    """Return a description of the first defect of ``flow``, or None if it is valid."""
    S, T = set(S), set(T)
    used: set[int] = set()
    for path in flow.paths:
        if len(path) < 2:
            return f"path too short: {path}"
        if path[0] not in S or path[-1] not in T:
            return f"path does not run from S to T: {path}"
        for u, v in zip(path, path[1:]):
            if not g.has_arc(u, v):
                return f"missing arc ({u}, {v})"
        for v in path[1:-1]:
            if v in S or v in T:
                return f"internal vertex {v} is a terminal"
            if v in used:
                return f"vertex {v} used twice"
            used.add(v)
    return None


def cut_separates(g: DiGraph, S: Iterable[int], T: Iterable[int], cut: Iterable[int]) -> bool:
    """True if no S→T path survives the removal of ``cut``."""
    S, T, cut = set(S), set(T), set(cut)
    seen = set(S)
    stack = list(S)
    while stack:
        u = stack.pop()
        for w in g.out_adj[u]:
            if w in T:
                return False
            if w not in seen and w not in cut and w not in S:
                seen.add(w)
                stack.append(w)
    return True


def _check_terminals(g: DiGraph, S: set[int], T: set[int]) -> None:
    if S & T:
        raise ValueError("source and sink sets overlap")
    for s in S:
        for w in g.out_adj[s]:
            if w in T:
                raise ValueError(f"arc ({s}, {w}) from S to T")


def augment_once(g: DiGraph, S: Iterable[int], T: Iterable[int],
                 flow: VertexFlow, *, check: bool = True) -> VertexFlow | VertexCut:
    """Find one augmenting path or certify maximality.

    Works on the split network (v_in → v_out with capacity one for every
    non-terminal v, infinite arcs u_out → v_in) and performs a single BFS over
    its residual graph. Returns a flow with one more path, or a cut of size
    ``len(flow)``.
    """
    S, T = set(S), set(T)
    if check:
        _check_terminals(g, S, T)
        bad = check_flow(g, S, T, flow)
        if bad:
            raise ValueError(f"invalid flow: {bad}")
    n = g.n
    succ: dict[int, int] = {}
    pred: dict[int, int] = {}
    arcs: set[tuple[int, int]] = set()
    for path in flow.paths:
        for u, v in zip(path, path[1:]):
            arcs.add((u, v))
        for i in range(1, len(path) - 1):
            pred[path[i]] = path[i - 1]
            succ[path[i]] = path[i + 1]
    is_s = bytearray(n)
    is_t = bytearray(n)
    for s in S:
        is_s[s] = 1
    for t in T:
        is_t[t] = 1
    # labels: 2v = v_in, 2v+1 = v_out; back[x] = predecessor label in the BFS tree
    back = [-2] * (2 * n)
    queue = deque()
    for s in sorted(S):
        back[2 * s + 1] = -1
        queue.append(2 * s + 1)
    out_adj, in_adj = g.out_adj, g.in_adj
    hit = -1
    while queue and hit < 0:
        x = queue.popleft()
        v = x >> 1
        if x & 1:
            # v_out: forward arcs to w_in (uncapacitated, so flow arcs stay usable),
            # backward internal arc to v_in
            for w in out_adj[v]:
                if is_s[w]:
                    continue
                y = 2 * w
                if back[y] == -2:
                    back[y] = x
                    if is_t[w]:
                        hit = y
                        break
                    queue.append(y)
            if hit < 0 and v in pred and back[2 * v] == -2:
                back[2 * v] = x
                queue.append(2 * v)
        else:
            # v_in (v internal): internal arc if v is free, else cancel the flow arc into v
            if v not in pred:
                y = x + 1
                if back[y] == -2:
                    back[y] = x
                    queue.append(y)
            else:
                y = 2 * pred[v] + 1
                if back[y] == -2:
                    back[y] = x
                    queue.append(y)
    if hit < 0:
        cut = frozenset(v for v in pred if back[2 * v] != -2 and back[2 * v + 1] == -2)
        assert len(cut) == len(flow.paths)
        return VertexCut(cut)
    y = hit
    while back[y] != -1:
        x = back[y]
        u, w = x >> 1, y >> 1
        if x & 1 and not y & 1 and u != w:
            arcs.add((u, w))
        elif not x & 1 and y & 1 and u != w:
            arcs.discard((w, u))
        y = x
    nxt: dict[int, list[int]] = {}
    for u, w in arcs:
        nxt.setdefault(u, []).append(w)
    paths = []
    for s in sorted(S):
        for w in sorted(nxt.get(s, ())):
            path = [s, w]
            while not is_t[path[-1]]:
                path.append(nxt[path[-1]][0])
            paths.append(tuple(path))
    assert len(paths) == len(flow.paths) + 1
    return VertexFlow(tuple(paths))


def flow_up_to_k(g: DiGraph, S: Iterable[int], T: Iterable[int], k: int,
                 start: VertexFlow = EMPTY_FLOW) -> MaxFlowCut | None:
    """Maximum (S,T)-vertex flow and minimum cut if the flow value is at most k, else None."""
    S, T = set(S), set(T)
    _check_terminals(g, S, T)
    flow = start
    first = True
    while True:
        step = augment_once(g, S, T, flow, check=first)
        first = False
        if isinstance(step, VertexCut):
            return MaxFlowCut(flow, step)
        flow = step
        if len(flow) > k:
            return None


@dataclass(frozen=True)
class CollapsedInstance:
    """Single-terminal instance built from a set-to-set one.

    ``graph`` has the non-terminal vertices relabelled 0..r-1 followed by the
    merged source ``s = r`` and merged sink ``t = r + 1``.
    """

    graph: DiGraph
    s: int
    t: int
    original: tuple[int, ...]
    S: frozenset[int]
    T: frozenset[int]
    source_of: dict[int, int]
    sink_of: dict[int, int]

    def patch_decomposition(self, td: TreeDecomposition) -> TreeDecomposition:
        """Map a decomposition of the original graph to the collapsed one (width grows by ≤ 2)."""
        local = {v: i for i, v in enumerate(self.original)}
        extra = frozenset((self.s, self.t))
        bags = tuple(frozenset(local[v] for v in b if v in local) | extra for b in td.bags)
        return TreeDecomposition(td.tree, bags, td.root, td.child_order)

    def lift_flow(self, flow: VertexFlow) -> VertexFlow:
        paths = []
        for p in flow.paths:
            inner = [self.original[v] for v in p[1:-1]]
            first = inner[0] if inner else None
            last = inner[-1] if inner else None
            paths.append((self.source_of[first], *inner, self.sink_of[last]))
        return VertexFlow(tuple(paths))

    def lift_cut(self, cut: VertexCut) -> VertexCut:
        return VertexCut(frozenset(self.original[v] for v in cut.vertices))


def collapse_terminals(g: DiGraph, S: Iterable[int], T: Iterable[int]) -> CollapsedInstance:
    """Merge S into one source and T into one sink.

    Arcs into S and out of T are dropped since no (S,T)-path uses them.
    """
    S, T = frozenset(S), frozenset(T)
    if S & T:
        raise ValueError("source and sink sets overlap")
    _check_terminals(g, set(S), set(T))
    original = tuple(v for v in range(g.n) if v not in S and v not in T)
    local = {v: i for i, v in enumerate(original)}
    s, t = len(original), len(original) + 1
    arcs = set()
    source_of: dict[int, int] = {}
    sink_of: dict[int, int] = {}
    for u in range(g.n):
        for w in g.out_adj[u]:
            if u in T or w in S:
                continue
            a = s if u in S else local[u]
            b = t if w in T else local[w]
            arcs.add((a, b))
            if u in S and w not in T:
                source_of[w] = min(source_of.get(w, u), u)
            if w in T and u not in S:
                sink_of[u] = min(sink_of.get(u, w), w)
    return CollapsedInstance(DiGraph.from_arcs(len(original) + 2, arcs), s, t, original,
                             S, T, source_of, sink_of)


def max_vertex_flow_td(g: DiGraph, s: int, t: int, td: TreeDecomposition,
                       *, stats: dict | None = None, check: bool = True) -> MaxFlowCut:
    """Maximum (s,t)-vertex flow and minimum cut, guided by a tree decomposition.

    ``td`` decomposes the underlying undirected graph of g. The instance is cut
    at a node that halves the set L of bags holding both terminals; flows of the
    important components are merged and then topped up by augmentation.
    """
    if s == t:
        raise ValueError("source equals sink")
    if g.has_arc(s, t):
        raise ValueError(f"arc ({s}, {t}) present")
    if check:
        require_valid(td, g.underlying())
    if stats is not None:
        stats.setdefault("calls", 0)
        stats.setdefault("max_depth", 0)
        stats.setdefault("topup_augmentations", [])
    return _flow_rec(g, s, t, clean(td), stats, 0)


def _flow_rec(g: DiGraph, s: int, t: int, td: TreeDecomposition,
              stats: dict | None, depth: int) -> MaxFlowCut:
    k = td.width
    if stats is not None:
        stats["calls"] += 1
        stats["max_depth"] = max(stats["max_depth"], depth)
    L = [x for x, b in enumerate(td.bags) if s in b and t in b]
    if not L:
        res = flow_up_to_k(g, {s}, {t}, k)
        if res is None:
            raise AssertionError("flow exceeds width although no bag holds both terminals")
        return res
    mu = [0] * td.num_nodes
    for x in L:
        mu[x] = 1
    x = balanced_tree_node(td.tree, mu)
    bags = td.bags
    # component label of every node of tree - x
    comp = [-1] * td.num_nodes
    comp[x] = -2
    roots = []
    for y in td.tree.adj[x]:
        cid = len(roots)
        roots.append(y)
        comp[y] = cid
        stack = [y]
        while stack:
            a = stack.pop()
            for b in td.tree.adj[a]:
                if comp[b] == -1:
                    comp[b] = cid
                    stack.append(b)
    bx = bags[x]
    paths: list[tuple[int, ...]] = []
    for cid, y in enumerate(roots):
        if not (s in bags[y] and t in bags[y]):
            continue
        nodes = [a for a in range(td.num_nodes) if comp[a] == cid]
        inside = set()
        for a in nodes:
            inside.update(bags[a])
        keep = sorted((inside - bx) | {s, t})
        sub_g, index_map = _induced_digraph(g, keep)
        local = {v: i for i, v in enumerate(index_map)}
        node_local = {a: i for i, a in enumerate(nodes)}
        sub_tree = Graph.from_edges(len(nodes), [(node_local[a], node_local[b])
                                                 for a in nodes for b in td.tree.adj[a]
                                                 if b in node_local and a < b])
        sub_td = relabel(TreeDecomposition(sub_tree, tuple(bags[a] for a in nodes)), local)
        res = _flow_rec(sub_g, local[s], local[t], clean(sub_td), stats, depth + 1)
        paths.extend(tuple(index_map[v] for v in p) for p in res.flow.paths)
    flow = VertexFlow(tuple(paths))
    rounds = 0
    while True:
        step = augment_once(g, {s}, {t}, flow, check=False)
        if isinstance(step, VertexCut):
            break
        flow = step
        rounds += 1
    if stats is not None:
        stats["topup_augmentations"].append((rounds, k))
    if rounds > max(k - 1, 0):
        raise AssertionError(f"{rounds} top-up augmentations exceed width bound {k - 1}")
    return MaxFlowCut(flow, step)


def _induced_digraph(g: DiGraph, keep: Sequence[int]) -> tuple[DiGraph, list[int]]:
    local = {v: i for i, v in enumerate(keep)}
    out = []
    inn = []
    for v in keep:
        out.append(tuple(local[w] for w in g.out_adj[v] if w in local))
        inn.append(tuple(local[w] for w in g.in_adj[v] if w in local))
    return DiGraph(len(keep), tuple(out), tuple(inn)), list(keep)
