"""Tree, path and tree-partition decompositions.

Validation reports the first violated clause instead of raising, so callers can
print it. Everything that transforms a decomposition (``clean``, ``nice_form``,
``bipartite_decomp_from_symmetric``) returns a new object.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .graph import Graph, is_tree, rooted_tree


class InvalidDecomposition(ValueError):
    pass


@dataclass(frozen=True)
class Rooting:
    root: int
    parent: list[int]
    children: list[list[int]]
    preorder: list[int]
    depth: list[int]


def _bag_key(bag: frozenset[int], node: int) -> tuple[float, int]:
    return (min(bag) if bag else float("inf"), node)


def _rooting(tree: Graph, bags: Sequence[frozenset[int]], root: int,
             child_order: Sequence[Sequence[int]] | None) -> Rooting:
    parent, bfs = rooted_tree(tree, root)
    if child_order is not None:
        children = [list(c) for c in child_order]
    else:
        children = [[] for _ in range(tree.n)]
        for v in bfs[1:]:
            children[parent[v]].append(v)
        for c in children:
            c.sort(key=lambda x: _bag_key(bags[x], x))
    depth = [0] * tree.n
    for v in bfs[1:]:
        depth[v] = depth[parent[v]] + 1
    preorder = []
    stack = [root]
    while stack:
        v = stack.pop()
        preorder.append(v)
        stack.extend(reversed(children[v]))
    return Rooting(root, parent, children, preorder, depth)


@dataclass(frozen=True)
class TreeDecomposition:
    tree: Graph
    bags: tuple[frozenset[int], ...]
    root: int | None = None
    child_order: tuple[tuple[int, ...], ...] | None = None

    @classmethod
    def from_bags(cls, bags: Iterable[Iterable[int]], tree_edges: Iterable[tuple[int, int]],
                  root: int | None = None) -> TreeDecomposition:
        bags = tuple(frozenset(b) for b in bags)
        return cls(Graph.from_edges(len(bags), tree_edges), bags, root)

    @property
    def num_nodes(self) -> int:
        return len(self.bags)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    @property
    def max_bag(self) -> int:
        return max((len(b) for b in self.bags), default=0)

    @cached_property
    def rooting(self) -> Rooting:
        """Parent/children/pre-order with respect to ``root`` (node 0 if unset).

        Children are ordered by ``child_order`` when given, otherwise by the
        smallest vertex in the child's bag (ties by node index).
        """
        return _rooting(self.tree, self.bags, self.root or 0, self.child_order)

    def nodes_of(self, n: int) -> list[list[int]]:
        """For each vertex 0..n-1, the nodes whose bag contains it (ascending)."""
        out: list[list[int]] = [[] for _ in range(n)]
        for t, bag in enumerate(self.bags):
            for v in bag:
                out[v].append(t)
        return out


@dataclass(frozen=True)
class PathDecomposition:
    bags: tuple[frozenset[int], ...]

    @classmethod
    def from_bags(cls, bags: Iterable[Iterable[int]]) -> PathDecomposition:
        return cls(tuple(frozenset(b) for b in bags))

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def to_tree_decomposition(self) -> TreeDecomposition:
        q = len(self.bags)
        return TreeDecomposition(Graph.from_edges(q, [(i, i + 1) for i in range(q - 1)]), self.bags, 0)


@dataclass(frozen=True)
class TreePartitionDecomposition:
    tree: Graph
    bags: tuple[frozenset[int], ...]

    @classmethod
    def from_bags(cls, bags: Iterable[Iterable[int]],
                  tree_edges: Iterable[tuple[int, int]]) -> TreePartitionDecomposition:
        bags = tuple(frozenset(b) for b in bags)
        return cls(Graph.from_edges(len(bags), tree_edges), bags)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0)

    def bag_of(self, n: int) -> list[int]:
        where = [-1] * n
        for t, bag in enumerate(self.bags):
            for v in bag:
                where[v] = t
        return where


@dataclass(frozen=True)
class Violation:
    clause: str
    witness: tuple

    def __str__(self) -> str:
        return f"{self.clause}: {self.witness}"


def validate(decomp, g: Graph) -> Violation | None:
    """Check every defining condition; return the first violation or None."""
    if isinstance(decomp, PathDecomposition):
        return _validate_path(decomp, g)
    if isinstance(decomp, TreePartitionDecomposition):
        return _validate_tpd(decomp, g)
    if isinstance(decomp, TreeDecomposition):
        return _validate_td(decomp, g)
    raise TypeError(f"not a decomposition: {type(decomp).__name__}")


def _check_tree(tree: Graph, bags: Sequence[frozenset[int]], g: Graph) -> Violation | None:
    if tree.n != len(bags):
        return Violation("bag count mismatch", (tree.n, len(bags)))
    if not is_tree(tree):
        return Violation("tree is not a tree", (tree.n, tree.num_edges))
    for t, bag in enumerate(bags):
        for v in bag:
            if not (0 <= v < g.n):
                return Violation("vertex out of range", (t, v))
    return None


def _validate_td(td: TreeDecomposition, g: Graph) -> Violation | None:
    bad = _check_tree(td.tree, td.bags, g)
    if bad:
        return bad
    nodes = td.nodes_of(g.n)
    for v in range(g.n):
        if not nodes[v]:
            return Violation("vertex not covered", (v,))
    bags = td.bags
    for u, v in g.edges():
        a, b = (u, v) if len(nodes[u]) <= len(nodes[v]) else (v, u)
        if not any(b in bags[t] for t in nodes[a]):
            return Violation("edge not covered", (u, v))
    # a vertex's nodes form a subtree iff they span exactly |nodes|-1 tree edges
    inner = [0] * g.n
    for x, y in td.tree.edges():
        for v in bags[x] & bags[y]:
            inner[v] += 1
    for v in range(g.n):
        if inner[v] != len(nodes[v]) - 1:
            return Violation("subtree disconnected", (v, tuple(nodes[v])))
    return None


def _validate_path(pd: PathDecomposition, g: Graph) -> Violation | None:
    for t, bag in enumerate(pd.bags):
        for v in bag:
            if not (0 <= v < g.n):
                return Violation("vertex out of range", (t, v))
    first = [-1] * g.n
    last = [-1] * g.n
    count = [0] * g.n
    for t, bag in enumerate(pd.bags):
        for v in bag:
            if first[v] < 0:
                first[v] = t
            last[v] = t
            count[v] += 1
    for v in range(g.n):
        if first[v] < 0:
            return Violation("vertex not covered", (v,))
    for u, v in g.edges():
        if max(first[u], first[v]) > min(last[u], last[v]):
            return Violation("edge not covered", (u, v))
    for v in range(g.n):
        if count[v] != last[v] - first[v] + 1:
            return Violation("interval property violated", (v, first[v], last[v]))
    return None


def _validate_tpd(tpd: TreePartitionDecomposition, g: Graph) -> Violation | None:
    bad = _check_tree(tpd.tree, tpd.bags, g)
    if bad:
        return bad
    where = [-1] * g.n
    for t, bag in enumerate(tpd.bags):
        for v in bag:
            if where[v] >= 0:
                return Violation("vertex in two bags", (v, where[v], t))
            where[v] = t
    for v in range(g.n):
        if where[v] < 0:
            return Violation("vertex not covered", (v,))
    for u, v in g.edges():
        a, b = where[u], where[v]
        if a != b and not tpd.tree.has_edge(a, b):
            return Violation("edge not covered", (u, v))
    return None


def require_valid(decomp, g: Graph) -> None:
    bad = validate(decomp, g)
    if bad is not None:
        raise InvalidDecomposition(str(bad))


def clean(td: TreeDecomposition) -> TreeDecomposition:
    """Contract every tree edge xy with B_x ⊆ B_y until no bag is inside a neighbour.

    Empty bags and equal adjacent bags disappear as a side effect. Node labels
    are compacted preserving relative order; the root follows its merges.
    """
    q = td.num_nodes
    if q == 0:
        raise InvalidDecomposition("decomposition has no nodes")
    if not is_tree(td.tree):
        raise InvalidDecomposition("tree is not a tree")
    bags = td.bags
    nbr = [set(a) for a in td.tree.adj]
    alive = [True] * q
    root = td.root if td.root is not None else 0
    work = list(td.tree.edges())
    while work:
        x, y = work.pop()
        if not (alive[x] and alive[y]) or y not in nbr[x]:
            continue
        if bags[x] <= bags[y]:
            gone, keep = x, y
        elif bags[y] <= bags[x]:
            gone, keep = y, x
        else:
            continue
        nbr[keep].discard(gone)
        for z in nbr[gone]:
            if z == keep:
                continue
            nbr[z].discard(gone)
            nbr[z].add(keep)
            nbr[keep].add(z)
            work.append((z, keep))
        nbr[gone] = set()
        alive[gone] = False
        if root == gone:
            root = keep
    label = {}
    for t in range(q):
        if alive[t]:
            label[t] = len(label)
    new_bags = tuple(bags[t] for t in label)
    edges = [(label[x], label[y]) for x in label for y in nbr[x] if x < y]
    new_root = label[root] if td.root is not None else None
    return TreeDecomposition(Graph.from_edges(len(label), edges), new_bags, new_root)


def is_clean(td: TreeDecomposition) -> bool:
    return all(not (td.bags[x] <= td.bags[y] or td.bags[y] <= td.bags[x]) for x, y in td.tree.edges())


def _topmost_edges(g: Graph, bag: frozenset[int], forgotten: list[int]) -> int:
    """Edges inside ``bag`` with an endpoint in ``forgotten``."""
    fs = set(forgotten)
    return sum(1 for u in forgotten for w in g.adj[u] if w in bag and (w not in fs or u < w))


def nice_form(td: TreeDecomposition, g: Graph) -> TreeDecomposition:
    """Rooted, ordered decomposition with the properties the E-split relies on.

    Every node has at most two children, each node is topmost for at most
    ``width`` edges (several vertices are forgotten together only when that
    bound already holds, otherwise one at a time), and the root is
    an empty bag reached from the old root by a path that drops one vertex at a
    time.
    """
    require_valid(td, g)
    c = clean(td)
    width = c.width
    rt = c.rooting
    bags: list[frozenset[int]] = []
    parent: list[int] = []

    def add(bag: frozenset[int], par: int) -> int:
        bags.append(bag)
        parent.append(par)
        return len(bags) - 1

    root_bag = sorted(c.bags[rt.root])
    top = add(frozenset(), -1)
    for i in range(1, len(root_bag)):
        top = add(frozenset(root_bag[:i]), top)
    if root_bag:
        top = add(c.bags[rt.root], top)
    stack = [(rt.root, top)]
    while stack:
        t, t_new = stack.pop()
        kids = rt.children[t]
        d = len(kids)
        slots = [t_new]
        for _ in range(d - 2):
            slots.append(add(c.bags[t], slots[-1]))
        for i, child in enumerate(kids):
            hook = slots[min(i, max(d - 2, 0))]
            shared = c.bags[child] & c.bags[t]
            forgotten = sorted(c.bags[child] - c.bags[t])
            if _topmost_edges(g, c.bags[child], forgotten) <= width:
                forgotten = forgotten[:1]
            for j in range(1, len(forgotten)):
                hook = add(shared | frozenset(forgotten[:j]), hook)
            stack.append((child, add(c.bags[child], hook)))
    edges = [(parent[v], v) for v in range(1, len(bags))]
    children: list[list[int]] = [[] for _ in bags]
    for v in range(1, len(bags)):
        children[parent[v]].append(v)
    order = tuple(tuple(sorted(ch, key=lambda x: _bag_key(bags[x], x))) for ch in children)
    return TreeDecomposition(Graph.from_edges(len(bags), edges), tuple(bags), 0, order)


def topmost_nodes(td: TreeDecomposition, n: int) -> list[int]:
    """For each vertex, the node of smallest depth whose bag contains it."""
    rt = td.rooting
    top = [-1] * n
    for t in rt.preorder:
        for v in td.bags[t]:
            if top[v] < 0:
                top[v] = t
    return top


def topmost_edge_counts(td: TreeDecomposition, g: Graph) -> list[int]:
    """Number of edges of g whose topmost common node is each node."""
    top = topmost_nodes(td, g.n)
    depth = td.rooting.depth
    counts = [0] * td.num_nodes
    for u, v in g.edges():
        tu, tv = top[u], top[v]
        counts[tu if depth[tu] >= depth[tv] else tv] += 1
    return counts


def balanced_tree_node(tree: Graph, mu: Sequence[int]) -> int:
    """Node x such that every component of ``tree - x`` has at most half the measure.

    Each edge is oriented from the heavier side towards the lighter side; a node
    with no incoming edge has only light neighbours. Smallest such node wins.
    """
    if not is_tree(tree):
        raise ValueError("input is not a tree")
    total = sum(mu)
    if total <= 0:
        raise ValueError("measure must be positive somewhere")
    parent, order = rooted_tree(tree, 0)
    below = list(mu)
    for v in reversed(order[1:]):
        below[parent[v]] += below[v]
    indeg = [0] * tree.n
    for v in order[1:]:
        p = parent[v]
        if 2 * below[v] > total:
            indeg[p] += 1
        else:
            indeg[v] += 1
    return min(x for x in range(tree.n) if indeg[x] == 0)


def bipartite_decomp_from_symmetric(td: TreeDecomposition, n: int) -> TreeDecomposition:
    """Replace vertex i by row i and column n + i in every bag."""
    bags = tuple(frozenset(b) | frozenset(n + v for v in b) for b in td.bags)
    return TreeDecomposition(td.tree, bags, td.root, td.child_order)


def restrict(td: TreeDecomposition, keep: Iterable[int]) -> TreeDecomposition:
    """Intersect every bag with ``keep`` (labels unchanged)."""
    keep = frozenset(keep)
    return TreeDecomposition(td.tree, tuple(b & keep for b in td.bags), td.root, td.child_order)


def relabel(td: TreeDecomposition, mapping: dict[int, int]) -> TreeDecomposition:
    """Rename vertices through ``mapping``; vertices missing from it are dropped."""
    bags = tuple(frozenset(mapping[v] for v in b if v in mapping) for b in td.bags)
    return TreeDecomposition(td.tree, bags, td.root, td.child_order)


def trivial_decomposition(n: int) -> TreeDecomposition:
    return TreeDecomposition(Graph.empty(1), (frozenset(range(n)),), 0)
