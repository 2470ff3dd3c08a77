"""Balanced separators of size O(k²) and the tree partition they are built from."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .flow import collapse_terminals, flow_up_to_k
from .graph import (DiGraph, Graph, components_avoiding, induced_subgraph,
                    rooted_tree, spanning_tree)


@dataclass(frozen=True)
class SteinerPiece:
    vertices: frozenset[int]
    anchor: int

    @property
    def interior(self) -> frozenset[int]:
        return self.vertices - {self.anchor}


@dataclass(frozen=True)
class LargeSeparator:
    vertices: frozenset[int]


@dataclass(frozen=True)
class SmallSeparator:
    vertices: frozenset[int]


@dataclass(frozen=True)
class TreewidthAtLeast:
    k: int


SeparatorOutcome = LargeSeparator | SmallSeparator | TreewidthAtLeast


def steiner_partition(tree: Graph, mu: Sequence[int], lam: Fraction | int,
                      root: int = 0) -> list[SteinerPiece]:
    """Cut a tree into connected pieces (R, u) with λ ≤ μ(R - u) < 4λ.

    Bottom-up: a node whose remaining subtree weighs at least 2λ groups its
    children's remaining subtrees into minimal prefixes of weight ≥ λ (the last
    group also takes a tail lighter than λ) and each group plus the node becomes
    a piece anchored at the node. What is never cut weighs less than 2λ.
    """
    if any(w >= lam for w in mu):
        raise ValueError("every vertex must weigh less than lambda")
    parent, order = rooted_tree(tree, root)
    acc = list(mu)
    attached: list[list[int]] = [[] for _ in range(tree.n)]
    pieces = []
    for u in reversed(order):
        for c in attached[u]:
            acc[u] += acc[c]
        if acc[u] >= 2 * lam:
            groups: list[list[int]] = []
            cur: list[int] = []
            cur_w = 0
            rest = acc[u] - mu[u]
            kids = sorted(attached[u])
            for i, c in enumerate(kids):
                cur.append(c)
                cur_w += acc[c]
                rest -= acc[c]
                if cur_w >= lam:
                    groups.append(cur)
                    cur, cur_w = [], 0
                    if rest < lam:
                        groups[-1].extend(kids[i + 1:])
                        break
            else:
                if cur:
                    groups[-1].extend(cur)
            for grp in groups:
                verts = {u}
                for c in grp:
                    verts.update(_collect(c, attached))
                pieces.append(SteinerPiece(frozenset(verts), u))
            attached[u] = []
            acc[u] = mu[u]
        if parent[u] >= 0:
            attached[parent[u]].append(u)
    return pieces


def _collect(start: int, attached: list[list[int]]) -> list[int]:
    out = [start]
    stack = [start]
    while stack:
        v = stack.pop()
        for c in attached[v]:
            out.append(c)
            stack.append(c)
    return out


def is_balanced(g: Graph, mu: Sequence[int], sep, num: int, den: int) -> bool:
    """True if every component of g - sep has measure ≤ (num/den)·μ(V)."""
    total = sum(mu)
    return all(den * sum(mu[v] for v in comp) <= num * total
               for comp in components_avoiding(g, sep))


def find_balanced_separator(g: Graph, mu: Sequence[int], k: int) -> SeparatorOutcome:
    """A 7/8-balanced separator of size ≤ 100k², a (1-1/(100k))-balanced one of size ≤ k,
    or the conclusion that tw(g) ≥ k."""
    total = sum(mu)
    if total <= 0:
        raise ValueError("measure must be positive somewhere")
    scale = 100 * k
    for u in range(g.n):
        if scale * mu[u] >= total:
            return SmallSeparator(frozenset((u,)))
    lam = Fraction(total, scale)
    digraph = DiGraph.from_undirected(g)
    Y: set[int] = set()
    for _ in range(k):
        comps = components_avoiding(g, Y)
        heavy = [c for c in comps if 8 * sum(mu[v] for v in c) > 7 * total]
        if not heavy:
            return LargeSeparator(frozenset(Y))
        sub, index_map = induced_subgraph(g, heavy[0])
        tree = spanning_tree(sub, range(sub.n))
        local_pieces = steiner_partition(tree, [mu[v] for v in index_map], lam)
        pieces = [frozenset(index_map[v] for v in p.vertices) for p in local_pieces]
        anchors = {index_map[p.anchor] for p in local_pieces}
        for a in range(len(pieces)):
            for b in range(a + 1, len(pieces)):
                Ra, Rb = pieces[a], pieces[b]
                if Ra & Rb or any(w in Rb for v in Ra for w in g.adj[v]):
                    continue
                inst = collapse_terminals(digraph, Ra, Rb)
                res = flow_up_to_k(inst.graph, {inst.s}, {inst.t}, k)
                if res is not None:
                    return SmallSeparator(inst.lift_cut(res.cut).vertices)
        Y |= anchors
    if is_balanced(g, mu, Y, 1, 2):
        return LargeSeparator(frozenset(Y))
    return TreewidthAtLeast(k)
