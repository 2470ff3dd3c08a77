"""Slow, independent reference implementations used to check the fast algorithms.

Nothing here imports the elimination, splitting, flow or matching modules; the
oracles share only the plain graph and field types.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .graph import DiGraph, Graph


class OracleTooLarge(ValueError):
    """Instance exceeds the size an oracle accepts."""


def _guard(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise OracleTooLarge(f"{what} accepts at most {limit} vertices, got {n}")


# ---------------------------------------------------------------- linear algebra

def dense_rank_det(dense: Sequence[Sequence], field) -> tuple[int, object | None]:
    """Rank and (for square input) determinant by full-pivot Gaussian elimination."""
    a = [[field(x) for x in row] for row in dense]
    n = len(a)
    m = len(a[0]) if n else 0
    det = field.one
    rank = 0
    rows, cols = list(range(n)), list(range(m))
    while rank < min(n, m):
        pivot = next(((i, j) for i in rows[rank:] for j in cols[rank:] if a[i][j] != field.zero), None)
        if pivot is None:
            break
        i, j = pivot
        ri, cj = rows.index(i), cols.index(j)
        if ri != rank:
            rows[rank], rows[ri] = rows[ri], rows[rank]
            det = field.neg(det)
        if cj != rank:
            cols[rank], cols[cj] = cols[cj], cols[rank]
            det = field.neg(det)
        p = a[i][j]
        det = field.mul(det, p)
        inv = field.inv(p)
        for r in rows[rank + 1:]:
            if a[r][j] != field.zero:
                f = field.mul(a[r][j], inv)
                for c in cols[rank:]:
                    a[r][c] = field.submul(a[r][c], f, a[i][c])
        rank += 1
    if n != m:
        return rank, None
    return rank, det if rank == n else field.zero


def cofactor_det(dense: Sequence[Sequence], field):
    """Determinant by Laplace expansion along the first row (n ≤ 7)."""
    n = len(dense)
    if n > 7:
        raise OracleTooLarge("cofactor expansion accepts at most 7 rows")
    if n == 0:
        return field.one
    a = [[field(x) for x in row] for row in dense]

    def rec(rows: tuple[int, ...], cols: tuple[int, ...]):
        if len(rows) == 1:
            return a[rows[0]][cols[0]]
        out = field.zero
        for idx, c in enumerate(cols):
            if a[rows[0]][c] == field.zero:
                continue
            minor = rec(rows[1:], cols[:idx] + cols[idx + 1:])
            term = field.mul(a[rows[0]][c], minor)
            out = field.add(out, term) if idx % 2 == 0 else field.sub(out, term)
        return out

    return rec(tuple(range(n)), tuple(range(n)))


def dense_solve(dense: Sequence[Sequence], rhs: Sequence, field) -> list | None:
    """Some solution of A·x = b by reduced row echelon form, or None when inconsistent."""
    n = len(dense)
    m = len(dense[0]) if n else 0
    a = [[field(x) for x in row] + [field(b)] for row, b in zip(dense, rhs)]
    where = [-1] * m
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if a[i][c] != field.zero), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = field.inv(a[r][c])
        a[r] = [field.mul(x, inv) for x in a[r]]
        for i in range(n):
            if i != r and a[i][c] != field.zero:
                f = a[i][c]
                a[i] = [field.submul(x, f, y) for x, y in zip(a[i], a[r])]
        where[c] = r
        r += 1
    if any(a[i][m] != field.zero for i in range(r, n)):
        return None
    return [a[where[c]][m] if where[c] >= 0 else field.zero for c in range(m)]


# ---------------------------------------------------------------- matching

def brute_matching(g: Graph, limit: int = 60) -> list[tuple[int, int]]:
    """Maximum matching by Edmonds' blossom algorithm (BFS trees, blossom contraction via bases)."""
    _guard(g.n, limit, "brute_matching")
    n = g.n
    adj = [sorted(g.adj[v]) for v in range(n)]
    mate = [-1] * n

    def find_path(root: int) -> bool:
        used = [False] * n
        parent = [-1] * n
        base = list(range(n))
        used[root] = True
        queue = deque([root])

        def lca(a: int, b: int) -> int:
            seen = [False] * n
            while True:
                a = base[a]
                seen[a] = True
                if mate[a] == -1:
                    break
                a = parent[mate[a]]
            while True:
                b = base[b]
                if seen[b]:
                    return b
                b = parent[mate[b]]

        def mark(v: int, b: int, child: int, blossom: list[bool]) -> None:
            while base[v] != b:
                blossom[base[v]] = blossom[base[mate[v]]] = True
                parent[v] = child
                child = mate[v]
                v = parent[mate[v]]

        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or mate[v] == to:
                    continue
                if to == root or (mate[to] != -1 and parent[mate[to]] != -1):
                    cur = lca(v, to)
                    blossom = [False] * n
                    mark(v, cur, to, blossom)
                    mark(to, cur, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if mate[to] == -1:
                        while to != -1:
                            pv = parent[to]
                            nxt = mate[pv]
                            mate[to], mate[pv] = pv, to
                            to = nxt
                        return True
                    used[mate[to]] = True
                    queue.append(mate[to])
        return False

    for v in range(n):
        if mate[v] == -1:
            find_path(v)
    return sorted((v, mate[v]) for v in range(n) if v < mate[v])


def exhaustive_matching_size(g: Graph, limit: int = 12) -> int:
    """Maximum matching size by branching on the smallest vertex (exponential)."""
    _guard(g.n, limit, "exhaustive_matching_size")

    def rec(free: frozenset[int]) -> int:
        if not free:
            return 0
        v = min(free)
        rest = free - {v}
        best = rec(rest)
        for w in g.adj[v]:
            if w in rest:
                best = max(best, 1 + rec(rest - {w}))
        return best

    return rec(frozenset(range(g.n)))


def perfect_matchings(g: Graph, limit: int = 14) -> list[tuple[tuple[int, int], ...]]:
    """All perfect matchings, each as a sorted edge tuple."""
    _guard(g.n, limit, "perfect_matchings")
    out = []

    def rec(free: frozenset[int], acc: list[tuple[int, int]]) -> None:
        if not free:
            out.append(tuple(sorted(acc)))
            return
        v = min(free)
        for w in sorted(g.adj[v]):
            if w in free and w != v:
                acc.append((v, w))
                rec(free - {v, w}, acc)
                acc.pop()

    rec(frozenset(range(g.n)), [])
    return out


def allowed_edges(g: Graph, limit: int = 14) -> set[tuple[int, int]]:
    """Edges (u < v) that lie in at least one perfect matching."""
    return {e for pm in perfect_matchings(g, limit) for e in pm}


# ---------------------------------------------------------------- flow

@dataclass(frozen=True)
class OracleFlow:
    value: int
    paths: tuple[tuple[int, ...], ...]
    cut: frozenset[int]


def brute_maxflow(g: DiGraph, s: int, t: int, limit: int = 200) -> OracleFlow:
    """Edmonds–Karp on the vertex-split network; s and t are uncapacitated."""
    _guard(g.n, limit, "brute_maxflow")
    if s == t or g.has_arc(s, t):
        raise ValueError("terminals must be distinct and non-adjacent")
    n = g.n
    big = n + 1
    # node 2v is v's entry, 2v + 1 its exit
    cap: dict[tuple[int, int], int] = {}
    nbrs: list[set[int]] = [set() for _ in range(2 * n)]

    def add(a: int, b: int, c: int) -> None:
        cap[(a, b)] = cap.get((a, b), 0) + c
        cap.setdefault((b, a), 0)
        nbrs[a].add(b)
        nbrs[b].add(a)

    for v in range(n):
        add(2 * v, 2 * v + 1, big if v in (s, t) else 1)
    for u in range(n):
        for w in g.out_adj[u]:
            add(2 * u + 1, 2 * w, big)
    src, dst = 2 * s + 1, 2 * t
    value = 0
    while True:
        prev = {src: src}
        queue = deque([src])
        while queue and dst not in prev:
            a = queue.popleft()
            for b in sorted(nbrs[a]):
                if b not in prev and cap[(a, b)] > 0:
                    prev[b] = a
                    queue.append(b)
        if dst not in prev:
            break
        b = dst
        while b != src:
            a = prev[b]
            cap[(a, b)] -= 1
            cap[(b, a)] += 1
            b = a
        value += 1
    cut = frozenset(v for v in range(n) if v not in (s, t)
                    and 2 * v in prev and 2 * v + 1 not in prev)
    # flow on arc u→w is the residual capacity of its reverse
    flow_on = {}
    for u in range(n):
        for w in g.out_adj[u]:
            a, b = 2 * u + 1, 2 * w
            flow_on[(u, w)] = cap[(b, a)]
    paths = []
    for _ in range(value):
        path = [s]
        while path[-1] != t:
            u = path[-1]
            w = next(w for w in sorted(g.out_adj[u]) if flow_on.get((u, w), 0) > 0)
            flow_on[(u, w)] -= 1
            path.append(w)
        paths.append(tuple(path))
    return OracleFlow(value, tuple(paths), cut)


# ---------------------------------------------------------------- treewidth

def exact_treewidth(g: Graph, limit: int = 16) -> int:
    """Treewidth by dynamic programming over eliminated vertex sets.

    TW(S) is the best width for eliminating S first; the cost of eliminating v
    after S is the number of vertices outside S ∪ {v} reachable from v through S.
    """
    _guard(g.n, limit, "exact_treewidth")
    n = g.n
    if n == 0:
        return -1
    nbr = [0] * n
    for v in range(n):
        for w in g.adj[v]:
            nbr[v] |= 1 << w

    def q_size(S: int, v: int) -> int:
        seen = 1 << v
        frontier = [v]
        out = 0
        while frontier:
            x = frontier.pop()
            m = nbr[x] & ~seen
            seen |= m
            while m:
                low = m & -m
                w = low.bit_length() - 1
                m ^= low
                if S >> w & 1:
                    frontier.append(w)
                else:
                    out |= low
        return bin(out).count("1")

    full = (1 << n) - 1
    best = {0: -1}
    for size in range(1, n + 1):
        layer = {}
        for combo in combinations(range(n), size):
            S = 0
            for v in combo:
                S |= 1 << v
            val = n
            for v in combo:
                rest = S & ~(1 << v)
                if rest in best:
                    val = min(val, max(best[rest], q_size(rest, v)))
            layer[S] = val
        best = layer
    return best[full]


# ---------------------------------------------------------------- orderings

def brute_strongness(h: Graph, order: Sequence[int], limit: int = 60) -> tuple[int, int, int, int] | None:
    """Check every quadruple: ij, ik, jl ∈ E, j before k, i not after l ⇒ kl ∈ E."""
    _guard(h.n, limit, "brute_strongness")
    pos = {v: p for p, v in enumerate(order)}
    if len(pos) != h.n:
        raise ValueError("order must list every vertex once")
    n = h.n
    E = [[False] * n for _ in range(n)]
    for u, v in h.edges():
        E[u][v] = E[v][u] = True
    for i in range(n):
        for j in range(n):
            if not E[i][j]:
                continue
            for k in range(n):
                if not E[i][k] or pos[j] >= pos[k]:
                    continue
                for l in range(n):
                    if E[j][l] and pos[i] <= pos[l] and not E[k][l]:
                        return (i, j, k, l)
    return None
