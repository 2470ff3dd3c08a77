"""Text formats: PACE-style graphs and decompositions, sparse matrices, vectors.

All indices in files are 1-based. Emitters write a canonical form so that
parse followed by emit is stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .algebra import SparseMatrix, field_for
from .decomp import TreeDecomposition, TreePartitionDecomposition
from .graph import DiGraph, Graph


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MalformedHeader(ParseError):
    pass


class OutOfRange(ParseError):
    pass


class DuplicateEntry(ParseError):
    pass


def _lines(text: str) -> Iterable[tuple[int, list[str]]]:
    """Non-empty, non-comment lines as (1-based line number, tokens)."""
    for no, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if toks and toks[0] != "c":
            yield no, toks


def _int(tok: str, no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", no) from None


def _index(tok: str, bound: int, no: int, what: str) -> int:
    v = _int(tok, no)
    if not 1 <= v <= bound:
        raise OutOfRange(f"{what} {v} outside 1..{bound}", no)
    return v - 1


# ---------------------------------------------------------------- graphs

@dataclass(frozen=True)
class GraphFile:
    graph: Graph | DiGraph

    @property
    def directed(self) -> bool:
        return isinstance(self.graph, DiGraph)


def parse_graph(text: str) -> Graph | DiGraph:
    """``p tw n m`` for undirected graphs, ``p dg n m`` for directed ones."""
    it = iter(_lines(text))
    try:
        no, head = next(it)
    except StopIteration:
        raise MalformedHeader("missing header", 1) from None
    if len(head) != 4 or head[0] != "p" or head[1] not in ("tw", "dg"):
        raise MalformedHeader("expected 'p tw <n> <m>' or 'p dg <n> <m>'", no)
    n, m = _int(head[2], no), _int(head[3], no)
    if n < 0 or m < 0:
        raise MalformedHeader("negative size", no)
    directed = head[1] == "dg"
    seen: set[tuple[int, int]] = set()
    for no, toks in it:
        if len(toks) != 2:
            raise ParseError("expected two endpoints", no)
        u, v = _index(toks[0], n, no, "vertex"), _index(toks[1], n, no, "vertex")
        if u == v:
            raise ParseError("self-loop", no)
        key = (u, v) if directed else (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEntry(f"duplicate edge {u + 1} {v + 1}", no)
        seen.add(key)
    if len(seen) != m:
        raise MalformedHeader(f"header announces {m} edges, found {len(seen)}", 1)
    if directed:
        return DiGraph.from_arcs(n, seen)
    return Graph.from_edges(n, seen)


def emit_graph(g: Graph | DiGraph) -> str:
    if isinstance(g, DiGraph):
        arcs = sorted(g.arcs())
        lines = [f"p dg {g.n} {len(arcs)}"] + [f"{u + 1} {v + 1}" for u, v in arcs]
    else:
        edges = sorted(g.edges())
        lines = [f"p tw {g.n} {len(edges)}"] + [f"{u + 1} {v + 1}" for u, v in edges]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- decompositions

def parse_decomposition(text: str) -> TreeDecomposition | TreePartitionDecomposition:
    """``s td nb maxbag n`` (tree decomposition) or ``s tpd ...`` (tree-partition decomposition)."""
    it = iter(_lines(text))
    try:
        no, head = next(it)
    except StopIteration:
        raise MalformedHeader("missing header", 1) from None
    if len(head) != 5 or head[0] != "s" or head[1] not in ("td", "tpd"):
        raise MalformedHeader("expected 's td <bags> <max bag> <n>' or 's tpd ...'", no)
    nb, maxbag, n = (_int(x, no) for x in head[2:])
    if min(nb, maxbag, n) < 0:
        raise MalformedHeader("negative size", no)
    bags: list[frozenset[int] | None] = [None] * nb
    edges: set[tuple[int, int]] = set()
    for no, toks in it:
        if toks[0] == "b":
            if len(toks) < 2:
                raise ParseError("bag line without id", no)
            b = _index(toks[1], nb, no, "bag")
            if bags[b] is not None:
                raise DuplicateEntry(f"bag {b + 1} given twice", no)
            vs = [_index(t, n, no, "vertex") for t in toks[2:]]
            if len(set(vs)) != len(vs):
                raise DuplicateEntry("vertex repeated in bag", no)
            if len(vs) > maxbag:
                raise ParseError(f"bag larger than announced maximum {maxbag}", no)
            bags[b] = frozenset(vs)
        else:
            if len(toks) != 2:
                raise ParseError("expected a tree edge '<id> <id>'", no)
            a, b = _index(toks[0], nb, no, "bag"), _index(toks[1], nb, no, "bag")
            key = (min(a, b), max(a, b))
            if key in edges or a == b:
                raise DuplicateEntry(f"tree edge {a + 1} {b + 1} repeated or a loop", no)
            edges.add(key)
    missing = [i + 1 for i, b in enumerate(bags) if b is None]
    if missing:
        raise ParseError(f"bag {missing[0]} missing", None)
    tree = Graph.from_edges(nb, edges)
    full = tuple(b for b in bags if b is not None)
    if head[1] == "tpd":
        return TreePartitionDecomposition(tree, full)
    return TreeDecomposition(tree, full, 0 if nb else None)


def emit_decomposition(d: TreeDecomposition | TreePartitionDecomposition, n: int) -> str:
    kind = "tpd" if isinstance(d, TreePartitionDecomposition) else "td"
    maxbag = max((len(b) for b in d.bags), default=0)
    lines = [f"s {kind} {len(d.bags)} {maxbag} {n}"]
    for i, b in enumerate(d.bags):
        lines.append(" ".join(["b", str(i + 1)] + [str(v + 1) for v in sorted(b)]))
    for a, b in sorted(d.tree.edges()):
        lines.append(f"{a + 1} {b + 1}")
    return "\n".join(lines) + "\n"


def path_bags(td: TreeDecomposition) -> list[frozenset[int]] | None:
    """Bags in path order when the tree is the path 1-2-...-q, else None."""
    q = td.num_nodes
    if set(td.tree.edges()) == {(i, i + 1) for i in range(q - 1)}:
        return list(td.bags)
    return None


# ---------------------------------------------------------------- matrices and vectors

def parse_value(tok: str, field, no: int):
    try:
        if field.modulus == 0:
            return Fraction(tok)
        if "/" in tok:
            num, den = tok.split("/")
            return field.div(field(int(num)), field(int(den)))
        return field(int(tok))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad value {tok!r}", no) from None


def parse_matrix(text: str) -> SparseMatrix:
    """``m rows cols modulus`` then ``r c value`` lines; modulus 0 means rationals."""
    it = iter(_lines(text))
    try:
        no, head = next(it)
    except StopIteration:
        raise MalformedHeader("missing header", 1) from None
    if len(head) != 4 or head[0] != "m":
        raise MalformedHeader("expected 'm <rows> <cols> <modulus>'", no)
    nr, nc, mod = (_int(x, no) for x in head[1:])
    if nr < 0 or nc < 0 or mod < 0:
        raise MalformedHeader("negative size or modulus", no)
    try:
        field = field_for(mod)
    except ValueError as exc:
        raise MalformedHeader(str(exc), no) from None
    rows: list[dict] = [dict() for _ in range(nr)]
    for no, toks in it:
        if len(toks) != 3:
            raise ParseError("expected '<row> <col> <value>'", no)
        r, c = _index(toks[0], nr, no, "row"), _index(toks[1], nc, no, "column")
        if c in rows[r]:
            raise DuplicateEntry(f"duplicate entry ({r + 1}, {c + 1})", no)
        v = parse_value(toks[2], field, no)
        if v == 0:
            raise ParseError("explicit zero entry", no)
        rows[r][c] = v
    return SparseMatrix(nr, nc, field, rows)


def emit_matrix(m: SparseMatrix) -> str:
    lines = [f"m {m.n_rows} {m.n_cols} {m.field.modulus}"]
    lines += [f"{r + 1} {c + 1} {m.field.format(v)}" for r, c, v in m.entries()]
    return "\n".join(lines) + "\n"


def parse_vector(text: str, field) -> list:
    out = []
    for no, toks in _lines(text):
        if len(toks) != 1:
            raise ParseError("expected one value per line", no)
        out.append(parse_value(toks[0], field, no))
    return out


def emit_vector(xs: Iterable, field) -> str:
    return "".join(f"{field.format(x)}\n" for x in xs)
