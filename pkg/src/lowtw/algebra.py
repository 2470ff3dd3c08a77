"""Exact fields, primes and sparse matrices.

Field elements are plain Python values: canonical residues (``int``) for a
prime field and ``Fraction`` for the rationals. A field object supplies the
arithmetic so that the elimination code does not care which backend it runs on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .graph import Graph

# largest prime below 2**62
DEFAULT_PRIME = 2**62 - 57

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; exact for every n < 3.3·10^24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def sample_prime(lo: int, hi: int, rng: random.Random | None = None) -> int:
    """A prime in [lo, hi), found by sampling and testing; scans when sampling stalls."""
    if lo >= hi:
        raise ValueError(f"empty range [{lo}, {hi})")
    if hi > 2**62:
        raise ValueError("upper bound exceeds 2**62")
    rng = rng or random.Random(0)
    for _ in range(64 * max(1, (hi - 1).bit_length())):
        x = rng.randrange(lo, hi)
        if is_prime(x):
            return x
    for x in range(lo, hi):
        if is_prime(x):
            return x
    raise ValueError(f"no prime in [{lo}, {hi})")


class PrimeField:
    """Arithmetic modulo a prime p on canonical residues 0..p-1."""

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.zero = 0
        self.one = 1

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("F", self.p))

    @property
    def modulus(self) -> int:
        return self.p

    def __call__(self, x) -> int:
        if isinstance(x, Fraction):
            return x.numerator % self.p * self.inv(x.denominator % self.p) % self.p
        return int(x) % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def submul(self, c: int, a: int, b: int) -> int:
        """c - a·b"""
        return (c - a * b) % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        # extended Euclid
        r0, r1, s0, s1 = self.p, a, 0, 1
        while r1:
            q = r0 // r1
            r0, r1 = r1, r0 - q * r1
            s0, s1 = s1, s0 - q * s1
        return s0 % self.p

    def div(self, a: int, b: int) -> int:
        return a * self.inv(b) % self.p

    def random(self, rng) -> int:
        return rng.randrange(self.p)

    def format(self, a: int) -> str:
        return str(a)


class RationalField:
    """Exact rationals via ``fractions.Fraction``; reported modulus is 0."""

    zero = Fraction(0)
    one = Fraction(1)
    modulus = 0

    def __repr__(self) -> str:
        return "RationalField()"

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("Q")

    def __call__(self, x) -> Fraction:
        return Fraction(x)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def submul(self, c, a, b):
        return c - a * b

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(a)

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero")
        return Fraction(a) / b

    def format(self, a) -> str:
        return str(a)


QQ = RationalField()


def field_for(modulus: int):
    return QQ if modulus == 0 else PrimeField(modulus)


class SparseMatrix:
    """Rows of ``{col: value}`` dictionaries without stored zeros."""

    def __init__(self, n_rows: int, n_cols: int, field, rows: Sequence[Mapping[int, object]] | None = None):
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.field = field
        if rows is None:
            self.rows = [dict() for _ in range(n_rows)]
        else:
            if len(rows) != n_rows:
                raise ValueError("row count mismatch")
            self.rows = [{c: v for c, v in r.items() if v != 0} for r in rows]

    @classmethod
    def from_rows(cls, n_rows: int, n_cols: int, field, rows: list[dict]) -> SparseMatrix:
        """Adopt ``rows`` without copying; the caller guarantees they hold no zeros."""
        out = cls.__new__(cls)
        out.n_rows, out.n_cols, out.field = n_rows, n_cols, field
        if len(rows) != n_rows:
            raise ValueError("row count mismatch")
        out.rows = rows
        return out

    @classmethod
    def from_entries(cls, n_rows: int, n_cols: int, field,
                     entries: Iterable[tuple[int, int, object]]) -> SparseMatrix:
        rows: list[dict] = [dict() for _ in range(n_rows)]
        for r, c, v in entries:
            if not (0 <= r < n_rows and 0 <= c < n_cols):
                raise ValueError(f"entry ({r}, {c}) out of range")
            if c in rows[r]:
                raise ValueError(f"duplicate entry ({r}, {c})")
            v = field(v)
            if v != 0:
                rows[r][c] = v
        return cls(n_rows, n_cols, field, rows)

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[object]], field, n_cols: int | None = None) -> SparseMatrix:
        n_rows = len(dense)
        if n_cols is None:
            n_cols = len(dense[0]) if n_rows else 0
        return cls(n_rows, n_cols, field,
                   [{c: field(v) for c, v in enumerate(row) if field(v) != 0} for row in dense])

    @classmethod
    def identity(cls, n: int, field) -> SparseMatrix:
        return cls(n, n, field, [{i: field.one} for i in range(n)])

    @classmethod
    def permutation(cls, targets: Sequence[int], field) -> SparseMatrix:
        """Matrix with a one at (i, targets[i])."""
        return cls(len(targets), len(targets), field, [{t: field.one} for t in targets])

    def __repr__(self) -> str:
        return f"SparseMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz}, {self.field!r})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, SparseMatrix) and self.shape == other.shape
                and self.rows == other.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def get(self, r: int, c: int):
        return self.rows[r].get(c, self.field.zero)

    def entries(self) -> list[tuple[int, int, object]]:
        return [(r, c, v) for r, row in enumerate(self.rows) for c, v in sorted(row.items())]

    @cached_property
    def cols(self) -> list[dict[int, object]]:
        cols: list[dict] = [dict() for _ in range(self.n_cols)]
        for r, row in enumerate(self.rows):
            for c, v in row.items():
                cols[c][r] = v
        return cols

    def to_dense(self) -> list[list]:
        z = self.field.zero
        out = [[z] * self.n_cols for _ in range(self.n_rows)]
        for r, row in enumerate(self.rows):
            for c, v in row.items():
                out[r][c] = v
        return out

    def transpose(self) -> SparseMatrix:
        return SparseMatrix(self.n_cols, self.n_rows, self.field, self.cols)

    def matmul(self, other: SparseMatrix) -> SparseMatrix:
        if self.n_cols != other.n_rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        F = self.field
        out = []
        for row in self.rows:
            acc: dict[int, object] = {}
            for k, a in row.items():
                for c, b in other.rows[k].items():
                    acc[c] = F.add(acc.get(c, F.zero), F.mul(a, b))
            out.append(acc)
        return SparseMatrix(self.n_rows, other.n_cols, F, out)

    def matvec(self, x: Sequence) -> list:
        if len(x) != self.n_cols:
            raise ValueError("dimension mismatch")
        F = self.field
        out = []
        for row in self.rows:
            acc = F.zero
            for c, v in row.items():
                acc = F.add(acc, F.mul(v, x[c]))
            out.append(acc)
        return out

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> tuple[SparseMatrix, list[int], list[int]]:
        """Restriction to ``rows`` × ``cols`` (sorted); returns back-maps to original indices."""
        rows = sorted(set(rows))
        cols = sorted(set(cols))
        if rows and not (0 <= rows[0] and rows[-1] < self.n_rows):
            raise ValueError("row index out of range")
        if cols and not (0 <= cols[0] and cols[-1] < self.n_cols):
            raise ValueError("column index out of range")
        cpos = {c: j for j, c in enumerate(cols)}
        out = [{cpos[c]: v for c, v in self.rows[r].items() if c in cpos} for r in rows]
        return SparseMatrix(len(rows), len(cols), self.field, out), rows, cols


@dataclass(frozen=True)
class BipartiteStructure:
    """Graph of a matrix: row i is vertex i, column j is vertex n_rows + j."""

    graph: Graph
    n_rows: int
    n_cols: int

    def is_row(self, v: int) -> bool:
        return v < self.n_rows

    def row_vertex(self, i: int) -> int:
        return i

    def col_vertex(self, j: int) -> int:
        return self.n_rows + j


def bipartite_graph(m: SparseMatrix) -> BipartiteStructure:
    n = m.n_rows
    edges = [(r, n + c) for r, row in enumerate(m.rows) for c in row]
    return BipartiteStructure(Graph.from_edges(n + m.n_cols, edges), m.n_rows, m.n_cols)
