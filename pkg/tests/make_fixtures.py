"""Regenerate the CLI fixture corpus in tests/fixtures (deterministic)."""

from __future__ import annotations

import random
from pathlib import Path

from instances import SMALL_PRIME, oriented, partial_ktree, path_matrix, td_matrix, tpd_matrix
from lowtw.algebra import QQ, PrimeField
from lowtw.decomp import TreeDecomposition
from lowtw.formats import emit_decomposition, emit_graph, emit_matrix, emit_vector
from lowtw.graph import Graph

HERE = Path(__file__).parent / "fixtures"


def write(name: str, text: str) -> None:
    (HERE / name).write_text(text)


def consistent_rhs(m, rng: random.Random) -> list:
    """M·x for a random x, so that the system is solvable."""
    return m.matvec([m.field(rng.randint(-3, 3)) for _ in range(m.n_cols)])


def main() -> None:
    HERE.mkdir(exist_ok=True)
    rng = random.Random(2024)
    for name, n, k in [("ktree20", 20, 2), ("ktree40", 40, 3)]:
        g, td = partial_ktree(n, k, rng, p=0.8)
        write(f"{name}.gr", emit_graph(g))
        write(f"{name}.td", emit_decomposition(td, n))
        dg = oriented(g, rng, both=0.4)
        write(f"{name}_dir.gr", emit_graph(dg))
    for name, F in [("path_qq", QQ), ("path_fp", PrimeField(SMALL_PRIME))]:
        m, pd = path_matrix(12, 12, 3, F, rng)
        write(f"{name}.mtx", emit_matrix(m))
        write(f"{name}.td", emit_decomposition(pd.to_tree_decomposition(), 24))
        write(f"{name}.rhs", emit_vector(consistent_rhs(m, rng), F))
    m, tpd = tpd_matrix(6, 3, QQ, rng, square=True)
    write("tpd_qq.mtx", emit_matrix(m))
    write("tpd_qq.tpd", emit_decomposition(tpd, m.n_rows + m.n_cols))
    write("tpd_qq.rhs", emit_vector(consistent_rhs(m, rng), QQ))
    m, td = td_matrix(10, 10, 2, QQ, rng)
    write("tree_qq.mtx", emit_matrix(m))
    write("tree_qq.td", emit_decomposition(td, 20))
    write("tree_qq.rhs", emit_vector(consistent_rhs(m, rng), QQ))
    write("tree_qq_bad.rhs", emit_vector([QQ(rng.randint(-3, 3)) for _ in range(10)], QQ))
    write("identity3.mtx", "m 3 3 0\n1 1 1\n2 2 1\n3 3 1\n")
    write("identity3.td", emit_decomposition(
        TreeDecomposition.from_bags([{0, 3}, {1, 4}, {2, 5}], [(0, 1), (1, 2)]), 6))
    write("k6.gr", emit_graph(Graph.from_edges(6, [(u, v) for u in range(6) for v in range(u + 1, 6)])))


if __name__ == "__main__":
    main()
