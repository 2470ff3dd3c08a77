"""Batch command line: ``lowtw <command> ...``.

Results go to stdout as ``key value`` lines. Exit codes: 0 success, 1 usage or
parse error, 2 a verdict (treewidth too large, invalid decomposition,
inconsistent system), 3 a randomized failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

from . import oracles
from .algebra import bipartite_graph
from .decomp import (PathDecomposition, TreeDecomposition, TreePartitionDecomposition,
                     validate)
from .elimination import (guided_elimination, ordering_from_path_decomp, ordering_from_tpd,
                          pluq, rank_det_maxsubmatrix, solve)
from .flow import max_vertex_flow_td
from .formats import (ParseError, emit_decomposition, emit_vector, parse_decomposition,
                      parse_graph, parse_matrix, parse_vector, path_bags)
from .graph import DiGraph, Graph
from .matching import MatchingFailure, matching_size, max_matching
from .separators import TreewidthAtLeast
from .splitting import tw_rank_det_solve
from .tw_approx import approximate_treewidth

SEED_ENV = "LOWTW_SEED"

EXIT_OK, EXIT_USAGE, EXIT_VERDICT, EXIT_FAILURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _undirected(path: str) -> Graph:
    g = parse_graph(_read(path))
    if isinstance(g, DiGraph):
        raise UsageError(f"{path}: expected an undirected graph ('p tw')")
    return g


def _emit(out, key: str, value) -> None:
    out.write(f"{key} {value}\n")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------- commands

def cmd_tw_approx(args, out) -> int:
    g = _undirected(args.graph)
    res = approximate_treewidth(g, args.k)
    if isinstance(res, TreewidthAtLeast):
        out.write(f"treewidth >= {args.k}\n")
        code = EXIT_VERDICT
    else:
        text = emit_decomposition(res, g.n)
        if args.output:
            Path(args.output).write_text(text)
        else:
            out.write(text)
        _emit(out, "width", res.width)
        _emit(out, "bags", res.num_nodes)
        code = EXIT_OK
    if args.oracle:
        if g.n <= 16:
            tw = oracles.exact_treewidth(g)
            _emit(out, "oracle_treewidth", tw)
            agree = code == EXIT_OK or tw >= args.k
            _emit(out, "agree", str(agree).lower())
        else:
            _emit(out, "oracle", "skipped")
    return code


def cmd_validate(args, out) -> int:
    g = parse_graph(_read(args.graph))
    if isinstance(g, DiGraph):
        g = g.underlying()
    d = parse_decomposition(_read(args.decomposition))
    bad = validate(d, g)
    if bad is None:
        _emit(out, "valid", "true")
        return EXIT_OK
    _emit(out, "valid", "false")
    _emit(out, "violation", bad.clause)
    _emit(out, "witness", bad.witness)
    return EXIT_VERDICT


def _factor(m, d):
    """PLUQ route for path and tree-partition decompositions; None means use the split route."""
    if isinstance(d, TreePartitionDecomposition):
        return pluq(guided_elimination(m, ordering_from_tpd(m, d)))
    bags = path_bags(d)
    if bags is not None:
        return pluq(guided_elimination(m, ordering_from_path_decomp(m, PathDecomposition(tuple(bags)))))
    return None


def cmd_linear(args, out) -> int:
    m = parse_matrix(_read(args.matrix))
    d = parse_decomposition(_read(args.decomposition))
    bs = bipartite_graph(m)
    bad = validate(d, bs.graph)
    if bad is not None:
        _emit(out, "valid", "false")
        _emit(out, "violation", bad.clause)
        return EXIT_VERDICT
    F = m.field
    rhs = None
    if args.command == "solve":
        if not args.rhs:
            raise UsageError("solve needs --rhs")
        rhs = parse_vector(_read(args.rhs), F)
        if len(rhs) != m.n_rows:
            raise UsageError(f"right-hand side has {len(rhs)} values, matrix has {m.n_rows} rows")
    if args.command == "det" and m.n_rows != m.n_cols:
        raise UsageError("determinant of a non-square matrix")
    f = _factor(m, d)
    if f is not None:
        info = rank_det_maxsubmatrix(f)
        rank, det = info.rank, info.det
        x = solve(f, rhs) if rhs is not None else None
    else:
        res = tw_rank_det_solve(m, d, rhs)
        rank, det, x = res.rank, res.det, res.solution
    code = EXIT_OK
    if args.command == "rank":
        _emit(out, "rank", rank)
    elif args.command == "det":
        _emit(out, "det", F.format(det))
    else:
        if x is None:
            _emit(out, "status", "inconsistent")
            code = EXIT_VERDICT
        else:
            _emit(out, "status", "consistent")
            if args.output:
                Path(args.output).write_text(emit_vector(x, F))
            else:
                for i, v in enumerate(x, 1):
                    _emit(out, f"x{i}", F.format(v))
    if args.oracle:
        dense = m.to_dense()
        o_rank, o_det = oracles.dense_rank_det(dense, F)
        if args.command == "rank":
            _emit(out, "oracle_rank", o_rank)
            agree = o_rank == rank
        elif args.command == "det":
            _emit(out, "oracle_det", F.format(o_det))
            agree = o_det == det
        else:
            ox = oracles.dense_solve(dense, rhs, F)
            _emit(out, "oracle_status", "inconsistent" if ox is None else "consistent")
            agree = (ox is None) == (x is None) and (x is None or m.matvec(x) == [F(v) for v in rhs])
        _emit(out, "agree", str(agree).lower())
    return code


def cmd_matching(args, out) -> int:
    g = _undirected(args.graph)
    d = parse_decomposition(_read(args.decomposition))
    if not isinstance(d, TreeDecomposition):
        raise UsageError("matching commands need a tree decomposition ('s td')")
    bad = validate(d, g)
    if bad is not None:
        _emit(out, "valid", "false")
        _emit(out, "violation", bad.clause)
        return EXIT_VERDICT
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        if args.command == "matching-size":
            size = matching_size(g, d, args.error_exponent, seed)
            _emit(out, "size", size)
        else:
            mt = max_matching(g, d, args.error_exponent, seed)
            size = mt.size
            _emit(out, "size", size)
            for u, v in mt.edges:
                _emit(out, "edge", f"{u + 1} {v + 1}")
    except MatchingFailure as exc:
        _emit(out, "failure", str(exc).replace("\n", " "))
        return EXIT_FAILURE
    if args.oracle:
        if g.n <= 60:
            ref = len(oracles.brute_matching(g))
            _emit(out, "oracle_size", ref)
            _emit(out, "agree", str(ref == size).lower())
        else:
            _emit(out, "oracle", "skipped")
    return EXIT_OK


def cmd_maxflow(args, out) -> int:
    g = parse_graph(_read(args.graph))
    dg = g if isinstance(g, DiGraph) else DiGraph.from_undirected(g)
    d = parse_decomposition(_read(args.decomposition))
    if not isinstance(d, TreeDecomposition):
        raise UsageError("maxflow needs a tree decomposition ('s td')")
    bad = validate(d, dg.underlying())
    if bad is not None:
        _emit(out, "valid", "false")
        _emit(out, "violation", bad.clause)
        return EXIT_VERDICT
    s, t = args.source - 1, args.sink - 1
    if not (0 <= s < dg.n and 0 <= t < dg.n):
        raise UsageError("source or sink out of range")
    if s == t or dg.has_arc(s, t):
        raise UsageError("source and sink must be distinct and not joined by an arc")
    res = max_vertex_flow_td(dg, s, t, d)
    _emit(out, "flow", res.value)
    _emit(out, "cut", " ".join(str(v + 1) for v in sorted(res.cut.vertices)) or "-")
    for p in res.flow.paths:
        _emit(out, "path", " ".join(str(v + 1) for v in p))
    if args.oracle:
        if dg.n <= 200:
            ref = oracles.brute_maxflow(dg, s, t)
            _emit(out, "oracle_flow", ref.value)
            _emit(out, "agree", str(ref.value == res.value).lower())
        else:
            _emit(out, "oracle", "skipped")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lowtw", description="Algorithms guided by low-width decompositions.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_oracle(sp):
        sp.add_argument("--oracle", action="store_true", help="also run the slow reference and compare")
        return sp

    sp = with_oracle(sub.add_parser("tw-approx", help="decomposition of width O(k^2) or a lower bound"))
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("graph")
    sp.add_argument("-o", "--output")
    sp.set_defaults(run=cmd_tw_approx)

    sp = sub.add_parser("validate", help="check a decomposition against a graph")
    sp.add_argument("graph")
    sp.add_argument("decomposition")
    sp.set_defaults(run=cmd_validate)

    for name in ("rank", "det", "solve"):
        sp = with_oracle(sub.add_parser(name, help=f"{name} of a sparse matrix"))
        sp.add_argument("matrix")
        sp.add_argument("decomposition")
        if name == "solve":
            sp.add_argument("--rhs", required=True)
            sp.add_argument("-o", "--output")
        sp.set_defaults(run=cmd_linear)

    for name in ("matching-size", "matching"):
        sp = with_oracle(sub.add_parser(name, help="maximum matching via the Tutte matrix"))
        sp.add_argument("graph")
        sp.add_argument("decomposition")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--error-exponent", type=int, default=1)
        sp.set_defaults(run=cmd_matching)

    sp = with_oracle(sub.add_parser("maxflow", help="maximum vertex-disjoint s-t flow"))
    sp.add_argument("graph")
    sp.add_argument("decomposition")
    sp.add_argument("--source", type=int, required=True)
    sp.add_argument("--sink", type=int, required=True)
    sp.set_defaults(run=cmd_maxflow)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.run(args, out)
    except (ParseError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
