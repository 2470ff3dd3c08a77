"""Linear algebra, matching, flow and treewidth approximation on graphs of low treewidth."""

from .algebra import QQ, PrimeField, SparseMatrix
from .decomp import PathDecomposition, TreeDecomposition, TreePartitionDecomposition, validate
from .elimination import guided_elimination, pluq, rank_det_maxsubmatrix, solve
from .flow import max_vertex_flow_td
from .graph import DiGraph, Graph
from .matching import MatchingFailure, matching_size, max_matching
from .splitting import tw_rank_det_solve
from .tw_approx import approximate_treewidth

__all__ = [
    "QQ", "PrimeField", "SparseMatrix",
    "PathDecomposition", "TreeDecomposition", "TreePartitionDecomposition", "validate",
    "guided_elimination", "pluq", "rank_det_maxsubmatrix", "solve",
    "max_vertex_flow_td", "DiGraph", "Graph",
    "MatchingFailure", "matching_size", "max_matching",
    "tw_rank_det_solve", "approximate_treewidth",
]
