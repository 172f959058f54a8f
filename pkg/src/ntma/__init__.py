"""Matching weights of rooted trees and neighbourhood-tree alignment of sparse graphs."""

from .alignment import AlignScore, MatchSet, NtmaParams, align, dedupe, ntma, ntma2, score
from .experiments import estimate_rate, test_error_rates, tree_independence_test
from .lap import brute_force_assignment, solve_max_assignment
from .random_models import (
    GWParams,
    extinction_prob,
    prune_rd,
    sample_conditioned_td,
    sample_er,
    sample_erc,
    sample_gw,
    sample_gw_pair,
)
from .structures import CorrelatedPair, CorrelatedTreePair, Graph, RootedTree, TreeError
from .weights import brute_force_weight, build_weight_table, weight_edge, weight_root

__all__ = [
    "AlignScore", "CorrelatedPair", "CorrelatedTreePair", "GWParams", "Graph", "MatchSet",
    "NtmaParams", "RootedTree", "TreeError", "align", "brute_force_assignment",
    "brute_force_weight", "build_weight_table", "dedupe", "estimate_rate", "extinction_prob",
    "ntma", "ntma2", "prune_rd", "sample_conditioned_td", "sample_er", "sample_erc",
    "sample_gw", "sample_gw_pair", "score", "solve_max_assignment", "test_error_rates",
    "tree_independence_test", "weight_edge", "weight_root",
]
