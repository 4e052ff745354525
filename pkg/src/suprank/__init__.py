"""Centrality rankers and supervised rank aggregation for influence prediction."""

__version__ = "0.1.0"

from .aggregate import (
    AggregationSpec,
    borda,
    compute_ranker_weights,
    kemeny_quicksort,
    local_kemenization,
    skr,
    supervised_borda,
)
from .centrality import Graph, ScoreVector, degree, hits, pagerank, ranking_from_scores, read_edge_list
from .metrics import SplitSpec, auc, average_precision_at_k, logistic_regression_baseline, spearman, stratified_split
from .ranking import (
    GroundTruth,
    MajorityTable,
    Ranking,
    RankingError,
    brute_force_kemeny,
    build_majority_table,
    ecc_check,
    kendall_tau,
    mean_kendall,
)

__all__ = [
    "AggregationSpec",
    "Graph",
    "GroundTruth",
    "MajorityTable",
    "Ranking",
    "RankingError",
    "ScoreVector",
    "SplitSpec",
    "auc",
    "average_precision_at_k",
    "borda",
    "brute_force_kemeny",
    "build_majority_table",
    "compute_ranker_weights",
    "degree",
    "ecc_check",
    "hits",
    "kemeny_quicksort",
    "kendall_tau",
    "local_kemenization",
    "logistic_regression_baseline",
    "mean_kendall",
    "pagerank",
    "ranking_from_scores",
    "read_edge_list",
    "skr",
    "spearman",
    "stratified_split",
    "supervised_borda",
]
