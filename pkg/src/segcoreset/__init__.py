"""Coresets for piecewise-constant fitting of 2-D grids.

Build a small weighted summary of an n x m signal from which the SSE of
any k-rectangle labeling (any decision tree with at most k leaves in
particular) can be estimated within 1 +/- eps, then verify at desk scale
against exact brute-force and dynamic-programming oracles.
"""

from ._backend import BACKEND
from .bicriteria import BicriteriaConfig, BicriteriaResult, bicriteria
from .builder import Coreset, CoresetConfig, build_coreset
from .caratheodory import BlockCoreset, CoresetPoint, caratheodory_reduce, compress_block
from .errors import (
    BoundsError,
    DimensionError,
    ParameterError,
    ParseError,
    SegCoresetError,
    SizeGuardError,
    ValidationError,
)
from .grid import PrefixStats, Rect, Signal, block_mean, build_prefix_stats, opt1
from .io import ingest, load_coreset, load_tree, save_coreset, save_tree
from .oracle import (
    WeightedSample,
    optimal_ktree,
    piecewise_signal,
    random_ktree,
    random_sample_estimator,
)
from .partition import BalancedPartition, partition, slice_partition
from .query import QueryReport, evaluate_loss, optimal_ktree_on_coreset
from .segmentation import (
    KSegmentation,
    Leaf,
    Split,
    count_leaves,
    distinct_labels_on_rect,
    exact_loss,
    ktree_to_segmentation,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BalancedPartition",
    "BicriteriaConfig",
    "BicriteriaResult",
    "BlockCoreset",
    "BoundsError",
    "Coreset",
    "CoresetConfig",
    "CoresetPoint",
    "DimensionError",
    "KSegmentation",
    "Leaf",
    "ParameterError",
    "ParseError",
    "PrefixStats",
    "QueryReport",
    "Rect",
    "SegCoresetError",
    "Signal",
    "SizeGuardError",
    "Split",
    "ValidationError",
    "WeightedSample",
    "bicriteria",
    "block_mean",
    "build_coreset",
    "build_prefix_stats",
    "caratheodory_reduce",
    "compress_block",
    "count_leaves",
    "distinct_labels_on_rect",
    "evaluate_loss",
    "exact_loss",
    "ingest",
    "ktree_to_segmentation",
    "load_coreset",
    "load_tree",
    "opt1",
    "optimal_ktree",
    "optimal_ktree_on_coreset",
    "partition",
    "piecewise_signal",
    "random_ktree",
    "random_sample_estimator",
    "save_coreset",
    "save_tree",
    "slice_partition",
]
