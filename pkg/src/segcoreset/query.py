"""Loss estimation from a coreset alone.

Blocks on which the query segmentation is constant are evaluated exactly
from their preserved moments.  Intersected blocks expand, conceptually,
back into one unit of weight per cell; draining the 4 stored weights
against the segmentation cells' overlap counts evaluates one such
expansion without materializing it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .builder import Coreset
from .errors import DimensionError, ValidationError
from .oracle import _dp_optimal
from .segmentation import KSegmentation

_DEFICIT_TOL = 1e-6


@dataclass(frozen=True)
class QueryReport:
    loss_estimate: float
    blocks_intersected: int
    blocks_exact: int
    over_budget: bool  # query has more cells than the build-time k


def evaluate_loss(coreset: Coreset, seg: KSegmentation) -> QueryReport:
    """Estimate the segmentation's SSE against the original signal.

    Read-only: per-block weights are copied before draining.  Runtime
    O(#cells * #blocks).
    """
    if (seg.n, seg.m) != (coreset.n, coreset.m):
        raise DimensionError(
            f"segmentation grid {seg.n}x{seg.m} != coreset grid "
            f"{coreset.n}x{coreset.m}"
        )
    cell_rects, cell_labels = seg.arrays()
    loss, intersected, deficit = kernels.fitting_loss(
        coreset.block_rects,
        coreset.block_labels,
        coreset.block_weights,
        np.ascontiguousarray(cell_rects),
        np.ascontiguousarray(cell_labels),
    )
    max_area = max((b.rect.area for b in coreset.blocks), default=1)
    if deficit > _DEFICIT_TOL * max(1.0, float(max_area)):
        raise ValidationError(
            f"weight drain deficit {deficit} exceeds tolerance; "
            "coreset weights are inconsistent with block areas"
        )
    return QueryReport(
        loss_estimate=max(0.0, float(loss)),
        blocks_intersected=int(intersected),
        blocks_exact=len(coreset.blocks) - int(intersected),
        over_budget=len(seg) > coreset.k,
    )


def coreset_prefix_arrays(coreset: Coreset):
    """Per-cell weighted-moment densities from the coreset, as prefix sums.

    Every cell of a block carries 1/area of that block's weighted label
    moments; this is one valid cell-level expansion of the summaries, so
    rectangle sums of these densities estimate rectangle moments.  Exact
    for rectangles aligned with whole blocks.
    """
    n, m = coreset.n, coreset.m
    g1 = np.zeros((n, m))
    g2 = np.zeros((n, m))
    for i, blk in enumerate(coreset.blocks):
        r = blk.rect
        wl = float((coreset.block_weights[i] * coreset.block_labels[i]).sum())
        wl2 = float((coreset.block_weights[i] * coreset.block_labels[i] ** 2).sum())
        g1[r.r0 : r.r1, r.c0 : r.c1] += wl / r.area
        g2[r.r0 : r.r1, r.c0 : r.c1] += wl2 / r.area
    s1 = np.zeros((n + 1, m + 1))
    s2 = np.zeros((n + 1, m + 1))
    np.cumsum(np.cumsum(g1, axis=0), axis=1, out=s1[1:, 1:])
    np.cumsum(np.cumsum(g2, axis=0), axis=1, out=s2[1:, 1:])
    return s1, s2


def optimal_ktree_on_coreset(coreset: Coreset, k: int, max_cells: int = 4096):
    """Exact DP over guillotine trees scored by the coreset estimate.

    The leaf-cost oracle is the best-constant loss of the rectangle under
    the coreset's cell-level expansion (see coreset_prefix_arrays), so the
    returned tree minimizes the coreset-estimated loss over all trees with
    at most k leaves.  Returns (tree, estimated loss).
    """
    total = coreset.n * coreset.m
    if total > max_cells:
        from .errors import SizeGuardError

        raise SizeGuardError(
            f"DP on coreset refused: {total} cells > guard {max_cells}"
        )
    s1, s2 = coreset_prefix_arrays(coreset)
    return _dp_optimal(s1, s2, min(k, total))
