"""Lossless 4-point compression of a block's label distribution.

Lifting each label y to (y, y^2, 1) puts it on a convex curve; a streaming
reduction keeps at most 4 weighted survivors whose weighted moments equal
the full block's (count, sum, sum of squares) exactly.  Consequently the
block's SSE against ANY constant is recoverable from the 4 points alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import BoundsError, ParameterError
from .grid import PrefixStats, Rect, Signal

log = logging.getLogger(__name__)

_WEIGHT_CLAMP = -1e-12


@dataclass(frozen=True)
class CoresetPoint:
    row: int
    col: int
    label: float
    weight: float


@dataclass(frozen=True)
class BlockCoreset:
    """One partition cell compressed to exactly 4 weighted corner points."""

    rect: Rect
    points: tuple  # 4 CoresetPoint, corner order TL, TR, BL, BR

    def weight_total(self) -> float:
        return sum(p.weight for p in self.points)

    def moments(self):
        """(sum of weights, weighted label sum, weighted squared-label sum)."""
        w = s1 = s2 = 0.0
        for p in self.points:
            w += p.weight
            s1 += p.weight * p.label
            s2 += p.weight * p.label * p.label
        return w, s1, s2

    def constant_loss(self, value: float) -> float:
        """SSE of fitting `value` to the block, evaluated from the 4 points."""
        total = 0.0
        for p in self.points:
            d = p.label - value
            total += p.weight * d * d
        return total


def caratheodory_reduce(stream) -> list:
    """Reduce an iterable of (label, multiplicity) to <= 4 weighted labels.

    Keeps at most 4 active lifted points; admitting a 5th solves the
    affine-dependence system and shifts weights along it until one drops
    out.  Total weight and both label moments are preserved (up to float
    roundoff).  Output order follows admission order of the survivors.
    """
    pairs = list(stream)
    if not pairs:
        raise ParameterError("caratheodory_reduce: empty stream")
    values = np.ascontiguousarray([p[0] for p in pairs], dtype=np.float64)
    mults = np.ascontiguousarray([p[1] for p in pairs], dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ParameterError("caratheodory_reduce: labels must be finite")
    if np.any(mults <= 0.0):
        raise ParameterError("caratheodory_reduce: multiplicities must be positive")
    labels, weights, n_active, merges = kernels.reduce_stream(values, mults)
    if merges:
        log.debug("caratheodory_reduce: %d degenerate merge(s)", merges)
    out = []
    for i in range(n_active):
        if weights[i] > 0.0:
            out.append((float(labels[i]), float(weights[i])))
    return out


def compress_block(stats: PrefixStats, signal: Signal, rect: Rect) -> BlockCoreset:
    """Compress one rectangle to a 4-point block coreset.

    Labels are admitted in row-major order; survivors are padded with
    zero-weight entries to exactly 4 points and pinned to the 4 corner
    cells (coordinate choice does not affect any loss the points encode).
    """
    if rect.r1 > signal.n or rect.c1 > signal.m:
        raise BoundsError(f"rect {rect.as_tuple()} outside {signal.n}x{signal.m} grid")
    labels, weights, n_active, merges = kernels.compress_rect(
        signal.labels, rect.r0, rect.r1, rect.c0, rect.c1
    )
    if merges:
        log.debug("compress_block %s: %d degenerate merge(s)", rect.as_tuple(), merges)
    corners = rect.corners()
    pts = []
    for i in range(4):
        w = float(weights[i])
        if _WEIGHT_CLAMP < w < 0.0:
            w = 0.0
        r, c = corners[i]
        pts.append(CoresetPoint(r, c, float(labels[i]), w))
    return BlockCoreset(rect=rect, points=tuple(pts))
