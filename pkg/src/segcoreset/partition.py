"""Balanced partition of a signal into low-variance rectangles.

A greedy column sweep (slice partition) cuts a horizontal slab into pieces
whose best-constant-fit loss stays below a threshold; the outer driver
grows slabs row by row while the slab still splits into few pieces.  The
result is a disjoint cover in which every rectangle has opt1 at most
gamma^2 * sigma, and any labeling with few rectangles cuts through only a
few of the pieces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import ParameterError
from .grid import PrefixStats, Rect, Signal

MAX_PIECE_LIMIT = 1 << 62  # cap for floor(1/gamma) with microscopic gamma


@dataclass(frozen=True)
class BalancedPartition:
    rects: tuple  # Rect, sorted by (r0, c0)
    gamma: float
    sigma: float

    @property
    def threshold(self) -> float:
        return self.gamma * self.gamma * self.sigma

    def __len__(self):
        return len(self.rects)


def slice_partition(stats: PrefixStats, view: Rect, sigma: float) -> list:
    """Partition a view into column runs (or row runs inside a stuck
    column) with opt1 <= sigma each.

    A single column whose opt1 alone exceeds sigma is swept by rows in the
    original orientation instead of materializing a transpose.  Single
    cells have opt1 = 0, so the sweep always terminates with a cover.
    """
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    if view.r1 > stats.n or view.c1 > stats.m:
        raise ParameterError(f"view {view.as_tuple()} outside {stats.n}x{stats.m} grid")
    raw = kernels.slice_partition(
        stats.s1, stats.s2, view.r0, view.r1, view.c0, view.c1, float(sigma)
    )
    return [Rect(int(a), int(b), int(c), int(d)) for a, b, c, d in raw]


def partition(
    signal: Signal, gamma: float, sigma: float, stats: PrefixStats = None
) -> BalancedPartition:
    """Grow horizontal slabs while their slice partition has at most
    floor(1/gamma) pieces; commit the last fitting slab and restart.

    Two boundary rules keep the cover total: a single row that already
    overflows the piece limit is committed as-is and the cursor advances by
    one; reaching the bottom row commits the current slab including it.
    """
    if not (0.0 < gamma < 1.0):
        raise ParameterError(f"gamma must be in (0, 1), got {gamma}")
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    if stats is None:
        stats = PrefixStats(signal)
    n, m = signal.n, signal.m
    thresh = gamma * gamma * sigma
    limit = min(int(1.0 / gamma), MAX_PIECE_LIMIT)

    s1, s2 = stats.s1, stats.s2
    out = []
    r0 = 0
    while r0 < n:
        cur = kernels.slice_partition(s1, s2, r0, r0 + 1, 0, m, thresh)
        if cur.shape[0] > limit:
            out.append(cur)
            r0 += 1
            continue
        r1 = r0 + 1
        while r1 < n:
            trial = kernels.slice_partition(s1, s2, r0, r1 + 1, 0, m, thresh)
            if trial.shape[0] <= limit:
                cur = trial
                r1 += 1
            else:
                break
        out.append(cur)
        r0 = r1

    rects = np.concatenate(out, axis=0)
    order = np.lexsort((rects[:, 3], rects[:, 1], rects[:, 2], rects[:, 0]))
    rects = rects[order]
    return BalancedPartition(
        rects=tuple(Rect(int(a), int(b), int(c), int(d)) for a, b, c, d in rects),
        gamma=float(gamma),
        sigma=float(sigma),
    )


def validate_cover(rects, n: int, m: int) -> bool:
    """True iff the rectangles tile the n x m grid exactly once."""
    seen = np.zeros((n, m), dtype=np.int32)
    for r in rects:
        seen[r.r0 : r.r1, r.c0 : r.c1] += 1
    return bool(np.all(seen == 1))
