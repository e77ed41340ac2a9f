"""Dense 2-D signals, rectangle addressing, and O(1) block statistics.

A signal is an n x m grid with one real label per cell.  Prefix sums over
labels and squared labels let any axis-parallel rectangle report its
(count, sum, sum of squares) moments, its mean, and its best-constant-fit
loss in constant time.

Coordinates are zero-based and half-open everywhere: a rectangle
[r0, r1) x [c0, c1) covers rows r0..r1-1 and columns c0..c1-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, ValidationError


@dataclass(frozen=True)
class Rect:
    """Axis-parallel rectangle, half-open on both axes."""

    r0: int
    r1: int
    c0: int
    c1: int

    def __post_init__(self):
        if not (0 <= self.r0 < self.r1 and 0 <= self.c0 < self.c1):
            raise ValidationError(f"degenerate rectangle {self.as_tuple()}")

    def as_tuple(self):
        return (self.r0, self.r1, self.c0, self.c1)

    @property
    def height(self) -> int:
        return self.r1 - self.r0

    @property
    def width(self) -> int:
        return self.c1 - self.c0

    @property
    def area(self) -> int:
        return self.height * self.width

    def corners(self):
        """The four corner cells in canonical order TL, TR, BL, BR.

        Degenerate (thin) rectangles repeat coordinates.
        """
        return (
            (self.r0, self.c0),
            (self.r0, self.c1 - 1),
            (self.r1 - 1, self.c0),
            (self.r1 - 1, self.c1 - 1),
        )

    def intersects(self, other: "Rect") -> bool:
        return (
            self.r0 < other.r1
            and other.r0 < self.r1
            and self.c0 < other.c1
            and other.c0 < self.c1
        )

    def overlap_area(self, other: "Rect") -> int:
        dr = min(self.r1, other.r1) - max(self.r0, other.r0)
        dc = min(self.c1, other.c1) - max(self.c0, other.c0)
        if dr <= 0 or dc <= 0:
            return 0
        return dr * dc

    def contains(self, other: "Rect") -> bool:
        return (
            self.r0 <= other.r0
            and other.r1 <= self.r1
            and self.c0 <= other.c0
            and other.c1 <= self.c1
        )


class Signal:
    """An n x m grid of finite real labels.  Immutable after construction."""

    def __init__(self, labels):
        labels = np.asarray(labels, dtype=np.float64)
        if labels.ndim != 2:
            raise ValidationError(f"labels must be 2-D, got ndim={labels.ndim}")
        n, m = labels.shape
        if n < 1 or m < 1:
            raise ValidationError(f"empty signal shape ({n}, {m})")
        if not np.all(np.isfinite(labels)):
            raise ValidationError("labels must all be finite (no NaN/Inf)")
        self.labels = labels.copy()
        self.labels.setflags(write=False)
        self.n = n
        self.m = m

    @property
    def size(self) -> int:
        return self.n * self.m

    def full_rect(self) -> Rect:
        return Rect(0, self.n, 0, self.m)

    def __eq__(self, other):
        return (
            isinstance(other, Signal)
            and self.n == other.n
            and self.m == other.m
            and np.array_equal(self.labels, other.labels)
        )

    def __repr__(self):
        return f"Signal({self.n}x{self.m})"


class PrefixStats:
    """Prefix sums of (labels, squared labels) with a zero guard row/column.

    Any rectangle's moments follow by four-corner inclusion-exclusion.
    Instances are immutable and safe to share across threads.
    """

    def __init__(self, signal: Signal):
        self.n = signal.n
        self.m = signal.m
        y = signal.labels
        self.s1 = np.zeros((self.n + 1, self.m + 1))
        self.s2 = np.zeros((self.n + 1, self.m + 1))
        np.cumsum(np.cumsum(y, axis=0), axis=1, out=self.s1[1:, 1:])
        np.cumsum(np.cumsum(y * y, axis=0), axis=1, out=self.s2[1:, 1:])
        self.s1.setflags(write=False)
        self.s2.setflags(write=False)

    def _check(self, rect: Rect):
        if rect.r1 > self.n or rect.c1 > self.m:
            raise BoundsError(f"rect {rect.as_tuple()} outside {self.n}x{self.m} grid")

    def moments(self, rect: Rect):
        """(count, sum, sum of squares) over the rectangle."""
        self._check(rect)
        s1 = self.s1
        s2 = self.s2
        r0, r1, c0, c1 = rect.as_tuple()
        box1 = s1[r1, c1] - s1[r0, c1] - s1[r1, c0] + s1[r0, c0]
        box2 = s2[r1, c1] - s2[r0, c1] - s2[r1, c0] + s2[r0, c0]
        return rect.area, float(box1), float(box2)


def build_prefix_stats(signal: Signal) -> PrefixStats:
    """Precompute prefix sums enabling O(1) block moments on any rectangle."""
    return PrefixStats(signal)


def block_mean(stats: PrefixStats, rect: Rect) -> float:
    area, s1, _ = stats.moments(rect)
    return s1 / area


def opt1(stats: PrefixStats, rect: Rect) -> float:
    """Minimum SSE of fitting one constant to the rectangle.

    Equals sum(y^2) - sum(y)^2 / area; clamped at zero because prefix-sum
    cancellation can leave a tiny negative residue.  Single cells are
    exactly zero by construction.
    """
    area, s1, s2 = stats.moments(rect)
    if area == 1:
        return 0.0
    v = s2 - s1 * s1 / area
    return v if v > 0.0 else 0.0
