"""k-segmentations (labeled rectangle partitions) and guillotine trees.

A segmentation stores an explicit list of (rectangle, label) cells that
partition the grid; this is the general model, since not every rectangle
partition arises from recursive splits.  Trees are an adapter: a tree with
at most k leaves flattens to a k-cell segmentation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import BoundsError, ValidationError
from .grid import PrefixStats, Rect, Signal


@dataclass(frozen=True)
class Leaf:
    label: float


@dataclass(frozen=True)
class Split:
    axis: str  # "row" or "col"
    threshold: int  # absolute boundary; strictly inside the inherited rect
    low: "KTreeNode"
    high: "KTreeNode"

    def __post_init__(self):
        if self.axis not in ("row", "col"):
            raise ValidationError(f"split axis must be 'row' or 'col', got {self.axis!r}")


KTreeNode = Union[Leaf, Split]


def count_leaves(node: KTreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    return count_leaves(node.low) + count_leaves(node.high)


class KSegmentation:
    """Disjoint labeled rectangles covering an n x m grid.

    Cells are kept in canonical order, sorted by (r0, c0), so that
    weight-consuming consumers iterate deterministically.
    """

    def __init__(self, n: int, m: int, cells, validate: bool = True):
        self.n = n
        self.m = m
        cells = [(r if isinstance(r, Rect) else Rect(*r), float(v)) for r, v in cells]
        cells.sort(key=lambda cv: (cv[0].r0, cv[0].c0, cv[0].r1, cv[0].c1))
        self.cells = cells
        if validate:
            self._validate()

    def _validate(self):
        if not self.cells:
            raise ValidationError("segmentation must have at least one cell")
        total = 0
        for rect, _ in self.cells:
            if rect.r1 > self.n or rect.c1 > self.m:
                raise ValidationError(
                    f"cell {rect.as_tuple()} outside {self.n}x{self.m} grid"
                )
            total += rect.area
        if total != self.n * self.m:
            raise ValidationError(
                f"cells cover {total} cells, expected {self.n * self.m}"
            )
        rects = [r for r, _ in self.cells]
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                if rects[i].intersects(rects[j]):
                    raise ValidationError(
                        f"cells {rects[i].as_tuple()} and {rects[j].as_tuple()} overlap"
                    )

    def __len__(self):
        return len(self.cells)

    def value_at(self, r: int, c: int) -> float:
        for rect, v in self.cells:
            if rect.r0 <= r < rect.r1 and rect.c0 <= c < rect.c1:
                return v
        raise BoundsError(f"({r}, {c}) not covered")

    def value_grid(self) -> np.ndarray:
        """Dense n x m array of the assigned values."""
        out = np.empty((self.n, self.m))
        for rect, v in self.cells:
            out[rect.r0 : rect.r1, rect.c0 : rect.c1] = v
        return out

    def arrays(self):
        """(rects int64 (K,4), labels float64 (K,)) views for kernels."""
        rects = np.array([r.as_tuple() for r, _ in self.cells], dtype=np.int64)
        labels = np.array([v for _, v in self.cells], dtype=np.float64)
        return rects, labels


def ktree_to_segmentation(tree: KTreeNode, n: int, m: int) -> KSegmentation:
    """Flatten a tree to its leaf rectangles; one cell per leaf."""
    cells = []

    def walk(node, r0, r1, c0, c1):
        if isinstance(node, Leaf):
            cells.append((Rect(r0, r1, c0, c1), node.label))
            return
        t = node.threshold
        if node.axis == "row":
            if not (r0 < t < r1):
                raise ValidationError(
                    f"row threshold {t} outside ({r0}, {r1}) at rect {(r0, r1, c0, c1)}"
                )
            walk(node.low, r0, t, c0, c1)
            walk(node.high, t, r1, c0, c1)
        else:
            if not (c0 < t < c1):
                raise ValidationError(
                    f"col threshold {t} outside ({c0}, {c1}) at rect {(r0, r1, c0, c1)}"
                )
            walk(node.low, r0, r1, c0, t)
            walk(node.high, r0, r1, t, c1)

    walk(tree, 0, n, 0, m)
    return KSegmentation(n, m, cells)


def exact_loss(signal: Signal, seg: KSegmentation, stats: PrefixStats = None) -> float:
    """SSE of the segmentation against the full signal, O(#cells) via prefix sums."""
    if (signal.n, signal.m) != (seg.n, seg.m):
        raise ValidationError(
            f"segmentation grid {seg.n}x{seg.m} != signal {signal.n}x{signal.m}"
        )
    if stats is None:
        stats = PrefixStats(signal)
    total = 0.0
    for rect, v in seg.cells:
        area, s1, s2 = stats.moments(rect)
        total += s2 - 2.0 * v * s1 + v * v * area
    return total if total > 0.0 else 0.0


def distinct_labels_on_rect(seg: KSegmentation, rect: Rect) -> int:
    """Number of distinct values the segmentation assigns over the rectangle.

    Equal labels in different cells count once (exact float equality).
    """
    if rect.r1 > seg.n or rect.c1 > seg.m:
        raise BoundsError(f"rect {rect.as_tuple()} outside {seg.n}x{seg.m} grid")
    seen = set()
    for cell, v in seg.cells:
        if cell.intersects(rect):
            seen.add(v)
    return len(seen)
