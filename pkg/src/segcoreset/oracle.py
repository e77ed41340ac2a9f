"""Ground-truth machinery: exact guillotine-tree optimum by dynamic
programming, random query generators, and a uniform-sampling baseline.

The DP enumerates every sub-rectangle and budget split, so it is gated on
input size; its intended use is verifying coreset guarantees at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import ParameterError, SizeGuardError
from .grid import PrefixStats, Signal
from .segmentation import KSegmentation, KTreeNode, Leaf, Split, ktree_to_segmentation

DP_CELL_GUARD = 4096


def _tri_id(a, b, n):
    return a * (2 * n - a + 1) // 2 + (b - a - 1)


def _dp_optimal(s1, s2, kmax: int):
    """Run the DP on prefix arrays and rebuild one optimal tree.

    Works for any arrays with prefix-sum semantics, so the same path serves
    both the raw signal and per-cell densities derived from a coreset.
    Returns (tree, loss).
    """
    n = s1.shape[0] - 1
    m = s1.shape[1] - 1
    tc = m * (m + 1) // 2
    dp = kernels.dp_table(s1, s2, kmax)

    def mean_of(a, b, c, d):
        area = (b - a) * (d - c)
        box1 = s1[b, d] - s1[a, d] - s1[b, c] + s1[a, c]
        return float(box1 / area)

    def build(a, b, c, d, j):
        rid = _tri_id(a, b, n) * tc + _tri_id(c, d, m)
        val = dp[j - 1][rid]
        while j > 1 and dp[j - 2][rid] == val:
            j -= 1
        if j == 1:
            return Leaf(mean_of(a, b, c, d))
        cid = _tri_id(c, d, m)
        row_id = _tri_id(a, b, n) * tc
        for t in range(a + 1, b):
            lo = _tri_id(a, t, n) * tc + cid
            hi = _tri_id(t, b, n) * tc + cid
            for i in range(1, j):
                if dp[i - 1][lo] + dp[j - i - 1][hi] == val:
                    return Split("row", t, build(a, t, c, d, i), build(t, b, c, d, j - i))
        for t in range(c + 1, d):
            lo = row_id + _tri_id(c, t, m)
            hi = row_id + _tri_id(t, d, m)
            for i in range(1, j):
                if dp[i - 1][lo] + dp[j - i - 1][hi] == val:
                    return Split("col", t, build(a, b, c, t, i), build(a, b, t, d, j - i))
        raise AssertionError("dp table inconsistent with rebuild scan")

    loss = float(dp[kmax - 1][_tri_id(0, n, n) * tc + _tri_id(0, m, m)])
    tree = build(0, n, 0, m, kmax)
    return tree, loss


def optimal_ktree(signal: Signal, k: int, max_cells: int = DP_CELL_GUARD,
                  stats: PrefixStats = None):
    """Exact minimum-SSE guillotine tree with at most k leaves.

    Exhaustive over O(n^2 m^2) sub-rectangles and all budget splits;
    refuses grids above `max_cells` cells.  Returns (tree, loss).
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if signal.size > max_cells:
        raise SizeGuardError(
            f"DP oracle refused: {signal.size} cells > guard {max_cells}; "
            "raise max_cells explicitly, or evaluate candidate trees against "
            "a coreset instead"
        )
    if stats is None:
        stats = PrefixStats(signal)
    kmax = min(k, signal.size)
    return _dp_optimal(stats.s1, stats.s2, kmax)


def random_ktree(n: int, m: int, k: int, seed) -> KTreeNode:
    """Uniformly random recursive splits until k leaves or nothing splittable.

    Leaf labels are drawn U[-10, 10] in traversal order, so the tree is a
    pure function of the seed.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    root = {"rect": (0, n, 0, m)}
    leaves = [root]
    for _ in range(k - 1):
        splittable = [
            nd for nd in leaves
            if nd["rect"][1] - nd["rect"][0] > 1 or nd["rect"][3] - nd["rect"][2] > 1
        ]
        if not splittable:
            break
        nd = splittable[int(rng.integers(len(splittable)))]
        r0, r1, c0, c1 = nd["rect"]
        axes = []
        if r1 - r0 > 1:
            axes.append("row")
        if c1 - c0 > 1:
            axes.append("col")
        axis = axes[int(rng.integers(len(axes)))]
        if axis == "row":
            t = int(rng.integers(r0 + 1, r1))
            lo = {"rect": (r0, t, c0, c1)}
            hi = {"rect": (t, r1, c0, c1)}
        else:
            t = int(rng.integers(c0 + 1, c1))
            lo = {"rect": (r0, r1, c0, t)}
            hi = {"rect": (r0, r1, t, c1)}
        leaves = [x for x in leaves if x is not nd]
        nd.pop("rect")
        nd.update(axis=axis, threshold=t, low=lo, high=hi)
        leaves.extend([lo, hi])

    def freeze(nd):
        if "rect" in nd:
            return Leaf(float(rng.uniform(-10.0, 10.0)))
        return Split(nd["axis"], nd["threshold"], freeze(nd["low"]), freeze(nd["high"]))

    return freeze(root)


@dataclass(frozen=True)
class WeightedSample:
    """Uniform sample without replacement; each cell carries weight nm/tau."""

    rows: np.ndarray
    cols: np.ndarray
    labels: np.ndarray
    weight: float
    n: int
    m: int

    def __len__(self):
        return len(self.rows)

    def loss(self, seg: KSegmentation) -> float:
        """Unbiased SSE estimate for the segmentation."""
        preds = seg.value_grid()[self.rows, self.cols]
        d = preds - self.labels
        return float(self.weight * np.sum(d * d))


def random_sample_estimator(signal: Signal, tau: int, seed) -> WeightedSample:
    if not (1 <= tau <= signal.size):
        raise ParameterError(f"tau must be in [1, {signal.size}], got {tau}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(signal.size, size=tau, replace=False)
    idx.sort()
    rows = idx // signal.m
    cols = idx % signal.m
    return WeightedSample(
        rows=rows,
        cols=cols,
        labels=signal.labels[rows, cols].copy(),
        weight=signal.size / tau,
        n=signal.n,
        m=signal.m,
    )


def piecewise_signal(n: int, m: int, pieces: int, noise: float, seed) -> Signal:
    """Seeded piecewise-constant ground truth plus Gaussian noise."""
    if pieces < 1 or pieces > n * m:
        raise ParameterError(f"pieces must be in [1, {n * m}], got {pieces}")
    if noise < 0:
        raise ParameterError(f"noise must be >= 0, got {noise}")
    rng = np.random.default_rng(seed)
    tree = random_ktree(n, m, pieces, rng)
    base = ktree_to_segmentation(tree, n, m).value_grid()
    if noise > 0:
        base = base + rng.normal(0.0, noise, size=(n, m))
    return Signal(base)
