"""Rough (alpha, beta) approximation used only to seed the partition scale.

Iteratively peels the grid: each round either splits one cell-heavy row
into near-equal intervals and collects the lowest-variance ones, or (when
no row is heavy) forms row slabs and collects heavy columns or low-variance
column chunks inside them.  Collected blocks get their mean value; the
total loss of that assignment, divided by alpha, is the lower-bound scale
sigma consumed by the partitioner.

The peeling works on a shrinking active-cell mask, so collected blocks are
generalized (possibly gappy) cell sets, not rectangles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError
from .grid import Signal

MIN_INTERVAL_WIDTH = 2  # rows shorter than gamma_b*k would otherwise shatter
# into zero-variance singletons, losing the scale signal entirely


def default_alpha(k: int, total: int) -> float:
    return max(1.0, k * math.log2(total))


@dataclass(frozen=True)
class BicriteriaConfig:
    nu: float = 64.0
    gamma_b: float = 8.0
    alpha_formula: Callable[[int, int], float] = default_alpha

    def __post_init__(self):
        if not self.nu > 50:
            raise ParameterError(f"nu must be > 50, got {self.nu}")
        if self.gamma_b < 8:
            raise ParameterError(f"gamma_b must be >= 8, got {self.gamma_b}")


@dataclass
class BicriteriaResult:
    assignment: np.ndarray  # (n, m) fitted value per cell
    blocks: list  # flat cell-index arrays, one per collected block
    loss: float
    alpha: float
    beta_effective: int
    stats: dict = field(default_factory=dict)

    @property
    def sigma(self) -> float:
        return self.loss / self.alpha


def _chunk_bounds(length: int, target_chunks: int):
    """Greedy near-equal interval bounds over `length` items.

    Intervals are at least MIN_INTERVAL_WIDTH wide (when the run allows)
    and the final interval absorbs a short tail.
    """
    width = max(MIN_INTERVAL_WIDTH, -(-length // max(1, target_chunks)))
    starts = list(range(0, length, width))
    if len(starts) >= 2 and length - starts[-1] < width:
        starts.pop()
    bounds = [(starts[i], starts[i + 1]) for i in range(len(starts) - 1)]
    bounds.append((starts[-1], length))
    return bounds


def _interval_opt1(vals: np.ndarray, bounds):
    cum1 = np.concatenate(([0.0], np.cumsum(vals)))
    cum2 = np.concatenate(([0.0], np.cumsum(vals * vals)))
    opts = np.empty(len(bounds))
    means = np.empty(len(bounds))
    for i, (a, b) in enumerate(bounds):
        cnt = b - a
        s1 = cum1[b] - cum1[a]
        s2 = cum2[b] - cum2[a]
        means[i] = s1 / cnt
        if cnt == 1:
            opts[i] = 0.0
        else:
            v = s2 - s1 * s1 / cnt
            opts[i] = v if v > 0.0 else 0.0
    return opts, means


def _values_opt1(vals: np.ndarray):
    cnt = vals.size
    s1 = float(vals.sum())
    mean = s1 / cnt
    if cnt == 1:
        return 0.0, mean
    v = float((vals * vals).sum()) - s1 * s1 / cnt
    return (v if v > 0.0 else 0.0), mean


def bicriteria(signal: Signal, k: int, cfg: Optional[BicriteriaConfig] = None) -> BicriteriaResult:
    """Compute the rough piecewise-constant fit and its loss in O(k * nm)."""
    if cfg is None:
        cfg = BicriteriaConfig()
    n, m = signal.n, signal.m
    total = n * m
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if k > total:
        raise ParameterError(f"k={k} exceeds cell count {total}")

    labels = signal.labels
    flat = labels.ravel()
    mask = np.ones((n, m), dtype=bool)
    flat_mask = mask.ravel()
    row_counts = np.full(n, m, dtype=np.int64)
    active = total

    stop_at = k * math.log2(total)
    nu_k = cfg.nu * k
    t_target = int(cfg.gamma_b * k)
    keep_target = t_target - 2 * k  # >= 6k since gamma_b >= 8

    assignment = np.full(total, np.nan)
    blocks = []
    loss = 0.0
    stats = {"iterations": 0, "heavy_row": 0, "slab_column": 0, "slab_chunks": 0,
             "singletons": 0, "first_iteration_loss": 0.0}

    def collect_batch(batch):
        """batch: list of (idx, mean, opt); removes cells and records blocks."""
        nonlocal active, loss
        for idx, mean, opt in batch:
            blocks.append(idx)
            assignment[idx] = mean
            loss += opt
        all_idx = np.concatenate([b[0] for b in batch])
        flat_mask[all_idx] = False
        row_counts[:] -= np.bincount(all_idx // m, minlength=n)
        active -= all_idx.size
        if stats["iterations"] == 1:
            stats["first_iteration_loss"] = loss

    while active > stop_at:
        stats["iterations"] += 1
        heavy = active / nu_k
        r = int(np.argmax(row_counts))
        if row_counts[r] >= heavy:
            stats["heavy_row"] += 1
            cols = np.flatnonzero(mask[r])
            vals = labels[r, cols]
            bounds = _chunk_bounds(cols.size, t_target)
            if len(bounds) >= 2:
                # any k-piece labeling changes value at most k-1 times along
                # one row, so dropping the k-1 costliest intervals keeps the
                # collected loss below the optimum; cap the exclusion at half
                # the intervals so short rows still make progress
                excl = min(k - 1, len(bounds) // 2)
                keep = min(keep_target, len(bounds) - excl)
            else:
                # row too short to split: fall back to zero-loss singletons
                bounds = [(i, i + 1) for i in range(cols.size)]
                keep = len(bounds)
            opts, means = _interval_opt1(vals, bounds)
            order = np.argsort(opts, kind="stable")[:keep]
            order.sort()  # collect left to right for a stable block order
            base = r * m
            collect_batch(
                [(base + cols[bounds[bi][0] : bounds[bi][1]], means[bi], opts[bi])
                 for bi in order]
            )
            continue

        # no heavy row: build row slabs of roughly `heavy` active cells each
        slabs = []
        rs = 0
        acc = 0
        for ri in range(n):
            acc += int(row_counts[ri])
            if acc >= heavy:
                slabs.append((rs, ri + 1))
                rs = ri + 1
                acc = 0
        if acc > 0 and slabs:
            slabs[-1] = (slabs[-1][0], n)
        elif acc > 0:
            slabs.append((0, n))

        psi = len(slabs)
        r_div = 2.0 * nu_k * nu_k
        have_heavy = []
        no_heavy = []
        for rs, re in slabs:
            cc = mask[rs:re].sum(axis=0)
            size = int(cc.sum())
            if size == 0:
                continue
            if cc.max() >= size / r_div:
                have_heavy.append((rs, re, cc, size))
            else:
                no_heavy.append((rs, re, cc, size))

        candidates = []  # (opt, insertion order, idx, mean)
        if len(no_heavy) >= psi / 2:
            stats["slab_chunks"] += 1
            z = int(4 * cfg.nu * cfg.nu * k**3 + 2 * k * psi)
            for rs, re, cc, size in no_heavy:
                target = size / r_div
                c0 = 0
                acc = 0
                for c in range(m + 1):
                    if c == m or (acc >= target and acc > 0):
                        if acc > 0:
                            rr, cc2 = np.nonzero(mask[rs:re, c0:c])
                            idx = (rr + rs) * m + (cc2 + c0)
                            opt, mean = _values_opt1(flat[idx])
                            candidates.append((opt, len(candidates), idx, mean))
                        c0 = c
                        acc = 0
                    if c < m:
                        acc += int(cc[c])
        else:
            stats["slab_column"] += 1
            z = 2 * k
            for rs, re, cc, size in have_heavy:
                c = int(np.argmax(cc))
                rows = np.flatnonzero(mask[rs:re, c]) + rs
                idx = rows * m + c
                opt, mean = _values_opt1(flat[idx])
                candidates.append((opt, len(candidates), idx, mean))

        if not candidates:
            break  # unreachable with active > 0; defensive
        keep = max(len(candidates) - z, 1)
        candidates.sort(key=lambda t: (t[0], t[1]))
        collect_batch([(idx, mean, opt) for opt, _, idx, mean in candidates[:keep]])

    # singleton finish
    rest = np.flatnonzero(flat_mask)
    stats["singletons"] = int(rest.size)
    for i in rest:
        blocks.append(np.array([i], dtype=np.int64))
    assignment[rest] = flat[rest]

    assert not np.any(np.isnan(assignment))
    alpha = float(cfg.alpha_formula(k, total))
    return BicriteriaResult(
        assignment=assignment.reshape(n, m),
        blocks=blocks,
        loss=float(loss),
        alpha=alpha,
        beta_effective=len(blocks),
        stats=stats,
    )
