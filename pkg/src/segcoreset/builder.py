"""End-to-end coreset construction.

Pipeline: rough fit -> scale sigma -> balanced partition at threshold
gamma^2 * sigma -> 4-point compression of every partition rectangle.  The
result is an ordered list of block summaries from which any k-rectangle
labeling's SSE can be estimated without touching the signal again.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bicriteria import BicriteriaConfig, bicriteria
from .caratheodory import compress_block
from .errors import ParameterError, ValidationError
from .grid import PrefixStats, Signal
from .partition import partition, validate_cover

THREADS_ENV = "SEG_CORESET_THREADS"

MODES = ("theory", "practical")


@dataclass(frozen=True)
class CoresetConfig:
    k: int
    eps: float
    mode: str = "practical"
    delta: float = 1.0
    gamma_override: Optional[float] = None
    bicriteria_cfg: BicriteriaConfig = field(default_factory=BicriteriaConfig)

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if not (0.0 < self.eps < 0.25):
            raise ParameterError(f"eps must be in (0, 0.25), got {self.eps}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.delta < 1.0:
            raise ParameterError(f"delta must be >= 1, got {self.delta}")
        if self.gamma_override is not None and not (0.0 < self.gamma_override < 1.0):
            raise ParameterError(
                f"gamma_override must be in (0, 1), got {self.gamma_override}"
            )


class Coreset:
    """Ordered block summaries plus build metadata.  Immutable."""

    def __init__(self, n, m, k, eps, gamma, sigma, mode, blocks, warnings=()):
        self.n = n
        self.m = m
        self.k = k
        self.eps = eps
        self.gamma = gamma
        self.sigma = sigma
        self.mode = mode
        self.blocks = tuple(blocks)
        self.warnings = tuple(warnings)
        nb = len(self.blocks)
        self.block_rects = np.empty((nb, 4), dtype=np.int64)
        self.block_labels = np.empty((nb, 4))
        self.block_weights = np.empty((nb, 4))
        for i, blk in enumerate(self.blocks):
            self.block_rects[i] = blk.rect.as_tuple()
            for j, p in enumerate(blk.points):
                self.block_labels[i, j] = p.label
                self.block_weights[i, j] = p.weight
        for a in (self.block_rects, self.block_labels, self.block_weights):
            a.setflags(write=False)

    @property
    def size(self) -> int:
        """Stored point count (4 per block, zero-weight padding included)."""
        return 4 * len(self.blocks)

    @property
    def size_ratio(self) -> float:
        return self.size / (self.n * self.m)

    def total_weight(self) -> float:
        return float(self.block_weights.sum())

    def global_moments(self):
        w = float(self.block_weights.sum())
        s1 = float((self.block_weights * self.block_labels).sum())
        s2 = float((self.block_weights * self.block_labels**2).sum())
        return w, s1, s2

    def __eq__(self, other):
        return (
            isinstance(other, Coreset)
            and (self.n, self.m, self.k, self.eps, self.gamma, self.sigma, self.mode)
            == (other.n, other.m, other.k, other.eps, other.gamma, other.sigma, other.mode)
            and self.blocks == other.blocks
        )

    def __repr__(self):
        return (
            f"Coreset({self.n}x{self.m}, k={self.k}, eps={self.eps}, "
            f"blocks={len(self.blocks)}, mode={self.mode})"
        )


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        v = int(raw)
    except ValueError:
        raise ParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return max(0, v)


def build_coreset(signal: Signal, cfg: CoresetConfig,
                  stats: PrefixStats = None) -> Coreset:
    """Construct a (k, eps)-coreset of the signal.

    theory mode derives gamma from the rough fit's block count via
    eps'^2 / (beta^2 k); practical mode uses gamma_override (default
    eps'^2 / k).  Smaller gamma and smaller sigma both refine the
    partition, growing the coreset but never hurting its accuracy.
    """
    total = signal.size
    if cfg.k > total:
        raise ParameterError(f"k={cfg.k} exceeds cell count {total}")
    if stats is None:
        stats = PrefixStats(signal)

    eps_eff = cfg.eps / cfg.delta
    rough = bicriteria(signal, cfg.k, cfg.bicriteria_cfg)
    sigma = rough.loss / rough.alpha
    if cfg.mode == "theory":
        beta = float(rough.beta_effective) ** 2
        gamma = eps_eff * eps_eff / (beta * cfg.k)
    else:
        gamma = cfg.gamma_override if cfg.gamma_override is not None \
            else eps_eff * eps_eff / cfg.k

    part = partition(signal, gamma, sigma, stats)

    threads = _thread_count()
    if threads > 0:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            blocks = list(ex.map(lambda r: compress_block(stats, signal, r),
                                 part.rects, chunksize=64))
    else:
        blocks = [compress_block(stats, signal, r) for r in part.rects]

    warnings = []
    if sigma == 0.0 and len(blocks) > rough.beta_effective * cfg.k:
        warnings.append(
            "sigma is 0 (rough fit has zero loss) and the signal is not "
            "piecewise constant at that scale: the partition degenerates "
            "toward per-cell blocks and the coreset will not compress"
        )

    coreset = Coreset(
        n=signal.n, m=signal.m, k=cfg.k, eps=cfg.eps, gamma=float(gamma),
        sigma=float(sigma), mode=cfg.mode, blocks=blocks, warnings=warnings,
    )
    _check_build(coreset, signal, stats)
    return coreset


def _check_build(coreset: Coreset, signal: Signal, stats: PrefixStats):
    """Partition and global-moment invariants, enforced on every build."""
    if not validate_cover([b.rect for b in coreset.blocks], signal.n, signal.m):
        raise ValidationError("coreset blocks do not tile the grid")
    total = signal.size
    w, s1, s2 = coreset.global_moments()
    f = signal.labels.ravel()
    ref1 = float(f.sum())
    ref2 = float((f * f).sum())
    if abs(w - total) > 1e-6 * total:
        raise ValidationError(f"coreset total weight {w} != cell count {total}")
    if abs(s1 - ref1) > 1e-6 * max(1.0, abs(ref1)):
        raise ValidationError("coreset first moment drifted")
    if abs(s2 - ref2) > 1e-6 * max(1.0, abs(ref2)):
        raise ValidationError("coreset second moment drifted")
