#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs each hot kernel on a representative workload for both backends and
prints per-op timings plus the speedup.  Usage:

    python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import time

import numpy as np

from segcoreset import PrefixStats, piecewise_signal
from segcoreset._backend import get_kernels


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(0)
    sig = piecewise_signal(256, 256, 50, 0.5, seed=1)
    st = PrefixStats(sig)
    labels = np.ascontiguousarray(sig.labels)
    stream_vals = np.ascontiguousarray(rng.uniform(-10, 10, size=100_000))
    stream_mults = np.ones_like(stream_vals)

    small = piecewise_signal(16, 16, 4, 0.3, seed=2)
    small_st = PrefixStats(small)

    def blocks_for(k):
        # 64 plausible-looking 4-point blocks + a 24-cell query
        br = []
        for i in range(64):
            r0 = (i * 4) % 252
            c0 = (i * 16) % 252
            br.append((r0, r0 + 4, c0, c0 + 4))
        rects = np.array(br, dtype=np.int64)
        lab = np.ascontiguousarray(rng.uniform(-10, 10, size=(64, 4)))
        wts = np.full((64, 4), 4.0)
        cells = np.array(
            [(0, 256, i * 8, (i + 1) * 8) for i in range(32)], dtype=np.int64
        )
        cl = np.ascontiguousarray(rng.uniform(-10, 10, size=32))
        return k.fitting_loss(rects, lab, wts, cells, cl)

    return [
        ("reduce_stream 100k labels",
         lambda k: k.reduce_stream(stream_vals, stream_mults)),
        ("compress_rect 256x256",
         lambda k: k.compress_rect(labels, 0, 256, 0, 256)),
        ("slice_partition 256 rows",
         lambda k: k.slice_partition(st.s1, st.s2, 0, 256, 0, 256, 50.0)),
        ("dp_table 16x16 k=4",
         lambda k: k.dp_table(small_st.s1, small_st.s2, 4)),
        ("fitting_loss 64 blocks x 32 cells x100",
         lambda k: [blocks_for(k) for _ in range(100)]),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    py = get_kernels("python")
    try:
        cy = get_kernels("compiled")
    except ImportError:
        cy = None
        print("compiled backend not built; timing pure python only")

    rows = []
    for name, fn in workloads():
        t_py = timeit(lambda: fn(py), args.repeats)
        if cy is not None:
            t_cy = timeit(lambda: fn(cy), args.repeats)
            rows.append((name, t_py, t_cy, t_py / t_cy))
        else:
            rows.append((name, t_py, None, None))

    w = max(len(r[0]) for r in rows)
    print(f"{'kernel'.ljust(w)}  {'python':>10}  {'compiled':>10}  {'speedup':>8}")
    for name, t_py, t_cy, sp in rows:
        if t_cy is None:
            print(f"{name.ljust(w)}  {t_py * 1e3:9.2f}ms  {'-':>10}  {'-':>8}")
        else:
            print(f"{name.ljust(w)}  {t_py * 1e3:9.2f}ms  {t_cy * 1e3:9.2f}ms  "
                  f"{sp:7.1f}x")


if __name__ == "__main__":
    main()
