"""Command-line interface.

Subcommands: build, eval, loss, dp, compare, gen.  All non-timing output
is deterministic given --seed; timing lines are prefixed with '#' and
excluded from that contract.  Failure classes map to distinct exit codes:
parse=2, bounds=3, parameter=4, size-guard=5, validation/other=6.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import io as sio
from .builder import CoresetConfig, build_coreset
from .errors import (
    BoundsError,
    DimensionError,
    ParameterError,
    ParseError,
    SegCoresetError,
    SizeGuardError,
)
from .grid import PrefixStats
from .oracle import optimal_ktree, piecewise_signal, random_ktree, random_sample_estimator
from .query import evaluate_loss
from .segmentation import count_leaves, exact_loss, ktree_to_segmentation

_EXIT_CODES = (
    (ParseError, 2),
    (BoundsError, 3),
    (ParameterError, 4),
    (SizeGuardError, 5),
    (SegCoresetError, 6),
)


_ALPHA_CHOICES = {
    "klogn": None,  # module default: k * log2(N)
    "one": lambda k, n: 1.0,  # sigma = rough-fit loss itself
}


def _bicriteria_cfg(alpha: str):
    from .bicriteria import BicriteriaConfig

    f = _ALPHA_CHOICES[alpha]
    return BicriteriaConfig() if f is None else BicriteriaConfig(alpha_formula=f)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _report(pairs):
    for key, v in pairs:
        print(f"{key} {_fmt(v)}")


def cmd_build(args) -> int:
    signal = sio.ingest(args.input)
    cfg = CoresetConfig(
        k=args.k, eps=args.eps, mode=args.mode, gamma_override=args.gamma,
        bicriteria_cfg=_bicriteria_cfg(args.alpha),
    )
    t0 = time.perf_counter()
    coreset = build_coreset(signal, cfg)
    build_ms = (time.perf_counter() - t0) * 1e3
    sio.save_coreset(coreset, args.out)
    _report([
        ("size", coreset.size),
        ("size_ratio", coreset.size_ratio),
        ("sigma", coreset.sigma),
        ("gamma", coreset.gamma),
        ("blocks", len(coreset.blocks)),
    ])
    print(f"# build_ms {build_ms:.1f}")
    for w in coreset.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    coreset = sio.load_coreset(args.coreset)
    tree, n, m = sio.load_tree(args.tree)
    seg = ktree_to_segmentation(tree, n, m)
    report = evaluate_loss(coreset, seg)
    _report([
        ("loss_estimate", report.loss_estimate),
        ("blocks_intersected", report.blocks_intersected),
        ("blocks_exact", report.blocks_exact),
    ])
    if report.over_budget:
        print("over_budget 1")
    return 0


def cmd_loss(args) -> int:
    signal = sio.ingest(args.input)
    tree, n, m = sio.load_tree(args.tree)
    if (n, m) != (signal.n, signal.m):
        raise DimensionError(
            f"tree grid {n}x{m} != signal {signal.n}x{signal.m}"
        )
    seg = ktree_to_segmentation(tree, n, m)
    _report([("loss", exact_loss(signal, seg))])
    return 0


def cmd_dp(args) -> int:
    signal = sio.ingest(args.input)
    tree, loss = optimal_ktree(signal, args.k, max_cells=args.max_cells)
    print(json.dumps(sio.tree_to_doc(tree, signal.n, signal.m), indent=1))
    _report([("loss", loss), ("leaves", count_leaves(tree))])
    return 0


def cmd_gen(args) -> int:
    signal = piecewise_signal(args.n, args.m, args.pieces, args.noise, args.seed)
    sio.write_signal_csv(signal, args.out)
    _report([("written", args.out), ("n", args.n), ("m", args.m)])
    return 0


def _rel_err(est: float, exact: float) -> float:
    if exact == 0.0:
        return 0.0 if est == 0.0 else float("inf")
    return abs(est - exact) / exact


def cmd_compare(args) -> int:
    signal = sio.ingest(args.input)
    stats = PrefixStats(signal)
    eps_list = [float(e) for e in args.eps_list.split(",") if e]
    if not eps_list:
        raise ParameterError("--eps-list is empty")

    rng = np.random.default_rng(args.seed)
    budgets = 1 + rng.integers(args.k, size=args.queries)
    qseeds = rng.integers(2**63, size=args.queries)
    sample_seed = int(rng.integers(2**63))
    queries = [
        ktree_to_segmentation(
            random_ktree(signal.n, signal.m, int(b), int(s)), signal.n, signal.m
        )
        for b, s in zip(budgets, qseeds)
    ]
    exact = [exact_loss(signal, q, stats) for q in queries]

    header = ("eps", "blocks", "points", "ratio", "max_err", "med_err",
              "samp_max", "samp_med")
    rows = []
    timing = []
    for eps in eps_list:
        cfg = CoresetConfig(k=args.k, eps=eps, mode=args.mode,
                            gamma_override=args.gamma,
                            bicriteria_cfg=_bicriteria_cfg(args.alpha))
        t0 = time.perf_counter()
        coreset = build_coreset(signal, cfg, stats)
        build_ms = (time.perf_counter() - t0) * 1e3
        t0 = time.perf_counter()
        errs = [
            _rel_err(evaluate_loss(coreset, q).loss_estimate, e)
            for q, e in zip(queries, exact)
        ]
        query_us = (time.perf_counter() - t0) * 1e6 / max(1, len(queries))
        tau = min(coreset.size, signal.size)
        sample = random_sample_estimator(signal, tau, sample_seed)
        serrs = [_rel_err(sample.loss(q), e) for q, e in zip(queries, exact)]
        rows.append((
            f"{eps:g}", str(len(coreset.blocks)), str(coreset.size),
            f"{coreset.size_ratio:.4f}",
            f"{max(errs):.6f}", f"{float(np.median(errs)):.6f}",
            f"{max(serrs):.6f}", f"{float(np.median(serrs)):.6f}",
        ))
        timing.append((eps, build_ms, query_us))

    widths = [max(len(header[i]), max(len(r[i]) for r in rows))
              for i in range(len(header))]
    print("  ".join(h.rjust(w) for h, w in zip(header, widths)))
    for r in rows:
        print("  ".join(v.rjust(w) for v, w in zip(r, widths)))
    for eps, bms, qus in timing:
        print(f"# eps {eps:g} build_ms {bms:.1f} query_us {qus:.1f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="segcoreset",
        description="Coresets for piecewise-constant fitting of 2-D grids",
    )
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a coreset from a signal")
    b.add_argument("--input", required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--eps", type=float, required=True)
    b.add_argument("--mode", choices=("theory", "practical"), default="practical")
    b.add_argument("--gamma", type=float, default=None,
                   help="partition aggressiveness override (practical mode)")
    b.add_argument("--alpha", choices=sorted(_ALPHA_CHOICES), default="klogn",
                   help="scale normalizer: klogn = worst-case k*log2(N), "
                        "one = use the rough-fit loss directly")
    b.add_argument("--seed", type=int, default=0,
                   help="accepted for interface uniformity; the build is deterministic")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("eval", help="estimate a tree's loss from a coreset")
    e.add_argument("--coreset", required=True)
    e.add_argument("--tree", required=True)
    e.set_defaults(func=cmd_eval)

    l = sub.add_parser("loss", help="exact loss of a tree on a signal")
    l.add_argument("--input", required=True)
    l.add_argument("--tree", required=True)
    l.set_defaults(func=cmd_loss)

    d = sub.add_parser("dp", help="exact optimal tree by dynamic programming")
    d.add_argument("--input", required=True)
    d.add_argument("--k", type=int, required=True)
    d.add_argument("--max-cells", type=int, default=4096)
    d.set_defaults(func=cmd_dp)

    c = sub.add_parser("compare", help="coreset vs uniform-sample error table")
    c.add_argument("--input", required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--eps-list", required=True)
    c.add_argument("--queries", type=int, default=50)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--mode", choices=("theory", "practical"), default="practical")
    c.add_argument("--gamma", type=float, default=None)
    c.add_argument("--alpha", choices=sorted(_ALPHA_CHOICES), default="klogn")
    c.set_defaults(func=cmd_compare)

    g = sub.add_parser("gen", help="seeded piecewise-constant + noise generator")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--pieces", type=int, required=True)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SegCoresetError as e:
        for cls, code in _EXIT_CODES:
            if isinstance(e, cls):
                print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
