"""Command-line entry point: ``lisr quadratic ...`` / ``lisr logistic ...``."""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import ExperimentConfig, run_experiment
from .solvers import METHODS

logger = logging.getLogger("lisr")


def _on_off(value):
    v = value.lower()
    if v not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return v == "on"


def _methods(value):
    names = tuple(m.strip() for m in value.split(",") if m.strip())
    bad = [m for m in names if m not in METHODS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"methods must be a comma list from {','.join(METHODS)}")
    return names


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="number of components")
    common.add_argument("--d", type=int, help="dimension")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--methods", type=_methods, default=("lisr1", "lisrk", "iqn"))
    common.add_argument("--k", type=int, default=5, help="block size for lisrk")
    common.add_argument("--mode", choices=("eager", "lazy"), default="lazy")
    common.add_argument("--max-passes", type=int, default=50)
    common.add_argument("--tol", type=float, default=1e-10, help="stop at this normalized error")
    common.add_argument("--out", help="CSV output path")
    common.add_argument("--plot", help="write a matplotlib script for the CSV here")
    common.add_argument("--x0", choices=("zero", "random"), default="zero")
    common.add_argument("--scaling", type=_on_off, default=None,
                        help="per-cycle estimator scaling; default on iff M > 0")
    common.add_argument("--r0", type=float, help="bound on ||x0 - x*|| used by the scaling")
    common.add_argument("--rho", type=float, help="scaling decay in (0, 1 - k/d)")
    common.add_argument("--timing", type=_on_off, default=False,
                        help="write wall-clock seconds to the CSV (off keeps output reproducible)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lisr", description="Incremental SR1/SR-k quasi-Newton experiments")
    sub = parser.add_subparsers(dest="problem", required=True)
    q = sub.add_parser("quadratic", parents=[common], help="random diagonal quadratic")
    q.add_argument("--xi", type=float, default=4.0, help="conditioning exponent")
    lg = sub.add_parser("logistic", parents=[common], help="regularized logistic regression")
    lg.add_argument("--data", help="LIBSVM file; omit for a synthetic instance")
    lg.add_argument("--lambda", dest="lam", type=float, default=1e-3)
    return parser


def config_from_args(args) -> ExperimentConfig:
    if args.problem == "quadratic":
        problem, n, d = "quadratic", args.n or 50, args.d or 20
        extra = dict(xi=args.xi)
    else:
        problem = "logistic" if args.data else "synthetic-logistic"
        n, d = args.n or 200, args.d or 30
        extra = dict(data=args.data, lam=args.lam)
    return ExperimentConfig(
        problem=problem, n=n, d=d, seed=args.seed, methods=args.methods, k=args.k,
        mode=args.mode, max_passes=args.max_passes, tol=args.tol, x0=args.x0,
        scaling=args.scaling, r0=args.r0, rho=args.rho, out=args.out, plot=args.plot,
        timing=args.timing, **extra,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        result = run_experiment(cfg, raise_errors=False)
    except (ValueError, OSError) as exc:
        print(f"lisr: error: {exc}", file=sys.stderr)
        return 2
    for label, recs in result.records.items():
        last = recs[-1]
        print(f"{label:<12} passes={last.pass_index:<4d} normalized_error={last.normalized_error:.3e} "
              f"skipped={last.skipped_updates}")
    for label, exc in result.errors.items():
        print(f"{label:<12} FAILED: {exc}", file=sys.stderr)
    if cfg.out:
        logger.info("wrote %s", cfg.out)
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())
