"""Command line entry point: ``ncsvm run --data votes.csv --out results/``."""

from __future__ import annotations

import argparse
import logging
import sys

from .baselines import LINF_MEASURES, GridSpec
from .harness import STRATEGIES, ExperimentConfig, emit_report, parse_grid_file, run_experiment, summary_line


def _strategies(text: str) -> tuple:
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in items if s not in STRATEGIES]
    if not items or bad:
        raise argparse.ArgumentTypeError(
            f"strategies must be a comma list drawn from {','.join(STRATEGIES)}")
    return items


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncsvm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the outer-fold model selection experiment")
    run.add_argument("--data", required=True, help="dataset in canonical CSV format")
    run.add_argument("--strategies", type=_strategies, default=STRATEGIES,
                     help="comma list of nonconformity,cv,linf (default: all)")
    run.add_argument("--seed", type=_seed, default=0)
    run.add_argument("--delta", type=float, default=0.05, help="confidence parameter of the bound")
    run.add_argument("--folds", type=int, default=10, help="outer folds")
    run.add_argument("--inner-folds", type=int, default=10, help="cross-validation folds")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--grid", help="key=value file with C and gamma lists")
    run.add_argument("--jobs", type=int, default=1, help="worker threads for model training")
    run.add_argument("--tol", type=float, default=1e-3, help="SMO KKT tolerance")
    run.add_argument("--linf-measure", choices=LINF_MEASURES, default="geometric",
                     help="distance used by the max-distance baseline")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s",
                        level=logging.INFO if args.verbose else logging.WARNING)
    try:
        grid = parse_grid_file(args.grid) if args.grid else GridSpec()
        config = ExperimentConfig(data_path=args.data, grid=grid, outer_folds=args.folds,
                                  inner_cv_folds=args.inner_folds, delta=args.delta,
                                  seed=args.seed, strategies=args.strategies,
                                  jobs=max(1, args.jobs), tol=args.tol,
                                  linf_measure=args.linf_measure)
        report = run_experiment(config)
        written = emit_report(report, args.out, "json") + emit_report(report, args.out, "csv")
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"ncsvm: error: {exc}", file=sys.stderr)
        return 1
    print(summary_line(report))
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
