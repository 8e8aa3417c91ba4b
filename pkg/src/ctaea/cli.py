"""Command-line entry point.

Examples::

    ctaea run --problem c1-dtlz3 --algorithm ctaea --algorithm baseline --seeds 1-11 --out results/c1
    ctaea run --config experiment.json --max-evals 50000
    ctaea summarize results/c1
    ctaea scatter results/c1/ctaea/seed-0001.json c1-seed1.csv
    ctaea front c2-dtlz2 --m 3 --out front.csv
    ctaea weights --m 5 --out weights.csv
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import (
    ALGORITHMS,
    SUMMARY_COLUMNS,
    ExperimentConfig,
    emit_scatter,
    parse_seeds,
    run_experiment,
    summarize_directory,
)
from .core import InvalidConfigError, InvalidInputError, UnsupportedProblemError
from .decomposition import generate_weights
from .problems import make_problem, sample_reference_front
from .record import RunRecord

log = logging.getLogger("ctaea")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctaea", description="Two-archive constrained multi-objective optimiser")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every finished run")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a seeded batch and write records plus summary.csv")
    run_p.add_argument("--config", type=Path, help="JSON experiment file; flags below override it")
    run_p.add_argument("--problem")
    run_p.add_argument("--m", type=int)
    run_p.add_argument("--algorithm", action="append", choices=ALGORITHMS,
                       help="repeat to compare; the first is the reference")
    run_p.add_argument("--pop-size", type=int)
    run_p.add_argument("--max-evals", type=int)
    run_p.add_argument("--seeds", help='e.g. "1-11" or "1,4,9"')
    run_p.add_argument("--out", type=Path)
    run_p.add_argument("--metric-interval", type=int, help="generations between trace snapshots")

    sum_p = sub.add_parser("summarize", help="recompute summary.csv from persisted records")
    sum_p.add_argument("directory", type=Path)

    sc_p = sub.add_parser("scatter", help="write final CA/DA objectives of a record as CSV")
    sc_p.add_argument("record", type=Path)
    sc_p.add_argument("target", type=Path)

    fr_p = sub.add_parser("front", help="sample a reference front as CSV")
    fr_p.add_argument("problem")
    fr_p.add_argument("--m", type=int, default=3)
    fr_p.add_argument("--count", type=int, default=10_000)
    fr_p.add_argument("--out", type=Path, required=True)

    w_p = sub.add_parser("weights", help="write the default weight vectors for m objectives")
    w_p.add_argument("--m", type=int, required=True)
    w_p.add_argument("--out", type=Path, required=True)
    return parser


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = dict(
        problem=args.problem,
        m=args.m,
        algorithms=tuple(args.algorithm) if args.algorithm else None,
        pop_size=args.pop_size,
        max_evaluations=args.max_evals,
        seeds=parse_seeds(args.seeds) if args.seeds else None,
        out=args.out,
        metric_interval=args.metric_interval,
    )
    if args.config is not None:
        return ExperimentConfig.from_file(args.config).with_overrides(**overrides)
    if args.problem is None:
        raise InvalidConfigError("--problem is required without --config")
    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def _print_rows(rows) -> None:
    cols = [c for c in SUMMARY_COLUMNS if c not in ("problem", "m")]
    print("\t".join(cols))
    for row in rows:
        print("\t".join(f"{row[c]:.4g}" if isinstance(row[c], float) else str(row[c]) for c in cols))


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            summary = run_experiment(_experiment_config(args))
            _print_rows(summary.rows)
            if not summary.ok:
                log.error("%d run(s) failed", len(summary.failures))
                return 1
        elif args.command == "summarize":
            _print_rows(summarize_directory(args.directory, write=True))
        elif args.command == "scatter":
            for path in emit_scatter(RunRecord.load(args.record), args.target):
                print(path)
        elif args.command == "front":
            problem = make_problem(args.problem, args.m)
            sample_reference_front(problem, args.count).to_csv(args.out)
            print(args.out)
        elif args.command == "weights":
            generate_weights(args.m).to_csv(args.out)
            print(args.out)
    except (InvalidConfigError, InvalidInputError, UnsupportedProblemError, OSError) as exc:
        log.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
