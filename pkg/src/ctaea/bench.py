"""Seeded batch experiments: configuration, execution, persistence and summaries.

Layout of an experiment directory::

    <out>/experiment.json             resolved configuration
    <out>/<algorithm>/seed-0001.json  one run record per seed
    <out>/<algorithm>/seed-0001.failed.json  error report of a failed run
    <out>/summary.csv                 median / IQR per algorithm plus rank-sum marks
"""

from __future__ import annotations

import csv
import json
import logging
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .baseline import BaselineConfig, run_baseline
from .core import InvalidConfigError, InvalidInputError
from .metrics import NOT_SIGNIFICANT, SIGNIFICANT_A, summarize, wilcoxon_rank_sum
from .optimizer import CtaeaConfig, run
from .problems import ReferenceFront, make_problem, sample_reference_front
from .record import RunRecord
from .variation import VariationParams

log = logging.getLogger(__name__)

ALGORITHMS = ("ctaea", "ctaea-variant-1", "ctaea-variant-2", "baseline")
WORKERS_ENV = "CTAEA_WORKERS"
SUMMARY_FILE = "summary.csv"
EXPERIMENT_FILE = "experiment.json"
MIN_TEST_RUNS = 5

_VARIANTS = {"ctaea": "full", "ctaea-variant-1": "variant-1", "ctaea-variant-2": "variant-2"}


def parse_seeds(text: str) -> tuple[int, ...]:
    """Parse ``"1-11"``, ``"3,5,8"`` or a mix such as ``"1-3,10"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        try:
            seeds.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
        except ValueError as exc:
            raise InvalidConfigError(f"cannot parse seed list {text!r}") from exc
    return tuple(seeds)


@dataclass(frozen=True)
class ExperimentConfig:
    """One problem, one or more algorithms, a list of seeds.

    With two or more algorithms the first one is the reference every other
    algorithm is tested against.
    """

    problem: str
    m: int = 3
    problem_params: dict[str, float] = field(default_factory=dict)
    algorithms: tuple[str, ...] = ("ctaea",)
    pop_size: int | None = None
    max_evaluations: int = 300_000
    seeds: tuple[int, ...] = tuple(range(1, 12))
    out: Path = Path("results")
    metric_interval: int = 10
    record_metrics: bool = True
    variation: VariationParams = field(default_factory=VariationParams)

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "out", Path(self.out))
        if not self.seeds:
            raise InvalidConfigError("seed list must not be empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise InvalidConfigError(f"seed list has duplicates: {self.seeds}")
        if not self.algorithms:
            raise InvalidConfigError("at least one algorithm is required")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise InvalidConfigError(f"unknown algorithm(s) {unknown}; expected {ALGORITHMS}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise InvalidConfigError("algorithms must not repeat")
        make_problem(self.problem, self.m, **self.problem_params)  # fail early on bad problems

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        data = dict(data)
        if "algorithm" in data:
            data["algorithms"] = [data.pop("algorithm")]
        if isinstance(data.get("seeds"), str):
            data["seeds"] = parse_seeds(data["seeds"])
        if isinstance(data.get("variation"), dict):
            data["variation"] = VariationParams(**data["variation"])
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise InvalidConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentConfig:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["algorithms"] = list(self.algorithms)
        d["seeds"] = list(self.seeds)
        d["out"] = str(self.out)
        return d

    def with_overrides(self, **overrides) -> ExperimentConfig:
        """Copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def record_path(self, algorithm: str, seed: int, failed: bool = False) -> Path:
        suffix = ".failed.json" if failed else ".json"
        return self.out / algorithm / f"seed-{seed:04d}{suffix}"


def _optimizer_config(config: ExperimentConfig, algorithm: str):
    common = dict(pop_size=config.pop_size, max_evaluations=config.max_evaluations,
                  variation=config.variation, metric_interval=config.metric_interval,
                  record_metrics=config.record_metrics)
    if algorithm == "baseline":
        return BaselineConfig(**common)
    return CtaeaConfig(variant=_VARIANTS[algorithm], **common)


def run_single(config: ExperimentConfig, algorithm: str, seed: int,
               reference_front: ReferenceFront | None = None) -> RunRecord:
    """One seeded run of ``algorithm`` on the configured problem."""
    problem = make_problem(config.problem, config.m, **config.problem_params)
    opt_config = _optimizer_config(config, algorithm)
    if algorithm == "baseline":
        return run_baseline(problem, opt_config, seed, reference_front=reference_front)
    return run(problem, opt_config, seed, reference_front=reference_front)


def _task(args) -> tuple[str, int, RunRecord | None, str | None]:
    config, algorithm, seed, front = args
    try:
        return algorithm, seed, run_single(config, algorithm, seed, front), None
    except Exception:  # a crashing run is reported, not fatal to the batch
        return algorithm, seed, None, traceback.format_exc()


def worker_count(tasks: int) -> int:
    """Worker processes: ``$CTAEA_WORKERS`` if set, else the CPU count, at most ``tasks``."""
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise InvalidConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
        if n < 1:
            raise InvalidConfigError(f"{WORKERS_ENV} must be at least 1")
    else:
        n = os.cpu_count() or 1
    return max(1, min(n, tasks))


@dataclass
class BatchSummary:
    rows: list[dict[str, Any]]
    records: dict[str, list[RunRecord]]
    failures: list[tuple[str, int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def row(self, algorithm: str) -> dict[str, Any]:
        for r in self.rows:
            if r["algorithm"] == algorithm:
                return r
        raise KeyError(algorithm)


SUMMARY_COLUMNS = ("problem", "m", "algorithm", "runs", "igd_median", "igd_iqr", "hv_median", "hv_iqr",
                   "hv_normalized_median", "hv_normalized_iqr", "feasible_median", "feasible_iqr",
                   "igd_vs_reference", "hv_vs_reference")


def _mark(reference: Sequence[float], other: Sequence[float], minimize: bool) -> str:
    """Rank-sum verdict phrased from the reference algorithm's point of view."""
    if len(reference) < MIN_TEST_RUNS or len(other) < MIN_TEST_RUNS:
        return "insufficient_runs"
    outcome = wilcoxon_rank_sum(reference, other, minimize=minimize)
    if outcome == NOT_SIGNIFICANT:
        return "not_significant"
    return "reference_better" if outcome == SIGNIFICANT_A else "reference_worse"


def summarize_records(problem: str, m: int, algorithms: Sequence[str],
                      records: dict[str, list[RunRecord]]) -> list[dict[str, Any]]:
    """Summary rows in ``algorithms`` order; the first algorithm is the reference."""
    rows: list[dict[str, Any]] = []
    reports = {a: [r.final_metrics for r in sorted(records.get(a, []), key=lambda r: r.seed)]
               for a in algorithms}
    ref = algorithms[0]
    for algorithm in algorithms:
        runs = reports[algorithm]
        row: dict[str, Any] = {"problem": problem, "m": m, "algorithm": algorithm, "runs": len(runs)}
        if runs:
            s = summarize(runs)
            row.update({f"{k}_{stat}": s[k][stat] for k in ("igd", "hv", "hv_normalized")
                        for stat in ("median", "iqr")})
            row.update({"feasible_median": s["feasible_count"]["median"],
                        "feasible_iqr": s["feasible_count"]["iqr"]})
        else:
            row.update({c: float("nan") for c in SUMMARY_COLUMNS[4:12]})
        if algorithm == ref:
            row["igd_vs_reference"] = row["hv_vs_reference"] = ""
        else:
            row["igd_vs_reference"] = _mark([r.igd for r in reports[ref]], [r.igd for r in runs], True)
            row["hv_vs_reference"] = _mark([r.hv for r in reports[ref]], [r.hv for r in runs], False)
        rows.append(row)
    return rows


def write_summary(rows: list[dict[str, Any]], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in (row[c] for c in SUMMARY_COLUMNS)])
    return path


def read_summary(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def run_experiment(config: ExperimentConfig) -> BatchSummary:
    """Run every (algorithm, seed) pair, persist records and write the summary table.

    Runs execute on a process pool; the parent is the only writer. A run that
    raises is logged, saved as an error report and left out of the statistics.
    """
    problem = make_problem(config.problem, config.m, **config.problem_params)
    front = sample_reference_front(problem) if config.record_metrics else None
    try:
        config.out.mkdir(parents=True, exist_ok=True)
        (config.out / EXPERIMENT_FILE).write_text(json.dumps(config.to_dict(), indent=1), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write to output directory {config.out}: {exc}") from exc

    tasks = [(config, a, s, front) for a in config.algorithms for s in config.seeds]
    workers = worker_count(len(tasks))
    log.info("running %d runs of %s (m=%d) on %d worker(s)", len(tasks), config.problem, config.m, workers)
    if workers == 1:
        results = map(_task, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_task, tasks)

    records: dict[str, list[RunRecord]] = {a: [] for a in config.algorithms}
    failures: list[tuple[str, int, str]] = []
    try:
        for algorithm, seed, record, error in results:
            if record is None:
                log.warning("run %s seed %d failed and is excluded from the summary:\n%s", algorithm, seed, error)
                failures.append((algorithm, seed, error))
                config.record_path(algorithm, seed, failed=True).parent.mkdir(parents=True, exist_ok=True)
                config.record_path(algorithm, seed, failed=True).write_text(
                    json.dumps({"algorithm": algorithm, "seed": seed, "error": error}, indent=1), encoding="utf-8")
                continue
            record.save(config.record_path(algorithm, seed))
            records[algorithm].append(record)
            log.info("%s seed %d: IGD %.4g HV %.4g", algorithm, seed, record.final_metrics.igd,
                     record.final_metrics.hv)
    finally:
        if workers > 1:
            pool.shutdown()

    rows = summarize_records(problem.name, config.m, config.algorithms, records)
    write_summary(rows, config.out / SUMMARY_FILE)
    return BatchSummary(rows, records, failures)


def load_records(out: str | Path) -> tuple[ExperimentConfig, dict[str, list[RunRecord]]]:
    """Configuration and successful run records persisted under ``out``."""
    out = Path(out)
    config_path = out / EXPERIMENT_FILE
    if not config_path.exists():
        raise InvalidInputError(f"{out} is not an experiment directory (missing {EXPERIMENT_FILE})")
    config = ExperimentConfig.from_file(config_path)
    records: dict[str, list[RunRecord]] = {}
    for algorithm in config.algorithms:
        found = []
        for path in sorted((out / algorithm).glob("seed-*.json")):
            if path.name.endswith(".failed.json"):
                log.warning("skipping failed run %s", path)
                continue
            found.append(RunRecord.load(path))
        records[algorithm] = found
    return config, records


def summarize_directory(out: str | Path, write: bool = False) -> list[dict[str, Any]]:
    """Recompute the summary rows from the records persisted under ``out``."""
    config, records = load_records(out)
    problem = make_problem(config.problem, config.m, **config.problem_params)
    rows = summarize_records(problem.name, config.m, config.algorithms, records)
    if write:
        write_summary(rows, Path(out) / SUMMARY_FILE)
    return rows


def _write_archive_csv(archive, path: Path) -> Path:
    m = archive.F.shape[1]
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j + 1}" for j in range(m)] + ["cv"])
        for f, cv in zip(archive.F.tolist(), archive.cv.tolist()):
            writer.writerow([repr(v) for v in f] + [repr(cv)])
    return path


def emit_scatter(record: RunRecord, target: str | Path) -> list[Path]:
    """Write the final CA as ``f1..fm,cv`` rows to ``target`` and the DA alongside it.

    The DA file is ``<stem>-da<suffix>`` next to ``target``; records without a
    DA (the baseline) produce only the first file.
    """
    target = Path(target)
    if record.final_ca is None:
        raise InvalidInputError("record has no final archive")
    paths = [_write_archive_csv(record.final_ca, target)]
    if record.final_da is not None:
        paths.append(_write_archive_csv(record.final_da, target.with_name(f"{target.stem}-da{target.suffix}")))
    return paths


def read_scatter(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Objectives and CV column of a scatter CSV."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, :-1], data[:, -1]
