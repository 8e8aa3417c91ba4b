"""Run records: configuration snapshot, metric trace and final archives."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .core import Archive, InvalidInputError
from .metrics import MetricReport, assess
from .problems import Problem, hv_reference_point, sample_reference_front

RECORD_VERSION = 1


def _encode_float(v: float) -> float | str:
    return v if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))


def _decode_float(v) -> float:
    return float(v)


@dataclass
class RunRecord:
    algorithm: str
    problem: dict[str, Any]
    config: dict[str, Any]
    seed: int | None
    trace: list[dict[str, float]] = field(default_factory=list)
    final_ca: Archive | None = None
    final_da: Archive | None = None
    wall_clock: float = 0.0

    @property
    def final_metrics(self) -> MetricReport:
        last = self.trace[-1]
        return MetricReport(last["igd"], last["hv"], int(last["feasible_count"]), self.seed,
                            int(last["evaluations"]), last.get("hv_normalized", math.nan))

    def to_dict(self) -> dict[str, Any]:
        def arch(a: Archive | None):
            if a is None:
                return None
            return {"capacity": a.capacity, "X": a.X.tolist(), "F": a.F.tolist(), "G": a.G.tolist()}

        return {
            "version": RECORD_VERSION,
            "algorithm": self.algorithm,
            "problem": self.problem,
            "config": self.config,
            "seed": self.seed,
            "trace": [{k: _encode_float(float(v)) for k, v in row.items()} for row in self.trace],
            "final_ca": arch(self.final_ca),
            "final_da": arch(self.final_da),
            "wall_clock": self.wall_clock,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunRecord:
        if data.get("version") != RECORD_VERSION:
            raise InvalidInputError(f"unsupported run record version {data.get('version')!r}")

        def arch(d):
            if d is None:
                return None
            n_rows = len(d["X"])
            G = np.asarray(d["G"], dtype=float).reshape(n_rows, -1)
            return Archive(np.asarray(d["X"], float).reshape(n_rows, -1),
                           np.asarray(d["F"], float).reshape(n_rows, -1), G, capacity=d["capacity"])

        trace = [{k: _decode_float(v) for k, v in row.items()} for row in data["trace"]]
        return cls(data["algorithm"], data["problem"], data["config"], data["seed"], trace,
                   arch(data["final_ca"]), arch(data["final_da"]), data.get("wall_clock", 0.0))

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=1), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> RunRecord:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def same_outcome(self, other: RunRecord) -> bool:
        """Equality ignoring wall-clock time."""
        a, b = self.to_dict(), other.to_dict()
        a.pop("wall_clock")
        b.pop("wall_clock")
        return a == b


def problem_snapshot(problem: Problem) -> dict[str, Any]:
    return {"name": problem.name, "m": problem.m, "n": problem.n, "params": dict(problem.params)}


class Tracer:
    """Records indicator snapshots of the reported set at a fixed generation cadence."""

    def __init__(self, problem: Problem, interval: int = 10, reference_front=None, enabled: bool = True):
        self.interval = max(int(interval), 1)
        self.enabled = enabled
        self.rows: list[dict[str, float]] = []
        if enabled:
            self.front = sample_reference_front(problem) if reference_front is None else reference_front
            self.zr = hv_reference_point(problem)

    def snapshot(self, generation: int, evaluations: int, reported: Archive, force: bool = False) -> None:
        if self.rows and self.rows[-1]["evaluations"] == evaluations:
            return
        if not force and generation % self.interval:
            return
        feasible = int(reported.feasible.sum())
        if self.enabled:
            rep = assess(reported.F, reported.cv, self.front, self.zr)
            igd_value, hv_value, hv_norm = rep.igd, rep.hv, rep.hv_normalized
        else:
            igd_value, hv_value, hv_norm = math.nan, math.nan, math.nan
        self.rows.append({
            "generation": generation,
            "evaluations": evaluations,
            "feasible_count": feasible,
            "igd": igd_value,
            "hv": hv_value,
            "hv_normalized": hv_norm,
        })
