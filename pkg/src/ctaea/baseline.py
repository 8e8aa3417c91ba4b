"""Feasibility-driven reference optimiser.

A generational NSGA-II-style loop in which Pareto dominance is replaced by
constrained dominance: any feasible solution beats any infeasible one, and
infeasible solutions are ordered by CV alone. It stands in for the family of
feasibility-first methods that get trapped on outer feasible boundaries.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import Archive, InvalidConfigError, make_rng
from .decomposition import generate_weights
from .problems import Problem
from .ranking import constrained_dominance_matrix, sort_by_matrix
from .record import RunRecord, Tracer, problem_snapshot
from .variation import VariationParams, polynomial_mutation, sbx


@dataclass(frozen=True)
class BaselineConfig:
    pop_size: int | None = None  # None: same N as the weight set for m objectives
    offspring_size: int | None = None
    max_evaluations: int = 300_000
    variation: VariationParams = field(default_factory=VariationParams)
    weight_resolution: int | tuple[int, int] | None = None
    metric_interval: int = 10
    record_metrics: bool = True

    def population(self, m: int) -> int:
        if self.pop_size is not None:
            return self.pop_size
        return len(generate_weights(m, self.weight_resolution))

    def as_dict(self) -> dict:
        d = asdict(self)
        if isinstance(d["weight_resolution"], tuple):
            d["weight_resolution"] = list(d["weight_resolution"])
        return d


def crowding_distance(F: np.ndarray) -> np.ndarray:
    """NSGA-II crowding distance; boundary points get ``inf``."""
    k, m = F.shape
    dist = np.zeros(k)
    if k <= 2:
        dist[:] = np.inf
        return dist
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        col = F[order, j]
        span = col[-1] - col[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def rank_and_crowding(pop: Archive) -> tuple[np.ndarray, np.ndarray]:
    fronts = sort_by_matrix(constrained_dominance_matrix(pop.F, pop.cv))
    rank = fronts.rank()
    crowd = np.empty(len(pop))
    for level in fronts:
        crowd[level] = crowding_distance(pop.F[level])
    return rank, crowd


def environmental_selection(pop: Archive, size: int) -> Archive:
    """Keep ``size`` members by constrained levels, truncating the last by crowding."""
    fronts = sort_by_matrix(constrained_dominance_matrix(pop.F, pop.cv))
    keep: list[np.ndarray] = []
    total = 0
    for level in fronts:
        if total + len(level) <= size:
            keep.append(level)
            total += len(level)
            if total == size:
                break
            continue
        crowd = crowding_distance(pop.F[level])
        order = np.argsort(-crowd, kind="stable")
        keep.append(level[order[: size - total]])
        break
    return pop.take(np.sort(np.concatenate(keep)), size)


def _binary_tournament(rank: np.ndarray, crowd: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    size = len(rank)
    a = rng.integers(0, size, count)
    b = rng.integers(0, size - 1, count)
    b = b + (b >= a)
    coin = rng.random(count) < 0.5
    pick_a = np.where(
        rank[a] != rank[b],
        rank[a] < rank[b],
        np.where(crowd[a] != crowd[b], crowd[a] > crowd[b], coin),
    )
    return np.where(pick_a, a, b)


def run_baseline(problem: Problem, config: BaselineConfig, rng: np.random.Generator | int,
                 reference_front=None) -> RunRecord:
    """Run the feasibility-driven baseline; the reported set is the final population.

    Random stream order: initial sample, then per generation the parent-1
    tournaments, parent-2 tournaments, SBX draws and mutation draws.
    """
    seed = None
    if not isinstance(rng, np.random.Generator):
        seed = int(rng)
        rng = make_rng(seed)
    started = time.perf_counter()
    n_pop = config.population(problem.m)
    batch = n_pop if config.offspring_size is None else config.offspring_size
    if n_pop < 2 or not 1 <= batch <= n_pop:
        raise InvalidConfigError(f"invalid population {n_pop} / offspring batch {batch}")
    if config.max_evaluations < n_pop:
        raise InvalidConfigError(f"max_evaluations must cover initialisation ({n_pop})")
    lo, up = problem.lower, problem.upper

    X = lo + rng.random((n_pop, problem.n)) * (up - lo)
    F, G = problem.evaluate_batch(X)
    pop = Archive(X, F, G, capacity=n_pop)
    used = n_pop
    generation = 0
    tracer = Tracer(problem, config.metric_interval, reference_front, enabled=config.record_metrics)
    tracer.snapshot(0, used, pop, force=True)
    while used < config.max_evaluations:
        count = min(batch, config.max_evaluations - used)
        rank, crowd = rank_and_crowding(pop)
        i1 = _binary_tournament(rank, crowd, count, rng)
        i2 = _binary_tournament(rank, crowd, count, rng)
        child, _ = sbx(pop.X[i1], pop.X[i2], config.variation, lo, up, rng)
        Xo = polynomial_mutation(child, config.variation, lo, up, rng)
        Fo, Go = problem.evaluate_batch(Xo)
        pop = environmental_selection(pop.concat(Archive(Xo, Fo, Go)), n_pop)
        used += count
        generation += 1
        tracer.snapshot(generation, used, pop)
    tracer.snapshot(generation, used, pop, force=True)
    return RunRecord("baseline", problem_snapshot(problem), config.as_dict(), seed, tracer.rows,
                     pop, None, time.perf_counter() - started)
