"""Two-archive evolutionary algorithm for constrained multi-objective problems.

Two archives of equal size N co-evolve. The convergence archive (CA) is
feasibility-first and keeps the population pushing toward the constrained
front; the diversity archive (DA) ignores constraints entirely and fills the
subregions the CA leaves thin. Parents are drawn from both archives in
proportion to how many non-dominated members each contributes.

Random stream order per generation: mating-source uniforms (two blocks for
``variant-2``, one otherwise), tournament draws for all first parents (CA batch
then DA batch), the same for second parents, SBX draws, mutation draws.
Random tie-breaking among equally crowded subregions, when enabled, draws
inside the CA update.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .core import Archive, InvalidConfigError, InvalidInputError, Solution, make_rng
from .decomposition import (
    NormalizationBounds,
    WeightVectorSet,
    associate_normalized,
    SCALING_RULES,
    generate_weights,
    normalize,
    pairwise_distances,
    scaling_bounds,
    tchebycheff,
    update_bounds,
)
from .problems import Problem
from .record import RunRecord, Tracer, problem_snapshot
from .ranking import dominance_matrix, sort_by_matrix
from .variation import VariationParams, polynomial_mutation, sbx

VARIANTS = ("full", "variant-1", "variant-2")


@dataclass(frozen=True)
class CtaeaConfig:
    """Run configuration.

    Attributes:
        pop_size: archive size N; must match the number of weight vectors when
            given, ``None`` takes it from the weights.
        offspring_size: offspring per generation, ``None`` means N.
        weight_resolution: lattice parameter(s) for the weight set.
        variant: ``"full"``, ``"variant-1"`` (CA deletes the worst Tchebycheff
            value of the crowded subregion, ignoring local distance) or
            ``"variant-2"`` (both parents from CA or DA with probability 1/2).
        association: ``"angle"`` or ``"perpendicular"``.
        scaling: objective scaling before association and Tchebycheff
            values, ``"ideal"`` (translate by the ideal point) or
            ``"minmax"`` (also divide by the nadir-ideal span).
        random_crowding_ties: break equal subregion counts randomly instead of
            by lowest index.
        da_overshoot: run DA filling rounds to completion instead of stopping
            at N; the DA may then exceed N.
    """

    pop_size: int | None = None
    offspring_size: int | None = None
    max_evaluations: int = 300_000
    variation: VariationParams = field(default_factory=VariationParams)
    variant: str = "full"
    association: str = "angle"
    scaling: str = "ideal"
    weight_resolution: int | tuple[int, int] | None = None
    random_crowding_ties: bool = False
    da_overshoot: bool = False
    metric_interval: int = 10
    record_metrics: bool = True

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise InvalidConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.association not in ("angle", "perpendicular"):
            raise InvalidConfigError(f"unknown association rule {self.association!r}")
        if self.scaling not in SCALING_RULES:
            raise InvalidConfigError(f"scaling must be one of {SCALING_RULES}, got {self.scaling!r}")

    def as_dict(self) -> dict:
        d = asdict(self)
        if isinstance(d["weight_resolution"], tuple):
            d["weight_resolution"] = list(d["weight_resolution"])
        return d


@dataclass
class CtaeaState:
    ca: Archive
    da: Archive
    weights: WeightVectorSet
    bounds: NormalizationBounds
    evaluations_used: int
    config: CtaeaConfig
    generation: int = 0


def _weights_and_size(problem: Problem, config: CtaeaConfig) -> tuple[WeightVectorSet, int, int]:
    weights = generate_weights(problem.m, config.weight_resolution)
    n_pop = len(weights)
    if config.pop_size is not None and config.pop_size != n_pop:
        raise InvalidConfigError(
            f"pop_size {config.pop_size} does not match the {n_pop} weight vectors of resolution "
            f"{config.weight_resolution}")
    batch = n_pop if config.offspring_size is None else config.offspring_size
    if not 1 <= batch <= n_pop:
        raise InvalidConfigError(f"offspring batch {batch} must be within 1..{n_pop}")
    if config.max_evaluations < 2 * n_pop:
        raise InvalidConfigError(f"max_evaluations must cover initialisation ({2 * n_pop})")
    return weights, n_pop, batch


def _scaled(F: np.ndarray, bounds: NormalizationBounds | None, reference: np.ndarray,
            weights: WeightVectorSet, association: str,
            scaling: str = "ideal") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scaled objectives, subregion index and Tchebycheff value per row."""
    b = scaling_bounds(reference, scaling) if bounds is None else bounds
    Fn = normalize(F, b)
    W = weights.vectors
    idx = associate_normalized(Fn, W, raw=F, rule=association)
    gt = tchebycheff(Fn, W[idx], np.zeros(F.shape[1]))
    return Fn, idx, np.atleast_1d(gt)


def _group(idx: np.ndarray, counts: np.ndarray) -> list[list[int]]:
    """Member indices (ascending) of every subregion."""
    groups: list[list[int]] = [[] for _ in range(len(counts))]
    for j, i in enumerate(idx.tolist()):
        groups[i].append(j)
    return groups


def _trim_crowded(F: np.ndarray, weights: WeightVectorSet, capacity: int, bounds, variant: str,
                  association: str, rng, random_ties: bool, scaling: str) -> np.ndarray:
    """Indices (ascending) surviving the crowded-subregion deletion loop."""
    Fn, idx, gt = _scaled(F, bounds, F, weights, association, scaling)
    n_sub = len(weights)
    counts = np.bincount(idx, minlength=n_sub)
    members = _group(idx, counts)
    D = pairwise_distances(Fn) if variant != "variant-1" else None
    alive = np.ones(len(F), dtype=bool)
    size = len(F)
    while size > capacity:
        if random_ties:
            crowded = np.flatnonzero(counts == counts.max())
            i = int(crowded[rng.integers(len(crowded))])
        else:
            i = int(np.argmax(counts))
        mem = np.asarray(members[i])
        if variant == "variant-1":
            worst = int(mem[np.argmax(gt[mem])])
        else:
            sub = D[mem[:, None], mem]
            np.fill_diagonal(sub, np.inf)
            nearest = sub.min(axis=1)
            tied = mem[nearest == nearest.min()]
            worst = int(tied[np.argmax(gt[tied])])
        members[i].remove(worst)
        counts[i] -= 1
        alive[worst] = False
        size -= 1
    return np.flatnonzero(alive)


def _select_ca(H: Archive, capacity: int, weights: WeightVectorSet, bounds, variant: str,
               association: str, rng, random_ties: bool, scaling: str = "ideal") -> Archive:
    feasible = H.feasible
    n_feasible = int(feasible.sum())
    if n_feasible == capacity:
        return H.take(feasible, capacity)
    if n_feasible > capacity:
        feas_idx = np.flatnonzero(feasible)
        Fs = H.F[feas_idx]
        chosen: list[np.ndarray] = []
        total = 0
        for level in sort_by_matrix(dominance_matrix(Fs)):
            chosen.append(level)
            total += len(level)
            if total >= capacity:
                break
        pick = np.sort(np.concatenate(chosen))
        if total > capacity:
            keep = _trim_crowded(Fs[pick], weights, capacity, bounds, variant, association, rng,
                                 random_ties, scaling)
            pick = pick[keep]
        return H.take(feas_idx[pick], capacity)

    feas_idx = np.flatnonzero(feasible)
    inf_idx = np.flatnonzero(~feasible)
    _, _, gt = _scaled(H.F[inf_idx], bounds, H.F, weights, association, scaling)
    pairs = np.column_stack([H.cv[inf_idx], gt])
    selected = list(feas_idx)
    last = np.empty(0, dtype=np.intp)
    for level in sort_by_matrix(dominance_matrix(pairs)):
        if len(selected) >= capacity:
            break
        last = inf_idx[level]
        selected.extend(last)
    excess = len(selected) - capacity
    if excess > 0:
        by_cv = last[np.argsort(-H.cv[last], kind="stable")]
        dropped = set(by_cv[:excess].tolist())
        selected = [s for s in selected if s not in dropped]
    return H.take(np.sort(np.asarray(selected, dtype=np.intp)), capacity)


def update_ca(ca: Archive, offspring: Archive, weights: WeightVectorSet,
              bounds: NormalizationBounds | None = None, *, variant: str = "full",
              association: str = "angle", rng: np.random.Generator | None = None,
              random_ties: bool = False, scaling: str = "ideal") -> Archive:
    """New convergence archive of size ``ca.capacity`` from CA plus offspring.

    * exactly N feasible: they form the new CA;
    * more than N feasible: whole non-domination levels are admitted, then one
      member at a time is deleted from the most crowded subregion, choosing
      among the members closest to a neighbour the one with the largest
      Tchebycheff value;
    * fewer than N feasible: all feasible are kept and infeasible members are
      admitted by levels of the (CV, Tchebycheff) bi-objective problem, the
      last level being trimmed by largest CV first.

    ``bounds=None`` derives bounds by the ``scaling`` rule from the set being
    ranked (the admitted feasible levels, or the whole hybrid set when
    infeasible members are needed).
    """
    if random_ties and rng is None:
        raise InvalidInputError("random crowding ties need a random generator")
    H = ca.concat(offspring)
    return _select_ca(H, ca.capacity, weights, bounds, variant, association, rng, random_ties, scaling)


def _promotion_order(members: list[int], D: np.ndarray, gt: np.ndarray):
    """Yield subregion members best-first: min Tchebycheff among the non-dominated rest."""
    remaining = list(members)
    while remaining:
        if len(remaining) == 1:
            yield remaining.pop()
            return
        r = np.asarray(remaining)
        nd = r[~D[r[:, None], r].any(axis=0)]
        best = int(nd[np.argmin(gt[nd])])
        remaining.remove(best)
        yield best


def update_da(ca: Archive, da: Archive, offspring: Archive, weights: WeightVectorSet,
              bounds: NormalizationBounds | None = None, *, association: str = "angle",
              overshoot: bool = False, scaling: str = "ideal") -> Archive:
    """New diversity archive from DA plus offspring, complementing the CA.

    Round ``itr`` lets each subregion hold at most ``itr`` solutions counting
    CA members already there; DA candidates are promoted best-first. Filling
    stops as soon as N members are chosen (``overshoot=True`` instead finishes
    the round). Constraint data is never read. ``bounds=None`` derives one set
    of bounds from DA, offspring and CA together, so both associations agree.
    """
    capacity = da.capacity
    H = da.concat(offspring)
    reference = np.vstack([H.F, ca.F])
    if bounds is None:
        bounds = scaling_bounds(reference, scaling)
    _, idx_d, gt = _scaled(H.F, bounds, reference, weights, association)
    _, idx_c, _ = _scaled(ca.F, bounds, reference, weights, association)
    n_sub = len(weights)
    counts_c = np.bincount(idx_c, minlength=n_sub)
    D = dominance_matrix(H.F)
    members = _group(idx_d, np.bincount(idx_d, minlength=n_sub))
    streams = [_promotion_order(mem, D, gt) if mem else None for mem in members]
    left = np.array([len(mem) for mem in members])
    taken = np.zeros(n_sub, dtype=np.int64)
    selected: list[int] = []
    itr = 1
    while (len(selected) <= capacity if overshoot else len(selected) < capacity) and left.sum() > 0:
        for i in range(n_sub):
            quota = itr - counts_c[i] - taken[i]
            while quota > 0 and left[i] > 0:
                selected.append(next(streams[i]))
                taken[i] += 1
                left[i] -= 1
                quota -= 1
                if not overshoot and len(selected) == capacity:
                    break
            if not overshoot and len(selected) == capacity:
                break
        itr += 1
    return H.take(np.sort(np.asarray(selected, dtype=np.intp)), capacity)


def mating_proportions(ca: Archive, da: Archive) -> tuple[float, float]:
    """Shares of CA and DA members that are non-dominated within CA ∪ DA."""
    F = np.vstack([ca.F, da.F])
    nd = ~dominance_matrix(F).any(axis=0)
    total = len(F)
    return float(nd[: len(ca)].sum()) / total, float(nd[len(ca):].sum()) / total


def _tournament(pool: Archive, count: int, rng: np.random.Generator) -> np.ndarray:
    """Binary tournaments: Pareto among feasible, feasible over infeasible, else random."""
    size = len(pool)
    if size < 2:
        raise InvalidInputError("tournament selection needs at least two candidates")
    a = rng.integers(0, size, count)
    b = rng.integers(0, size - 1, count)
    b = b + (b >= a)
    coin = rng.random(count) < 0.5
    fa, fb = pool.feasible[a], pool.feasible[b]
    Fa, Fb = pool.F[a], pool.F[b]
    a_dom = np.all(Fa <= Fb, axis=1) & np.any(Fa < Fb, axis=1)
    b_dom = np.all(Fb <= Fa, axis=1) & np.any(Fb < Fa, axis=1)
    pick_a = np.where(
        fa & fb,
        np.where(a_dom, True, np.where(b_dom, False, coin)),
        np.where(fa != fb, fa, coin),
    )
    return np.where(pick_a, a, b)


def tournament_select(pool: Archive, rng: np.random.Generator) -> Solution:
    return pool[int(_tournament(pool, 1, rng)[0])]


def _pick(from_ca: np.ndarray, ca: Archive, da: Archive, rng) -> np.ndarray:
    X = np.empty((len(from_ca), ca.X.shape[1]))
    n_ca = int(from_ca.sum())
    X[from_ca] = ca.X[_tournament(ca, n_ca, rng)]
    X[~from_ca] = da.X[_tournament(da, len(from_ca) - n_ca, rng)]
    return X


def mating_sources(ca: Archive, da: Archive, count: int, rng: np.random.Generator,
                   variant: str = "full") -> tuple[np.ndarray, np.ndarray]:
    """Boolean arrays: does parent 1 / parent 2 of each pair come from the CA?"""
    if variant == "variant-2":
        return rng.random(count) < 0.5, rng.random(count) < 0.5
    rho_c, rho_d = mating_proportions(ca, da)
    return np.full(count, rho_c > rho_d), rng.random(count) < rho_c


def select_parents(ca: Archive, da: Archive, count: int, rng: np.random.Generator,
                   variant: str = "full") -> tuple[np.ndarray, np.ndarray]:
    src1, src2 = mating_sources(ca, da, count, rng, variant)
    return _pick(src1, ca, da, rng), _pick(src2, ca, da, rng)


def restricted_mating(ca: Archive, da: Archive, rng: np.random.Generator,
                      variant: str = "full") -> tuple[Solution, Solution]:
    """One parent pair; see :func:`select_parents` for the batched form."""
    src1, src2 = mating_sources(ca, da, 1, rng, variant)
    p1 = tournament_select(ca if src1[0] else da, rng)
    p2 = tournament_select(ca if src2[0] else da, rng)
    return p1, p2


def _random_archive(problem: Problem, size: int, rng: np.random.Generator) -> Archive:
    lo, up = problem.lower, problem.upper
    X = lo + rng.random((size, problem.n)) * (up - lo)
    F, G = problem.evaluate_batch(X)
    return Archive(X, F, G, capacity=size)


def initialize(problem: Problem, config: CtaeaConfig, rng: np.random.Generator) -> CtaeaState:
    """Uniform random CA and DA (CA sample drawn first), CA ordered by its update rule."""
    weights, n_pop, _ = _weights_and_size(problem, config)
    ca = _random_archive(problem, n_pop, rng)
    da = _random_archive(problem, n_pop, rng)
    ca = _select_ca(ca, n_pop, weights, None, config.variant, config.association, rng,
                    config.random_crowding_ties, config.scaling)
    bounds = update_bounds(np.vstack([ca.F, da.F]))
    return CtaeaState(ca, da, weights, bounds, 2 * n_pop, config)


def step(state: CtaeaState, problem: Problem, rng: np.random.Generator, count: int) -> CtaeaState:
    """One generation: mating, variation, evaluation, CA update, DA update."""
    cfg = state.config
    lo, up = problem.lower, problem.upper
    X1, X2 = select_parents(state.ca, state.da, count, rng, cfg.variant)
    child, _ = sbx(X1, X2, cfg.variation, lo, up, rng)
    Xo = polynomial_mutation(child, cfg.variation, lo, up, rng)
    F, G = problem.evaluate_batch(Xo)
    offspring = Archive(Xo, F, G, capacity=count)
    ca = update_ca(state.ca, offspring, state.weights, variant=cfg.variant, association=cfg.association,
                   rng=rng, random_ties=cfg.random_crowding_ties, scaling=cfg.scaling)
    da = update_da(ca, state.da, offspring, state.weights, association=cfg.association,
                   overshoot=cfg.da_overshoot, scaling=cfg.scaling)
    bounds = update_bounds(np.vstack([ca.F, da.F, offspring.F]))
    return replace(state, ca=ca, da=da, bounds=bounds, evaluations_used=state.evaluations_used + count,
                   generation=state.generation + 1)


def run(problem: Problem, config: CtaeaConfig, rng: np.random.Generator | int,
        reference_front=None, on_generation=None) -> RunRecord:
    """Optimise ``problem`` until the evaluation budget is spent.

    Args:
        rng: a generator, or an integer seed (recorded in the result).
        reference_front: IGD reference set; sampled from the problem if omitted.
        on_generation: optional callback receiving the state after each generation.

    Returns:
        The run record; the reported solution set is the final CA.
    """
    seed = None
    if not isinstance(rng, np.random.Generator):
        seed = int(rng)
        rng = make_rng(seed)
    started = time.perf_counter()
    _, _, batch = _weights_and_size(problem, config)
    state = initialize(problem, config, rng)
    tracer = Tracer(problem, config.metric_interval, reference_front, enabled=config.record_metrics)
    tracer.snapshot(0, state.evaluations_used, state.ca, force=True)
    while state.evaluations_used < config.max_evaluations:
        count = min(batch, config.max_evaluations - state.evaluations_used)
        state = step(state, problem, rng, count)
        if on_generation is not None:
            on_generation(state)
        tracer.snapshot(state.generation, state.evaluations_used, state.ca)
    tracer.snapshot(state.generation, state.evaluations_used, state.ca, force=True)
    algorithm = "ctaea" if config.variant == "full" else f"ctaea-{config.variant}"
    return RunRecord(algorithm, problem_snapshot(problem), config.as_dict(), seed, tracer.rows,
                     state.ca, state.da, time.perf_counter() - started)
