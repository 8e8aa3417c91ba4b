"""Quality indicators and the statistics used to compare batches of runs."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .core import InvalidInputError
from .ranking import nondominated_mask

EXACT_HV_MAX_M = 5
SIGNIFICANT_A = "significant_a_better"
SIGNIFICANT_B = "significant_b_better"
NOT_SIGNIFICANT = "not_significant"


@dataclass(frozen=True)
class MetricReport:
    igd: float
    hv: float
    feasible_count: int
    seed: int | None = None
    evaluations: int | None = None
    hv_normalized: float = math.nan

    def as_dict(self) -> dict:
        return asdict(self)


def igd(P, Pstar, chunk: int = 4096) -> float:
    """Mean distance from every reference point to its nearest point of ``P``."""
    P = np.asarray(P, dtype=float)
    Z = np.asarray(getattr(Pstar, "points", Pstar), dtype=float)
    if P.size == 0 or Z.size == 0:
        raise InvalidInputError("IGD needs non-empty obtained and reference sets")
    P = P.reshape(len(P), -1)
    Z = Z.reshape(len(Z), -1)
    if P.shape[1] != Z.shape[1]:
        raise InvalidInputError("obtained and reference sets differ in dimension")
    total = 0.0
    for start in range(0, len(Z), chunk):
        block = Z[start:start + chunk]
        sq = np.zeros((len(block), len(P)))
        for j in range(P.shape[1]):
            d = block[:, j, None] - P[None, :, j]
            sq += d * d
        total += float(np.sqrt(sq.min(axis=1)).sum())
    return total / len(Z)


def _hv2d(P: np.ndarray, ref: np.ndarray) -> float:
    order = np.argsort(P[:, 0], kind="stable")
    P = P[order]
    area, best_y = 0.0, ref[1]
    xs = np.append(P[:, 0], ref[0])
    for i in range(len(P)):
        best_y = min(best_y, P[i, 1])
        area += (xs[i + 1] - xs[i]) * (ref[1] - best_y)
    return area


def _wfg(P: np.ndarray, ref: np.ndarray) -> float:
    if len(P) == 0:
        return 0.0
    m = P.shape[1]
    if m == 1:
        return float(ref[0] - P[:, 0].min())
    if len(P) == 1:
        return float(np.prod(ref - P[0]))
    if m == 2:
        return _hv2d(P, ref)
    P = P[nondominated_mask(P)]
    P = P[np.argsort(P[:, -1], kind="stable")]
    total = 0.0
    for i in range(len(P)):
        p = P[i]
        rest = np.maximum(P[i + 1:], p)
        total += float(np.prod(ref - p)) - _wfg(rest[nondominated_mask(rest)] if len(rest) else rest, ref)
    return total


def hv_exact(P, zr) -> float:
    """Exact hypervolume via exclusive-volume recursion with a 2-D sweep base case."""
    P = np.asarray(P, dtype=float)
    zr = np.asarray(zr, dtype=float)
    if P.size == 0:
        return 0.0
    P = P.reshape(-1, len(zr))
    P = P[np.all(P < zr, axis=1)]
    if len(P) == 0:
        return 0.0
    return _wfg(P[nondominated_mask(P)], zr)


def hv_monte_carlo(P, zr, samples: int = 1_000_000, rng: np.random.Generator | None = None,
                   chunk: int = 50_000) -> float:
    """Hit ratio of uniform samples in [min(P), zr] times the box volume."""
    P = np.asarray(P, dtype=float)
    zr = np.asarray(zr, dtype=float)
    if P.size == 0:
        return 0.0
    P = P.reshape(-1, len(zr))
    P = P[np.all(P < zr, axis=1)]
    if len(P) == 0:
        return 0.0
    rng = np.random.default_rng(0) if rng is None else rng
    P = P[nondominated_mask(P)]
    lo = P.min(axis=0)
    volume = float(np.prod(zr - lo))
    hits = 0
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        S = lo + rng.random((size, len(zr))) * (zr - lo)
        dominated = np.zeros(size, dtype=bool)
        for p in P:
            dominated |= np.all(S >= p, axis=1)
        hits += int(dominated.sum())
        done += size
    return volume * hits / samples


def hypervolume(P, zr, mode: str | None = None, samples: int = 1_000_000,
                rng: np.random.Generator | None = None) -> float:
    """Hypervolume of ``P`` bounded by ``zr``; 0 when nothing lies strictly inside.

    Args:
        mode: ``"exact"``, ``"monte-carlo"`` or ``None`` (exact up to five
            objectives, Monte-Carlo above).
    """
    m = len(np.asarray(zr))
    if mode is None:
        mode = "exact" if m <= EXACT_HV_MAX_M else "monte-carlo"
    if mode == "exact":
        return hv_exact(P, zr)
    if mode == "monte-carlo":
        return hv_monte_carlo(P, zr, samples=samples, rng=rng)
    raise InvalidInputError(f"unknown hypervolume mode {mode!r}")


def hv_normalized(P, reference_front, zr_value: float = 1.1) -> float:
    """Hypervolume after mapping the front's ideal-nadir box onto the unit cube.

    The reference point is ``zr_value`` in every normalised objective. Front
    objectives with zero extent keep a unit span.
    """
    Z = np.asarray(getattr(reference_front, "points", reference_front), dtype=float)
    ideal, nadir = Z.min(axis=0), Z.max(axis=0)
    span = np.where(nadir - ideal > 1e-12, nadir - ideal, 1.0)
    P = (np.asarray(P, dtype=float).reshape(-1, Z.shape[1]) - ideal) / span
    return hypervolume(P, np.full(Z.shape[1], zr_value))


def rank_sum_statistic(a, b) -> tuple[float, float, float]:
    """U statistic of ``a``, continuity- and tie-corrected z, two-sided p-value."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = len(a), len(b)
    n = n1 + n2
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    u1 = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (n * (n - 1))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return u1, 0.0, 1.0
    z = max(abs(u1 - n1 * n2 / 2.0) - 0.5, 0.0) / math.sqrt(var)
    return u1, z, math.erfc(z / math.sqrt(2.0))


def wilcoxon_rank_sum(a, b, alpha: float = 0.05, minimize: bool = True) -> str:
    """Two-sided rank-sum decision for samples of at least five values each.

    The winner of a significant difference is the sample with the better
    median (lower when ``minimize``); equal medians fall back to the rank sum.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 5 or len(b) < 5:
        raise InvalidInputError("rank-sum test needs at least five values per sample")
    u1, _, p = rank_sum_statistic(a, b)
    if p >= alpha:
        return NOT_SIGNIFICANT
    ma, mb = float(np.median(a)), float(np.median(b))
    a_smaller = ma < mb if ma != mb else u1 < len(a) * len(b) / 2.0
    return SIGNIFICANT_A if a_smaller == minimize else SIGNIFICANT_B


def _quantile7(x: np.ndarray, q: float) -> float:
    h = (len(x) - 1) * q
    lo = int(math.floor(h))
    hi = min(lo + 1, len(x) - 1)
    # the equality and exact-position checks keep inf runs from producing nan
    if x[lo] == x[hi] or h == lo:
        return float(x[lo])
    return float(x[lo] + (h - lo) * (x[hi] - x[lo]))


def summarize_values(values: Iterable[float]) -> dict[str, float]:
    """Median and interquartile range (linear interpolation between order statistics)."""
    x = np.sort(np.asarray(list(values), dtype=float))
    if len(x) == 0:
        raise InvalidInputError("cannot summarise an empty sample")
    q1, q3 = _quantile7(x, 0.25), _quantile7(x, 0.75)
    return {"median": _quantile7(x, 0.5), "iqr": 0.0 if q1 == q3 else q3 - q1}


def summarize(runs: Sequence[MetricReport]) -> dict[str, dict[str, float]]:
    if not runs:
        raise InvalidInputError("need at least one run")
    return {
        "igd": summarize_values(r.igd for r in runs),
        "hv": summarize_values(r.hv for r in runs),
        "hv_normalized": summarize_values(r.hv_normalized for r in runs),
        "feasible_count": summarize_values(r.feasible_count for r in runs),
    }


def assess(F, cv, reference_front, zr, seed: int | None = None, evaluations: int | None = None,
           normalized_hv: bool = True) -> MetricReport:
    """Indicators of the feasible members of a solution set.

    IGD is ``inf`` and both HV values are 0 when no member is feasible. With
    ``normalized_hv`` the report also carries :func:`hv_normalized`, otherwise
    that field is ``nan``.
    """
    F = np.asarray(F, dtype=float)
    feasible = np.asarray(cv) == 0.0
    count = int(feasible.sum())
    if count == 0:
        return MetricReport(math.inf, 0.0, 0, seed, evaluations, 0.0 if normalized_hv else math.nan)
    Ff = F[feasible]
    hv_norm = hv_normalized(Ff, reference_front) if normalized_hv else math.nan
    return MetricReport(igd(Ff, reference_front), hypervolume(Ff, zr), count, seed, evaluations, hv_norm)
