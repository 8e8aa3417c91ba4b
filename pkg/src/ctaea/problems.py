"""DTLZ baselines and their constrained variants (C-DTLZ, DC-DTLZ).

Every problem minimises ``m`` objectives over the unit box ``[0, 1]^n``. The
first ``m - 1`` variables are position variables, the remaining ``k`` are
distance variables whose optimum is 0.5. Constraints are stored as residuals
``c_j(x) >= 0``; the per-constraint violation is ``bracket(c_j)``, so feasible
points report an exact zero CV.

The DC constraint forms are geometric constructions: bands over position
variables for DC1, a thin feasible ribbon above the front with a fluctuating CV
for DC2, and both for DC3.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .core import InvalidInputError, Solution, UnsupportedProblemError, bracket_array
from .decomposition import read_matrix_csv, simplex_lattice, write_matrix_csv
from .ranking import nondominated_mask

BASES = ("dtlz1", "dtlz2", "dtlz3", "dtlz4")

# name -> (base, constraint family, default parameters)
_CATALOGUE: dict[str, tuple[str, str, dict[str, float]]] = {
    "dtlz1": ("dtlz1", "none", {}),
    "dtlz2": ("dtlz2", "none", {}),
    "dtlz3": ("dtlz3", "none", {}),
    "dtlz4": ("dtlz4", "none", {}),
    "c1-dtlz1": ("dtlz1", "c1-linear", {}),
    "c1-dtlz3": ("dtlz3", "c1-ribbon", {}),
    "c2-dtlz2": ("dtlz2", "c2-caps", {"r": 0.1}),
    "c3-dtlz1": ("dtlz1", "c3-linear", {}),
    "c3-dtlz4": ("dtlz4", "c3-quadratic", {}),
    "dc1-dtlz1": ("dtlz1", "dc1", {"a": 3.0, "b": 0.5}),
    "dc1-dtlz3": ("dtlz3", "dc1", {"a": 3.0, "b": 0.5}),
    "dc2-dtlz1": ("dtlz1", "dc2", {"a": 3.0, "b": 0.9}),
    "dc2-dtlz3": ("dtlz3", "dc2", {"a": 3.0, "b": 0.9}),
    "dc3-dtlz1": ("dtlz1", "dc3", {"a1": 3.0, "b1": 0.5, "a2": 3.0, "b2": 0.9}),
    "dc3-dtlz3": ("dtlz3", "dc3", {"a1": 3.0, "b1": 0.5, "a2": 3.0, "b2": 0.9}),
}

PROBLEM_NAMES = tuple(_CATALOGUE)

# Outer radius of the C1-DTLZ3 infeasible ribbon by objective count.
C1_DTLZ3_RADIUS = {2: 6.0, 3: 9.0, 5: 12.5, 8: 12.5, 10: 15.0, 15: 15.0}


def c1_dtlz3_radius(m: int) -> float:
    if m in C1_DTLZ3_RADIUS:
        return C1_DTLZ3_RADIUS[m]
    return 9.0 if m < 5 else (12.5 if m < 10 else 15.0)


def default_k(base: str) -> int:
    return 5 if base == "dtlz1" else 10


def _rastrigin_g(xd: np.ndarray) -> np.ndarray:
    k = xd.shape[1]
    y = xd - 0.5
    return 100.0 * (k + np.sum(y * y - np.cos(20.0 * np.pi * y), axis=1))


def _sphere_g(xd: np.ndarray) -> np.ndarray:
    y = xd - 0.5
    return np.sum(y * y, axis=1)


def _shape(factor: np.ndarray, complement: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """f_1 = s*prod(a), f_j = s*prod(a[:m-j])*b[m-j], f_m = s*b[0]."""
    rows, mm1 = factor.shape
    m = mm1 + 1
    prefix = np.ones((rows, m))
    prefix[:, 1:] = np.cumprod(factor, axis=1)
    F = np.empty((rows, m))
    F[:, 0] = prefix[:, m - 1]
    for j in range(1, m):
        F[:, j] = prefix[:, m - 1 - j] * complement[:, m - 1 - j]
    return F * scale[:, None]


def dtlz_objectives(base: str, X: np.ndarray, m: int, alpha: float = 100.0) -> tuple[np.ndarray, np.ndarray]:
    """Objective matrix and distance function value g for a DTLZ base problem."""
    xp, xd = X[:, : m - 1], X[:, m - 1:]
    if base == "dtlz1":
        g = _rastrigin_g(xd)
        return _shape(xp, 1.0 - xp, 0.5 * (1.0 + g)), g
    if base in ("dtlz2", "dtlz3", "dtlz4"):
        g = _rastrigin_g(xd) if base == "dtlz3" else _sphere_g(xd)
        theta = (xp**alpha if base == "dtlz4" else xp) * (np.pi / 2.0)
        return _shape(np.cos(theta), np.sin(theta), 1.0 + g), g
    raise UnsupportedProblemError(base)


@dataclass(frozen=True)
class ReferenceFront:
    points: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self, path: str | Path) -> None:
        write_matrix_csv(path, self.points, [f"f{j + 1}" for j in range(self.points.shape[1])])

    @classmethod
    def from_csv(cls, path: str | Path) -> ReferenceFront:
        header, rows = read_matrix_csv(path)
        if not all(h == f"f{j + 1}" for j, h in enumerate(header)):
            raise InvalidInputError(f"reference front header must be f1..fm, got {header}")
        return cls(rows)


@dataclass(frozen=True)
class Problem:
    """A constrained (or unconstrained) scalable test problem.

    Attributes:
        name: catalogue name such as ``"c1-dtlz3"``.
        m: number of objectives.
        n: number of decision variables.
        params: constraint parameters (``r`` for C1/C2, ``a``/``b`` for DC).
    """

    name: str
    m: int
    n: int
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    @property
    def base(self) -> str:
        return _CATALOGUE[self.name][0]

    @property
    def family(self) -> str:
        return _CATALOGUE[self.name][1]

    @property
    def lower(self) -> np.ndarray:
        return np.zeros(self.n)

    @property
    def upper(self) -> np.ndarray:
        return np.ones(self.n)

    @property
    def n_constraints(self) -> int:
        fam = self.family
        if fam == "none":
            return 0
        if fam in ("c3-linear", "c3-quadratic"):
            return self.m
        if fam == "dc2":
            return 2
        if fam == "dc3":
            return self.m + 1
        return 1

    @property
    def key(self) -> tuple:
        return (self.name, self.m, self.n, tuple(sorted(self.params.items())))

    def residuals(self, X: np.ndarray, F: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Constraint residuals c_j (feasible iff all >= 0), shape (rows, l)."""
        fam, p, m = self.family, self.params, self.m
        rows = len(F)
        if fam == "none":
            return np.empty((rows, 0))
        if fam == "c1-linear":
            c = 1.0 - F[:, -1] / 0.6 - np.sum(F[:, :-1], axis=1) / 0.5
            return c[:, None]
        if fam == "c1-ribbon":
            sq = np.sum(F * F, axis=1)
            return ((sq - 16.0) * (sq - p["r"] ** 2))[:, None]
        if fam == "c2-caps":
            sq = F * F
            total = sq.sum(axis=1, keepdims=True)
            axis_terms = total - sq + (F - 1.0) ** 2 - p["r"] ** 2
            centre = np.sum((F - 1.0 / math.sqrt(m)) ** 2, axis=1) - p["r"] ** 2
            return -np.minimum(axis_terms.min(axis=1), centre)[:, None]
        if fam == "c3-linear":
            total = F.sum(axis=1, keepdims=True)
            return total - F + F / 0.5 - 1.0
        if fam == "c3-quadratic":
            sq = F * F
            total = sq.sum(axis=1, keepdims=True)
            return total - sq + sq / 4.0 - 1.0
        if fam == "dc1":
            return (np.cos(p["a"] * np.pi * X[:, 0]) + p["b"])[:, None]
        if fam == "dc2":
            return np.column_stack([np.cos(p["a"] * np.pi * g) + p["b"], np.exp(-g) - p["b"]])
        if fam == "dc3":
            bands = np.cos(p["a1"] * np.pi * X[:, : m - 1]) + p["b1"]
            return np.column_stack([bands, np.cos(p["a2"] * np.pi * g) + p["b2"], np.exp(-g) - p["b2"]])
        raise UnsupportedProblemError(fam)

    def check_bounds(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise InvalidInputError(f"{self.name} expects {self.n} variables, got shape {X.shape}")
        if not np.all(np.isfinite(X)) or np.any(X < 0.0) or np.any(X > 1.0):
            raise InvalidInputError(f"{self.name}: decision vector outside [0, 1]^{self.n}")
        return X

    def evaluate_batch(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Objectives (rows, m) and violations (rows, l) for a decision matrix."""
        X = self.check_bounds(X)
        F, g = dtlz_objectives(self.base, X, self.m)
        return F, bracket_array(self.residuals(X, F, g))

    def evaluate(self, x) -> Solution:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise InvalidInputError("evaluate takes a single decision vector")
        F, G = self.evaluate_batch(x[None, :])
        return Solution(x, F[0], G[0])

    def optimal_preimage(self, positions) -> np.ndarray:
        """Decision vectors on the unconstrained front for given position variables."""
        positions = np.atleast_2d(np.asarray(positions, dtype=float))
        X = np.full((len(positions), self.n), 0.5)
        X[:, : self.m - 1] = positions
        return X


def make_problem(name: str, m: int = 3, n: int | None = None, **params: float) -> Problem:
    """Build a catalogue problem with defaults filled in.

    Raises:
        UnsupportedProblemError: For names outside :data:`PROBLEM_NAMES`.
    """
    key = name.lower()
    if key not in _CATALOGUE:
        raise UnsupportedProblemError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
    if m < 2:
        raise InvalidInputError(f"need m >= 2, got {m}")
    base, fam, defaults = _CATALOGUE[key]
    merged = dict(defaults)
    if fam == "c1-ribbon":
        merged["r"] = c1_dtlz3_radius(m)
    unknown = set(params) - set(merged)
    if unknown:
        raise InvalidInputError(f"{key} has no parameters {sorted(unknown)}")
    merged.update({k: float(v) for k, v in params.items()})
    if n is None:
        n = m - 1 + default_k(base)
    if n < m:
        raise InvalidInputError(f"need n >= m, got n={n}, m={m}")
    return Problem(key, m, n, merged)


def _lattice_size(m: int, h: int) -> int:
    return math.comb(h + m - 1, m - 1)


def _resolution_for(m: int, count: int) -> int:
    h = 1
    while _lattice_size(m, h) < count:
        h += 1
    return h


def _positions_linear(P: np.ndarray) -> np.ndarray:
    """Invert the DTLZ1 front map: position variables for points with sum 0.5."""
    rows, m = P.shape
    X = np.zeros((rows, m - 1))
    prefix = np.ones(rows)
    for kk in range(m - 1):
        f = P[:, m - 1 - kk]
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(prefix > 1e-15, 1.0 - 2.0 * f / prefix, 0.0)
        X[:, kk] = np.clip(x, 0.0, 1.0)
        prefix = prefix * X[:, kk]
    return X


def _positions_sphere(P: np.ndarray) -> np.ndarray:
    """Invert the DTLZ2/3 front map for points on the unit sphere."""
    rows, m = P.shape
    X = np.zeros((rows, m - 1))
    prefix = np.ones(rows)
    for kk in range(m - 1):
        f = P[:, m - 1 - kk]
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(prefix > 1e-15, f / prefix, 0.0)
        X[:, kk] = np.arcsin(np.clip(s, 0.0, 1.0)) * 2.0 / np.pi
        prefix = prefix * np.cos(X[:, kk] * np.pi / 2.0)
    return X


def _base_front(base: str, m: int, h: int) -> np.ndarray:
    L = simplex_lattice(m, h)
    if base == "dtlz1":
        return 0.5 * L
    return L / np.linalg.norm(L, axis=1, keepdims=True)


def _ray_front(problem: Problem, h: int) -> np.ndarray:
    """Front formed by the constraint boundaries: scale each direction to feasibility."""
    m = problem.m
    if problem.family == "c3-linear":
        L = simplex_lattice(m, h)
        t = 1.0 / (1.0 + L.min(axis=1))
        P = L * t[:, None]
    else:
        U = _base_front("dtlz2", m, h)
        t = np.max(1.0 / np.sqrt(1.0 - 0.75 * U * U), axis=1)
        P = U * t[:, None]
    return P[nondominated_mask(P)]


def _filtered_front(problem: Problem, h: int) -> np.ndarray:
    P = _base_front(problem.base, problem.m, h)
    pos = _positions_linear(P) if problem.base == "dtlz1" else _positions_sphere(P)
    F, G = problem.evaluate_batch(problem.optimal_preimage(pos))
    return F[G.sum(axis=1) == 0.0]


@functools.lru_cache(maxsize=32)
def _cached_front(key: tuple, target_count: int) -> np.ndarray:
    name, m, n, params = key
    problem = Problem(name, m, n, dict(params))
    if problem.family == "none":
        if problem.base == "dtlz4":
            return _base_front("dtlz2", m, _resolution_for(m, target_count))
        return _base_front(problem.base, m, _resolution_for(m, target_count))
    sampler = _ray_front if problem.family.startswith("c3") else _filtered_front
    h = _resolution_for(m, target_count)
    for _ in range(30):
        pts = sampler(problem, h)
        if len(pts) >= target_count:
            return pts
        ratio = target_count / max(len(pts), 1)
        h_next = int(math.ceil(h * min(ratio, 64.0) ** (1.0 / (m - 1)) * 1.05))
        h = max(h + 1, h_next)
    raise UnsupportedProblemError(f"could not sample {target_count} front points for {name}")


def sample_reference_front(problem: Problem, target_count: int = 10000) -> ReferenceFront:
    """Sample at least ``target_count`` points of the feasible Pareto front.

    Unconstrained and front-preserving problems use a Das-Dennis lattice mapped
    onto the front; points are kept only if their optimal preimage is feasible.
    C3 problems scale each lattice direction onto the constraint boundary.
    """
    if problem.name not in _CATALOGUE:
        raise UnsupportedProblemError(problem.name)
    if target_count < 1:
        raise InvalidInputError("target_count must be positive")
    pts = _cached_front(problem.key, int(target_count))
    pts = pts.copy()
    pts.setflags(write=False)
    return ReferenceFront(pts)


def hv_reference_point(problem: Problem) -> np.ndarray:
    """1.1 in every objective, 2.1 for C3-DTLZ4."""
    value = 2.1 if problem.name == "c3-dtlz4" else 1.1
    return np.full(problem.m, value)
