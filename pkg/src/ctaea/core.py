"""Shared domain types: solutions, fixed-capacity archives and the random source.

Archives store their members column-wise (decision matrix, objective matrix,
violation matrix, aggregate CV vector) so that the selection operators can work
on whole populations with numpy. Indexing an archive hands back an immutable
:class:`Solution` copy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class InvalidInputError(ValueError):
    """Raised when an operation receives data violating its preconditions."""


class InvalidConfigError(ValueError):
    """Raised for configurations that cannot produce a valid run."""


class UnsupportedProblemError(KeyError):
    """Raised for unknown problem names or problems without an analytic front."""


def bracket(alpha: float) -> float:
    """Return ``-alpha`` for negative input and 0 otherwise."""
    if not math.isfinite(alpha):
        raise InvalidInputError(f"bracket needs a finite value, got {alpha!r}")
    return -alpha if alpha < 0 else 0.0


def bracket_array(alpha: np.ndarray) -> np.ndarray:
    """Vectorised :func:`bracket`; exact zeros where ``alpha >= 0``."""
    alpha = np.asarray(alpha, dtype=float)
    return np.where(alpha < 0, -alpha, 0.0)


EQUALITY_EPS = 1e-4


def equality_residual(h, eps: float = EQUALITY_EPS) -> np.ndarray:
    """Residual form ``eps - |h|`` of a relaxed equality constraint ``h(x) = 0``.

    ``h`` is the constraint already scaled to the form whose target is zero.
    The residual is non-negative inside the tolerance band, so
    :func:`bracket_array` turns it into the violation ``max(|h| - eps, 0)``.
    None of the bundled problems has equality constraints; this is for
    user-defined ones.
    """
    if eps < 0:
        raise InvalidInputError(f"relaxation must be non-negative, got {eps}")
    return eps - np.abs(np.asarray(h, dtype=float))


def aggregate_cv(violations: Iterable[float]) -> float:
    """Sum per-constraint violations into one non-negative CV value.

    Raises:
        InvalidInputError: If any entry is negative or non-finite.
    """
    values = np.asarray(list(violations), dtype=float)
    if values.size and (not np.all(np.isfinite(values)) or np.any(values < 0)):
        raise InvalidInputError(f"violations must be finite and >= 0, got {values.tolist()}")
    return float(values.sum())


def make_rng(seed: int) -> np.random.Generator:
    """One generator per run: numpy's PCG64 seeded with a 64-bit integer."""
    if not 0 <= int(seed) < 2**64:
        raise InvalidInputError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class Solution:
    """An evaluated candidate: decision vector, objectives and violations."""

    x: np.ndarray
    f: np.ndarray
    violations: np.ndarray

    def __post_init__(self) -> None:
        for name in ("x", "f", "violations"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def cv(self) -> float:
        return float(self.violations.sum())

    @property
    def feasible(self) -> bool:
        return self.cv == 0.0


class Archive:
    """Fixed-capacity container of evaluated solutions.

    Attributes:
        X: (size, n) decision matrix.
        F: (size, m) objective matrix.
        G: (size, l) per-constraint violation matrix (non-negative).
        cv: (size,) aggregate constraint violation.
        capacity: nominal size N; the CA and DA hold exactly this many members
            after every update.
    """

    def __init__(self, X, F, G, capacity: int | None = None, cv=None):
        self.X = np.array(X, dtype=float, ndmin=2)
        self.F = np.array(F, dtype=float, ndmin=2)
        G = np.asarray(G, dtype=float)
        if G.ndim == 1:
            G = G.reshape(len(self.X), -1)
        self.G = np.array(G, dtype=float)
        if not (len(self.X) == len(self.F) == len(self.G)):
            raise InvalidInputError("X, F and G must have the same number of rows")
        self.cv = self.G.sum(axis=1) if cv is None else np.array(cv, dtype=float)
        self.capacity = len(self.X) if capacity is None else int(capacity)
        for arr in (self.X, self.F, self.G, self.cv):
            arr.setflags(write=False)

    @classmethod
    def from_solutions(cls, solutions: Sequence[Solution], capacity: int | None = None) -> Archive:
        if not solutions:
            raise InvalidInputError("cannot build an archive from no solutions")
        return cls(
            np.stack([s.x for s in solutions]),
            np.stack([s.f for s in solutions]),
            np.stack([s.violations for s in solutions]),
            capacity=capacity,
        )

    @classmethod
    def empty(cls, n: int, m: int, n_constraints: int, capacity: int = 0) -> Archive:
        return cls(np.empty((0, n)), np.empty((0, m)), np.empty((0, n_constraints)), capacity=capacity)

    def __len__(self) -> int:
        return len(self.X)

    def __getitem__(self, i: int) -> Solution:
        return Solution(self.X[i], self.F[i], self.G[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def members(self) -> list[Solution]:
        return list(self)

    @property
    def feasible(self) -> np.ndarray:
        return self.cv == 0.0

    def take(self, idx, capacity: int | None = None) -> Archive:
        """Copy of the rows selected by ``idx`` (indices or boolean mask)."""
        idx = np.asarray(idx)
        return Archive(
            self.X[idx], self.F[idx], self.G[idx],
            capacity=self.capacity if capacity is None else capacity,
            cv=self.cv[idx],
        )

    def concat(self, other: Archive) -> Archive:
        return Archive(
            np.vstack([self.X, other.X]),
            np.vstack([self.F, other.F]),
            np.vstack([self.G, other.G]),
            capacity=self.capacity,
            cv=np.concatenate([self.cv, other.cv]),
        )

    def with_violations(self, G) -> Archive:
        """Same members with replaced constraint data (used by metamorphic tests)."""
        return Archive(self.X, self.F, G, capacity=self.capacity)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Archive):
            return NotImplemented
        return (
            self.capacity == other.capacity
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.F, other.F)
            and np.array_equal(self.G, other.G)
        )

    def __repr__(self) -> str:
        return f"Archive(size={len(self)}, capacity={self.capacity}, feasible={int(self.feasible.sum())})"
