"""Pareto and constrained dominance, and fast non-dominated sorting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError, Solution
from .decomposition import tchebycheff

RELATIONS = ("pareto", "biobjective", "constrained")


def dominates(a, b) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and better somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidInputError(f"objective vectors differ in length: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def constrained_dominates(a: Solution, b: Solution) -> bool:
    """Feasible beats infeasible, lower CV wins among infeasible, Pareto among feasible."""
    cva, cvb = a.cv, b.cv
    if cva == 0 and cvb > 0:
        return True
    if cva > 0 and cvb > 0:
        return cva < cvb
    if cva == 0 and cvb == 0:
        return dominates(a.f, b.f)
    return False


def dominance_matrix(F) -> np.ndarray:
    """``D[i, j]`` is True when row i Pareto-dominates row j."""
    F = np.asarray(F, dtype=float)
    k = len(F)
    le = np.ones((k, k), dtype=bool)
    lt = np.zeros((k, k), dtype=bool)
    for j in range(F.shape[1]):
        col = F[:, j]
        le &= col[:, None] <= col[None, :]
        lt |= col[:, None] < col[None, :]
    return le & lt


def constrained_dominance_matrix(F, cv) -> np.ndarray:
    cv = np.asarray(cv, dtype=float)
    feas = cv == 0
    pareto = dominance_matrix(F)
    return (
        (feas[:, None] & ~feas[None, :])
        | (~feas[:, None] & ~feas[None, :] & (cv[:, None] < cv[None, :]))
        | (feas[:, None] & feas[None, :] & pareto)
    )


def nondominated_mask(F, chunk: int = 2048) -> np.ndarray:
    """Rows of ``F`` not dominated by any other row; chunked for large sets."""
    F = np.asarray(F, dtype=float)
    keep = np.ones(len(F), dtype=bool)
    for start in range(0, len(F), chunk):
        block = F[start:start + chunk]
        le = np.ones((len(F), len(block)), dtype=bool)
        lt = np.zeros((len(F), len(block)), dtype=bool)
        for j in range(F.shape[1]):
            a, b = F[:, j, None], block[None, :, j]
            le &= a <= b
            lt |= a < b
        keep[start:start + chunk] = ~np.any(le & lt, axis=0)
    return keep


@dataclass(frozen=True)
class FrontPartition:
    levels: list[np.ndarray]

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.levels[k]

    def rank(self) -> np.ndarray:
        """Level index (0-based) of every input element."""
        size = sum(len(lv) for lv in self.levels)
        out = np.empty(size, dtype=np.intp)
        for k, lv in enumerate(self.levels):
            out[lv] = k
        return out


def sort_by_matrix(D: np.ndarray) -> FrontPartition:
    """Peel non-domination levels off a dominance matrix, indices ascending per level."""
    remaining = D.sum(axis=0).astype(np.int64)
    assigned = np.zeros(len(D), dtype=bool)
    levels = []
    while not assigned.all():
        level = np.flatnonzero((remaining == 0) & ~assigned)
        if len(level) == 0:
            raise InvalidInputError("dominance relation contains a cycle")
        levels.append(level)
        assigned[level] = True
        remaining -= D[level].sum(axis=0)
    return FrontPartition(levels)


def fast_nondominated_sort(F, relation: str = "pareto", cv=None) -> FrontPartition:
    """Partition points into non-domination levels.

    Args:
        F: (k, m) objective matrix; for ``relation="biobjective"`` the rows are
            the (CV, Tchebycheff) pairs from :func:`biobjective_view`.
        relation: ``"pareto"``, ``"biobjective"`` or ``"constrained"``.
        cv: (k,) aggregate violations, required for ``"constrained"``.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F.reshape(-1, 1)
    if len(F) == 0:
        return FrontPartition([])
    if relation in ("pareto", "biobjective"):
        D = dominance_matrix(F)
    elif relation == "constrained":
        if cv is None:
            raise InvalidInputError("constrained sorting needs the CV vector")
        D = constrained_dominance_matrix(F, cv)
    else:
        raise InvalidInputError(f"unknown dominance relation {relation!r}")
    return sort_by_matrix(D)


def biobjective_view(solution: Solution, w, ideal) -> np.ndarray:
    """(CV, Tchebycheff value w.r.t. the solution's subregion weight)."""
    return np.array([solution.cv, tchebycheff(solution.f, w, ideal)])
