"""Weight vectors, objective normalisation and subregion association.

Each weight vector on the unit simplex defines one subregion of the objective
space: the cone of (normalised) objective vectors whose acute angle to that
weight is smaller than to any other weight.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import InvalidConfigError, InvalidInputError

SPAN_GUARD = 1e-12
WEIGHT_GUARD = 1e-6

# Default lattice resolution per objective count: an int H is a single layer,
# a (H_outer, H_inner) pair is the two-layer scheme used for many objectives.
DEFAULT_RESOLUTION: dict[int, int | tuple[int, int]] = {
    2: 99,
    3: 12,
    4: 8,
    5: 6,
    6: 4,
    7: 3,
    8: (3, 2),
    9: (3, 2),
    10: (3, 2),
}


def default_resolution(m: int) -> int | tuple[int, int]:
    if m < 2:
        raise InvalidConfigError(f"need at least two objectives, got m={m}")
    return DEFAULT_RESOLUTION.get(m, (2, 1))


def simplex_lattice(m: int, h: int) -> np.ndarray:
    """Das-Dennis lattice: every w with components in {0, 1/h, ..., 1} summing to 1.

    Rows are ordered so that the first component increases fastest to slowest
    in lexicographic order of the integer compositions.
    """
    if m < 1 or h < 0:
        raise InvalidConfigError(f"invalid lattice parameters m={m}, h={h}")
    if m == 1:
        return np.ones((1, 1))
    bars = np.array(list(itertools.combinations(range(h + m - 1), m - 1)), dtype=np.int64)
    bars = bars.reshape(-1, m - 1)
    edges = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), h + m - 1)])
    counts = np.diff(edges, axis=1) - 1
    return counts / h if h > 0 else np.full((1, m), 1.0 / m)


@dataclass(frozen=True)
class WeightVectorSet:
    vectors: np.ndarray

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def m(self) -> int:
        return self.vectors.shape[1]

    def to_csv(self, path: str | Path) -> None:
        write_matrix_csv(path, self.vectors, [f"w{j + 1}" for j in range(self.m)])

    @classmethod
    def from_csv(cls, path: str | Path) -> WeightVectorSet:
        return cls(read_matrix_csv(path)[1])


def generate_weights(m: int, resolution: int | tuple[int, int] | None = None) -> WeightVectorSet:
    """Build the weight set for ``m`` objectives.

    Args:
        m: Number of objectives.
        resolution: Lattice parameter H, or ``(H_outer, H_inner)`` for the
            two-layer set whose inner layer is shrunk halfway to the centroid.
            ``None`` picks :func:`default_resolution`.

    Raises:
        InvalidConfigError: If the resulting set has fewer than ``m`` vectors.
    """
    if resolution is None:
        resolution = default_resolution(m)
    if m < 2:
        raise InvalidConfigError(f"need at least two objectives, got m={m}")
    if isinstance(resolution, (tuple, list)):
        outer_h, inner_h = resolution
        outer = simplex_lattice(m, int(outer_h)) if outer_h > 0 else np.empty((0, m))
        inner = simplex_lattice(m, int(inner_h)) * 0.5 + 0.5 / m if inner_h > 0 else np.empty((0, m))
        stacked = np.vstack([outer, inner])
        # drop duplicates, keep outer-then-inner order
        _, first = np.unique(stacked.round(15), axis=0, return_index=True)
        vectors = stacked[np.sort(first)]
    else:
        if int(resolution) < 1:
            raise InvalidConfigError(f"lattice parameter must be >= 1, got {resolution}")
        vectors = simplex_lattice(m, int(resolution))
    if len(vectors) < m:
        raise InvalidConfigError(f"resolution {resolution} yields {len(vectors)} weights, fewer than m={m}")
    return WeightVectorSet(vectors)


@dataclass(frozen=True)
class NormalizationBounds:
    ideal: np.ndarray
    nadir: np.ndarray

    @property
    def span(self) -> np.ndarray:
        """nadir - ideal, with 1.0 substituted where the span is below 1e-12."""
        span = self.nadir - self.ideal
        return np.where(span < SPAN_GUARD, 1.0, span)


def update_bounds(F) -> NormalizationBounds:
    """Componentwise min (ideal) and max (nadir) over an objective matrix."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or len(F) == 0:
        raise InvalidInputError("update_bounds needs a non-empty (k, m) objective matrix")
    return NormalizationBounds(F.min(axis=0), F.max(axis=0))


SCALING_RULES = ("ideal", "minmax")


def scaling_bounds(F, rule: str = "ideal") -> NormalizationBounds:
    """Bounds used before association and scalarisation.

    ``"minmax"`` is :func:`update_bounds`. ``"ideal"`` only translates by the
    ideal point (unit span), which keeps a single dominance-resistant outlier
    such as ``(0, 0, 300)`` from squashing every other direction.
    """
    if rule == "minmax":
        return update_bounds(F)
    if rule != "ideal":
        raise InvalidConfigError(f"unknown scaling rule {rule!r}; expected one of {SCALING_RULES}")
    b = update_bounds(F)
    return NormalizationBounds(b.ideal, b.ideal + 1.0)


def normalize(F, bounds: NormalizationBounds) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if not np.all(np.isfinite(F)):
        raise InvalidInputError("objective values must be finite")
    return (F - bounds.ideal) / bounds.span


@dataclass(frozen=True)
class SubregionAssignment:
    """Association of a solution sequence with the subregions.

    Attributes:
        index: (k,) subregion index per solution.
        n_subregions: number of weight vectors N.
    """

    index: np.ndarray
    n_subregions: int

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.index, minlength=self.n_subregions)

    @property
    def members(self) -> list[np.ndarray]:
        order = np.argsort(self.index, kind="stable")
        splits = np.cumsum(self.counts)[:-1]
        return np.split(order, splits)


def _angles(V: np.ndarray, W: np.ndarray) -> np.ndarray:
    vnorm = np.linalg.norm(V, axis=1, keepdims=True)
    wnorm = np.linalg.norm(W, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosine = (V @ W.T) / (vnorm * wnorm)
    return np.arccos(np.clip(cosine, -1.0, 1.0))


def associate_normalized(Fn: np.ndarray, W: np.ndarray, raw: np.ndarray | None = None,
                         rule: str = "angle") -> np.ndarray:
    """Subregion index for each row of an already normalised objective matrix."""
    Fn = np.asarray(Fn, dtype=float).reshape(-1, W.shape[1])
    if rule == "angle":
        score = _angles(Fn, W)
    elif rule == "perpendicular":
        wn = W / np.linalg.norm(W, axis=1, keepdims=True)
        proj = Fn @ wn.T
        sq = np.einsum("ij,ij->i", Fn, Fn)[:, None] - proj**2
        score = np.sqrt(np.maximum(sq, 0.0))
    else:
        raise InvalidConfigError(f"unknown association rule {rule!r}")
    index = np.argmin(score, axis=1)
    zero = ~np.any(Fn != 0.0, axis=1)
    if zero.any():
        # Solution sits on the ideal point: fall back to the raw direction.
        fallback = np.zeros(int(zero.sum()), dtype=np.intp)
        if raw is not None:
            R = np.asarray(raw, dtype=float).reshape(-1, W.shape[1])[zero]
            ang = _angles(R, W)
            ok = np.any(R != 0.0, axis=1) & np.all(np.isfinite(ang), axis=1)
            fallback[ok] = np.argmin(ang[ok], axis=1)
        index[zero] = fallback
    return index.astype(np.intp)


def associate(F, weights: WeightVectorSet, bounds: NormalizationBounds,
              rule: str = "angle") -> SubregionAssignment:
    """Associate every objective vector with the subregion of smallest angle.

    Ties go to the lowest weight index. ``rule="perpendicular"`` switches to the
    distance from the normalised point to the ray through each weight.
    """
    F = np.asarray(F, dtype=float).reshape(-1, weights.m)
    W = weights.vectors
    index = associate_normalized(normalize(F, bounds), W, raw=F, rule=rule)
    return SubregionAssignment(index, len(W))


def tchebycheff(f, w, ideal) -> np.ndarray | float:
    """max_j |f_j - z*_j| / max(w_j, 1e-6); broadcasts over leading axes."""
    f = np.asarray(f, dtype=float)
    w = np.asarray(w, dtype=float)
    out = np.max(np.abs(f - np.asarray(ideal, dtype=float)) / np.maximum(w, WEIGHT_GUARD), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def pairwise_distances(P: np.ndarray) -> np.ndarray:
    """Symmetric Euclidean distance matrix (exactly symmetric, zero diagonal)."""
    diff = P[:, None, :] - P[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def crowding_distance_in_subregion(points) -> np.ndarray:
    """Distance from each member to its nearest other member; ``inf`` when alone."""
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P.reshape(1, -1)
    if len(P) == 0:
        raise InvalidInputError("subregion has no members")
    if len(P) == 1:
        return np.array([math.inf])
    D = pairwise_distances(P)
    np.fill_diagonal(D, np.inf)
    return D.min(axis=1)


def write_matrix_csv(path: str | Path, rows: np.ndarray, header: list[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in np.asarray(rows, dtype=float):
            writer.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))
