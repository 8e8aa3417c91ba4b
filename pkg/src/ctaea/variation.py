"""Simulated binary crossover and polynomial mutation for real vectors.

Both operators accept a single vector or a (rows, n) matrix and always consume
the same number of random draws for a given shape, whatever the probabilities,
so that a run's random stream does not depend on parameter values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidConfigError, InvalidInputError


@dataclass(frozen=True)
class VariationParams:
    crossover_prob: float = 1.0
    crossover_eta: float = 30.0
    mutation_prob: float | None = None  # None means 1/n
    mutation_eta: float = 20.0

    def __post_init__(self) -> None:
        probs = [self.crossover_prob] + ([] if self.mutation_prob is None else [self.mutation_prob])
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise InvalidConfigError("variation probabilities must lie in [0, 1]")
        if self.crossover_eta <= 0 or self.mutation_eta <= 0:
            raise InvalidConfigError("distribution indices must be positive")

    def mutation_rate(self, n: int) -> float:
        return 1.0 / n if self.mutation_prob is None else self.mutation_prob


def _as_rows(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return (arr.reshape(1, -1), True) if arr.ndim == 1 else (arr, False)


def sbx(parent1, parent2, params: VariationParams, lower, upper, rng: np.random.Generator,
        clip: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover.

    Draw order per call: one uniform per row (crossover happens?), then a
    (rows, n) block of uniforms choosing which variables cross, a (rows, n)
    block for the spread factor and a (rows, n) block deciding, per crossed
    variable, whether the two children exchange values.

    Returns:
        The two children, clamped to ``[lower, upper]`` unless ``clip=False``.
    """
    p1, single = _as_rows(parent1)
    p2, _ = _as_rows(parent2)
    if p1.shape != p2.shape:
        raise InvalidInputError(f"parents differ in shape: {p1.shape} vs {p2.shape}")
    rows, n = p1.shape
    do_cross = rng.random(rows) < params.crossover_prob
    swap_var = rng.random((rows, n)) < 0.5
    u = rng.random((rows, n))
    exchange = rng.random((rows, n)) < 0.5

    expo = 1.0 / (params.crossover_eta + 1.0)
    beta = np.where(u <= 0.5, (2.0 * u) ** expo, (1.0 / (2.0 * (1.0 - u))) ** expo)
    active = do_cross[:, None] & swap_var & (np.abs(p1 - p2) > 1e-14)
    beta = np.where(active, beta, 1.0)
    c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    c2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    c1, c2 = np.where(exchange, c2, c1), np.where(exchange, c1, c2)
    c1 = np.where(active, c1, p1)
    c2 = np.where(active, c2, p2)
    if clip:
        c1 = np.clip(c1, lower, upper)
        c2 = np.clip(c2, lower, upper)
    return (c1[0], c2[0]) if single else (c1, c2)


def polynomial_mutation(x, params: VariationParams, lower, upper, rng: np.random.Generator) -> np.ndarray:
    """Bounded polynomial mutation (Deb's form).

    Draw order: a (rows, n) block deciding which variables mutate, then a
    (rows, n) block for the perturbation.
    """
    X, single = _as_rows(x)
    rows, n = X.shape
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (n,))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (n,))
    mutate = rng.random((rows, n)) < params.mutation_rate(n)
    r = rng.random((rows, n))

    span = upper - lower
    eta1 = params.mutation_eta + 1.0
    d1 = (X - lower) / span
    d2 = (upper - X) / span
    low_side = r < 0.5
    with np.errstate(invalid="ignore"):
        val_lo = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1) ** eta1
        val_hi = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2) ** eta1
        deltaq = np.where(low_side, val_lo ** (1.0 / eta1) - 1.0, 1.0 - val_hi ** (1.0 / eta1))
    Y = np.where(mutate, X + deltaq * span, X)
    Y = np.clip(Y, lower, upper)
    return Y[0] if single else Y
