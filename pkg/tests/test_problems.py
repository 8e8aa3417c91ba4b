import math

import numpy as np
import pytest
from scipy.optimize import brentq

from ctaea.core import InvalidInputError, UnsupportedProblemError, make_rng
from ctaea.problems import (
    PROBLEM_NAMES,
    ReferenceFront,
    _positions_linear,
    _positions_sphere,
    dtlz_objectives,
    hv_reference_point,
    make_problem,
    sample_reference_front,
)
from ctaea.ranking import nondominated_mask


def _front_residuals(problem, P):
    """Residuals at front points, using the analytic preimage where one exists."""
    if problem.family.startswith("c3"):
        return problem.residuals(np.zeros((len(P), problem.n)), P, np.zeros(len(P)))
    pos = _positions_linear(P) if problem.base == "dtlz1" else _positions_sphere(P)
    X = problem.optimal_preimage(pos)
    F, g = dtlz_objectives(problem.base, X, problem.m)
    return problem.residuals(X, F, g)


def test_dtlz2_distance_variables_at_half_land_on_sphere():
    p = make_problem("dtlz2", 3)
    x = np.full(p.n, 0.5)
    x[:2] = [0.3, 0.7]
    s = p.evaluate(x)
    assert np.sum(s.f**2) == pytest.approx(1.0, abs=1e-12)
    assert s.feasible


def test_c1_dtlz3_hand_examples():
    p = make_problem("c1-dtlz3", 2)
    assert p.params["r"] == 6.0
    X = np.zeros((2, p.n))
    F = np.array([[4.0, 0.0], [3.0, 4.0]])
    c = p.residuals(X, F, np.zeros(2))[:, 0]
    assert c.tolist() == [0.0, -99.0]


def test_c1_dtlz3_evaluated_point_on_inner_sphere_is_feasible():
    p = make_problem("c1-dtlz3", 2)
    # one distance variable moved so that g = 3, i.e. ||f|| = 4
    y = brentq(lambda t: 100.0 * (t * t + 1.0 - math.cos(20.0 * math.pi * t)) - 3.0, 0.0, 0.025, xtol=1e-15)
    x = np.full(p.n, 0.5)
    x[0], x[1] = 0.4, 0.5 + y
    s = p.evaluate(x)
    assert np.sum(s.f**2) == pytest.approx(16.0, abs=1e-9)
    assert s.cv == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_feasibility_iff_zero_cv_on_random_points(name):
    p = make_problem(name, 3)
    X = make_rng(11).random((10_000, p.n))
    F, G = p.evaluate_batch(X)
    _, g = dtlz_objectives(p.base, X, p.m)
    residual_ok = np.all(p.residuals(X, F, g) >= 0.0, axis=1)
    assert np.all(np.isfinite(F)) and np.all(G >= 0.0)
    assert np.array_equal(residual_ok, G.sum(axis=1) == 0.0)


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_construction_scales_to_fifteen_objectives(name):
    for m in range(2, 16):
        p = make_problem(name, m)
        assert p.n >= m
        F, G = p.evaluate_batch(make_rng(m).random((3, p.n)))
        assert F.shape == (3, m) and np.all(np.isfinite(F))
        assert G.shape == (3, p.n_constraints)


@pytest.mark.parametrize("bad", [np.full(12, 1.5), np.full(5, 0.5), np.full(12, np.nan)])
def test_evaluate_rejects_bad_input(bad):
    with pytest.raises(InvalidInputError):
        make_problem("dtlz2", 3).evaluate(bad)


def test_unknown_problem_and_parameter():
    with pytest.raises(UnsupportedProblemError):
        make_problem("zdt1")
    with pytest.raises(InvalidInputError):
        make_problem("c2-dtlz2", 3, radius=0.2)


def test_dtlz1_front_example():
    front = sample_reference_front(make_problem("dtlz1", 2), 100)
    assert len(front) == 100
    assert np.allclose(front.points.sum(axis=1), 0.5, atol=1e-12)
    assert np.all(front.points >= 0.0)


def test_c2_dtlz2_front_points_lie_near_a_centre():
    p = make_problem("c2-dtlz2", 2)
    P = sample_reference_front(p, 500).points
    centres = np.array([[1.0, 0.0], [0.0, 1.0], [1 / math.sqrt(2), 1 / math.sqrt(2)]])
    d = np.linalg.norm(P[:, None, :] - centres[None], axis=2).min(axis=1)
    assert np.all(d <= 0.1 + 1e-9)
    assert len(P) >= 500


def test_c1_dtlz3_front_is_whole_sphere_octant():
    p = make_problem("c1-dtlz3", 3)
    full = sample_reference_front(make_problem("dtlz3", 3), 2000).points
    kept = sample_reference_front(p, 2000).points
    assert len(kept) == len(full)
    assert np.allclose(np.sum(kept**2, axis=1), 1.0)


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_reference_fronts_are_feasible_and_nondominated(name):
    p = make_problem(name, 3)
    P = sample_reference_front(p, 2000).points
    assert len(P) >= 2000
    assert np.all(_front_residuals(p, P) >= -1e-9)
    assert nondominated_mask(P).all()


def test_ten_thousand_point_front_for_m3():
    front = sample_reference_front(make_problem("dtlz2", 3))
    assert len(front) >= 10_000


def test_front_csv_round_trip(tmp_path):
    front = sample_reference_front(make_problem("c2-dtlz2", 3), 300)
    front.to_csv(tmp_path / "front.csv")
    again = ReferenceFront.from_csv(tmp_path / "front.csv")
    assert np.array_equal(again.points, front.points)


def test_c2_dtlz2_has_three_feasible_segments_for_two_objectives():
    p = make_problem("c2-dtlz2", 2)
    grid = np.linspace(0.0, 1.0, 20_001)[:, None]
    _, G = p.evaluate_batch(p.optimal_preimage(grid))
    feasible = G[:, 0] == 0.0
    segments = int(feasible[0]) + int(np.sum(feasible[1:] & ~feasible[:-1]))
    assert segments == 3


def test_dc1_feasible_positions_form_bands():
    p = make_problem("dc1-dtlz1", 3)
    x1 = np.linspace(0.0, 1.0, 10_001)
    X = np.full((len(x1), p.n), 0.5)
    X[:, 0] = x1
    _, G = p.evaluate_batch(X)
    feasible = G.sum(axis=1) == 0.0
    bands = int(feasible[0]) + int(np.sum(feasible[1:] & ~feasible[:-1]))
    assert bands >= 2 and not feasible.all()


def test_dc2_band_constraint_fluctuates_on_approach():
    p = make_problem("dc2-dtlz1", 3)
    g = np.linspace(0.6, 0.0, 2001)
    band = p.residuals(np.zeros((len(g), p.n)), np.zeros((len(g), 3)), g)[:, 0]
    flips = np.sum(np.sign(band[1:]) != np.sign(band[:-1]))
    assert flips >= 2


def test_hv_reference_points():
    assert hv_reference_point(make_problem("c1-dtlz3", 3)).tolist() == [1.1] * 3
    assert hv_reference_point(make_problem("c3-dtlz4", 3)).tolist() == [2.1] * 3
