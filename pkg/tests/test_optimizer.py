import numpy as np
import pytest

from ctaea.core import Archive, InvalidConfigError, InvalidInputError, make_rng
from ctaea.decomposition import generate_weights, scaling_bounds
from ctaea.optimizer import (
    CtaeaConfig,
    initialize,
    mating_proportions,
    mating_sources,
    restricted_mating,
    run,
    tournament_select,
    update_ca,
    update_da,
)
from ctaea.problems import make_problem

W5 = generate_weights(2, 4)  # (0,1) (.25,.75) (.5,.5) (.75,.25) (1,0)
UNIT = scaling_bounds(np.zeros((1, 2)))


def _arc(F, cv=None, capacity=None, x=None):
    F = np.asarray(F, dtype=float)
    cv = np.zeros(len(F)) if cv is None else np.asarray(cv, dtype=float)
    X = np.arange(len(F), dtype=float)[:, None] if x is None else np.asarray(x, dtype=float)
    return Archive(X, F, cv[:, None], capacity=capacity)


def _rows(arc):
    return sorted(map(tuple, arc.F.tolist()))


def test_initialize_counts_and_bounds():
    p = make_problem("c1-dtlz3", 3)
    state = initialize(p, CtaeaConfig(), make_rng(1))
    assert len(state.ca) == len(state.da) == 91
    assert state.evaluations_used == 182
    small = make_problem("dtlz2", 2)
    s5 = initialize(small, CtaeaConfig(weight_resolution=4), make_rng(1))
    assert len(s5.ca) == 5
    for arc in (s5.ca, s5.da):
        assert np.all((arc.X >= 0) & (arc.X <= 1))


def test_initialize_is_deterministic():
    p = make_problem("c2-dtlz2", 3)
    a = initialize(p, CtaeaConfig(), make_rng(7))
    b = initialize(p, CtaeaConfig(), make_rng(7))
    assert a.ca == b.ca and a.da == b.da


@pytest.mark.parametrize("kwargs", [
    {"pop_size": 90},
    {"offspring_size": 92},
    {"max_evaluations": 181},
])
def test_config_validation(kwargs):
    with pytest.raises(InvalidConfigError):
        initialize(make_problem("dtlz2", 3), CtaeaConfig(**kwargs), make_rng(0))


def test_unknown_variant_rejected():
    with pytest.raises(InvalidConfigError):
        CtaeaConfig(variant="variant-3")


def test_update_ca_exactly_n_feasible():
    F = [[0, 10], [2.5, 7.5], [5, 5], [7.5, 2.5], [10, 0]]
    ca = _arc(F[:3], capacity=5)
    off = _arc(F[3:] + [[1, 1]], cv=[0, 0, 4.0])
    new = update_ca(ca, off, W5)
    assert _rows(new) == sorted(map(tuple, np.asarray(F, dtype=float).tolist()))


def test_update_ca_deletes_worse_of_closest_pair():
    # (5,5) and (4.6,5.4) share the middle subregion and are each other's nearest
    # neighbours; Tchebycheff values are 10 and 10.8
    F = [[0, 10], [2.5, 7.5], [5, 5], [7.5, 2.5], [10, 0], [4.6, 5.4]]
    new = update_ca(_arc(F[:5], capacity=5), _arc(F[5:]), W5)
    assert _rows(new) == sorted(map(tuple, np.asarray(F[:5], dtype=float).tolist()))


def test_update_ca_variant_one_ignores_distance():
    # middle subregion: (5,5) g=10, (5.2,4.8) g=10.4, (4.2,5.6) g=11.2; the first
    # two are the closest pair
    F = [[0, 10], [5, 5], [7.5, 2.5], [10, 0], [5.2, 4.8], [4.2, 5.6]]
    ca = _arc(F[:5], capacity=5)
    off = _arc(F[5:])
    full = update_ca(ca, off, W5, UNIT)
    v1 = update_ca(ca, off, W5, UNIT, variant="variant-1")
    assert (4.2, 5.6) not in _rows(v1) and (5.2, 4.8) in _rows(v1)
    assert (5.2, 4.8) not in _rows(full) and (4.2, 5.6) in _rows(full)
    assert len(full) == len(v1) == 5


def test_update_ca_infeasible_branch_trims_largest_cv():
    feas = [[0.1, 0.9], [0.9, 0.1]]
    inf = [[5, 5], [4, 4], [3, 3], [2, 2], [1, 1]]
    cvs = [1.0, 2.0, 3.0, 9.0, 9.5]
    ca = _arc(feas + inf[:3], cv=[0, 0] + cvs[:3], capacity=5)
    off = _arc(inf[3:], cv=cvs[3:])
    new = update_ca(ca, off, W5, UNIT)
    assert sorted(new.cv.tolist()) == [0.0, 0.0, 1.0, 2.0, 3.0]
    same = update_ca(ca, off, W5, UNIT, variant="variant-1")
    assert same == new


def test_update_da_quota_counts_ca_members_and_stops_at_n():
    # all five CA members sit in subregion 0; H_d has two members in every subregion
    ca = _arc([[0.0, 1.0]] * 5, capacity=5)
    good = W5.vectors * 1.0
    bad = W5.vectors * 1.5
    new = update_da(ca, _arc(good, capacity=5), _arc(bad), W5)
    # round 1 fills subregions 1..4, round 2 stops after subregion 1
    expected = good[1:].tolist() + [bad[1].tolist()]
    assert _rows(new) == sorted(map(tuple, expected))
    over = update_da(ca, _arc(good, capacity=5), _arc(bad), W5, overshoot=True)
    assert len(over) == 8


def test_update_da_first_round_skips_covered_subregions():
    ca = _arc(W5.vectors, capacity=5)
    da = _arc(W5.vectors * 2.0, capacity=5)
    off = _arc(np.empty((0, 2)))
    new = update_da(ca, da, off, W5)
    assert _rows(new) == _rows(da)


def test_update_da_promotes_smaller_tchebycheff():
    # both in the (0,1) subregion, non-dominated, g^tch 2 and 7 under unit scaling
    ca = _arc([[0.25, 0.75], [0.5, 0.5], [0.75, 0.25], [1.0, 0.0], [0.5, 0.5]], capacity=5)
    da = _arc([[0.0, 7.0], [0.02, 2.0], [0.25, 0.75], [0.5, 0.5], [0.75, 0.25]], capacity=5)
    new = update_da(ca, da, _arc(np.empty((0, 2))), W5, UNIT)
    assert (0.02, 2.0) in _rows(new)
    assert len(new) == 5


def test_update_da_is_constraint_blind():
    rng = make_rng(5)
    w = generate_weights(3)
    ca = _arc(rng.random((91, 3)), cv=rng.random(91) * (rng.random(91) < 0.5), capacity=91)
    cv_da = rng.random(91) * (rng.random(91) < 0.5)
    cv_off = rng.random(91)
    Fd, Fo = rng.random((91, 3)) * 2, rng.random((91, 3)) * 2
    base = update_da(ca, _arc(Fd, cv_da, 91), _arc(Fo, cv_off), w)
    scaled = update_da(ca, _arc(Fd, cv_da * 10, 91), _arc(Fo, cv_off * 10), w)
    assert np.array_equal(base.F, scaled.F) and np.array_equal(base.X, scaled.X)


def test_tournament_examples():
    rng = make_rng(0)
    mixed = _arc([[5, 5], [0, 0]], cv=[0.0, 1.0])
    assert all(tournament_select(mixed, rng).f.tolist() == [5.0, 5.0] for _ in range(50))
    dom = _arc([[0, 0], [1, 1]])
    assert all(tournament_select(dom, rng).f.tolist() == [0.0, 0.0] for _ in range(50))
    inc = _arc([[0, 1], [1, 0]])
    wins = sum(tournament_select(inc, rng).f[0] == 0.0 for _ in range(10_000))
    assert abs(wins / 10_000 - 0.5) <= 0.02
    with pytest.raises(InvalidInputError):
        tournament_select(_arc([[0, 0]]), rng)


def test_mating_degenerate_proportions():
    front = _arc([[0, 1], [0.5, 0.5], [1, 0]])
    behind = _arc([[2, 2], [3, 3], [2, 3]])
    rng = make_rng(1)
    assert mating_proportions(behind, front) == (0.0, 0.5)
    s1, s2 = mating_sources(behind, front, 1000, rng)
    assert not s1.any() and not s2.any()
    # rho_c is a share of |CA u DA|, so it tops out at 1/2 here
    assert mating_proportions(front, behind) == (0.5, 0.0)
    s1, s2 = mating_sources(front, behind, 10_000, rng)
    assert s1.all() and abs(s2.mean() - 0.5) <= 0.02


def test_mating_second_parent_frequency():
    line = np.linspace(0, 1, 10)
    F = np.column_stack([line, 1 - line])
    ca, da = _arc(F[:6]), _arc(F[6:])
    assert mating_proportions(ca, da) == (0.6, 0.4)
    s1, s2 = mating_sources(ca, da, 10_000, make_rng(2))
    assert s1.all()
    assert abs(s2.mean() - 0.6) <= 0.02
    v1, v2 = mating_sources(ca, da, 10_000, make_rng(2), "variant-2")
    assert abs(v1.mean() - 0.5) <= 0.02 and abs(v2.mean() - 0.5) <= 0.02
    p1, p2 = restricted_mating(ca, da, make_rng(3))
    assert p1.f[0] < 0.6


def test_mating_variant_one_unchanged():
    line = np.linspace(0, 1, 10)
    F = np.column_stack([line, 1 - line])
    ca, da = _arc(F[:6]), _arc(F[6:])
    a = mating_sources(ca, da, 100, make_rng(4))
    b = mating_sources(ca, da, 100, make_rng(4), "variant-1")
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_budget_of_two_n_runs_no_generations():
    p = make_problem("c2-dtlz2", 3)
    cfg = CtaeaConfig(max_evaluations=182)
    rec = run(p, cfg, 3)
    init = initialize(p, cfg, make_rng(3))
    assert rec.final_ca == init.ca and rec.final_da == init.da
    assert [row["evaluations"] for row in rec.trace] == [182]


def test_archives_stay_full_and_feasibility_never_drops():
    p = make_problem("c1-dtlz3", 3)
    sizes, feasible = [], []

    def watch(state):
        sizes.append((len(state.ca), len(state.da)))
        feasible.append(int(state.ca.feasible.sum()))

    run(p, CtaeaConfig(max_evaluations=182 + 91 * 30, record_metrics=False), 1, on_generation=watch)
    assert sizes == [(91, 91)] * 30
    assert all(b >= a for a, b in zip(feasible, feasible[1:]))


@pytest.mark.parametrize("variant", ["full", "variant-1", "variant-2"])
def test_run_is_deterministic(variant):
    p = make_problem("dc2-dtlz1", 3)
    cfg = CtaeaConfig(max_evaluations=182 + 91 * 5, variant=variant)
    a, b = run(p, cfg, 11), run(p, cfg, 11)
    assert a.same_outcome(b)
    assert a.algorithm == ("ctaea" if variant == "full" else f"ctaea-{variant}")


def test_partial_last_batch_respects_budget():
    p = make_problem("dtlz2", 3)
    rec = run(p, CtaeaConfig(max_evaluations=182 + 91 + 40), 2)
    assert rec.trace[-1]["evaluations"] == 182 + 91 + 40
    assert len(rec.final_ca) == len(rec.final_da) == 91
