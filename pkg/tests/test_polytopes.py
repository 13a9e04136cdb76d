import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noregret_stackelberg import (
    InvalidInputError,
    JointDistribution,
    MixedProfile,
    MixedStrategy,
    ce2_game,
    induce_game,
    random_game,
)
from noregret_stackelberg.equilibria import (
    CED,
    HANNAN,
    build_ced_system,
    build_hannan_system,
    build_system,
    l1_distance_to_set,
    min_or_max_over_polytope,
    mixed_nash_support_enumeration,
    optimize_over_polytope,
)

from oracles import brute_l1_distance_2x2, ce_rows, highs_l1_distance, grid_min_over_polytope_4, hannan_rows

E = MixedStrategy(2, [1.0])


def test_rows_match_profilewise_construction():
    for seed in range(5):
        g = random_game((2, 3, 2), seed=seed)
        ced = build_ced_system(g)
        rows = ced.A_ub[len(ced.b_ub) - len(ce_rows(g)):]
        assert np.allclose(np.sort(rows, axis=0), np.sort(ce_rows(g), axis=0))
        han = build_hannan_system(g)
        hrows = han.A_ub[len(han.b_ub) - len(hannan_rows(g)):]
        assert np.allclose(np.sort(hrows, axis=0), np.sort(hannan_rows(g), axis=0))


def test_unknown_kind():
    with pytest.raises(InvalidInputError):
        build_system(ce2_game(), "nash")
    with pytest.raises(InvalidInputError):
        optimize_over_polytope(ce2_game(), E, CED, "sideways")


def test_ce2_extremes():
    g = ce2_game()
    assert min_or_max_over_polytope(g, E, CED, "min") == pytest.approx(-1 / 3, abs=1e-9)
    assert min_or_max_over_polytope(g, E, CED, "max") == pytest.approx(1 / 3, abs=1e-9)
    assert min_or_max_over_polytope(g, E, HANNAN, "min") == pytest.approx(-1 / 3, abs=1e-9)


def test_ce2_minimizer_is_the_cycle_frequency():
    res = optimize_over_polytope(ce2_game(), E, CED, "min")
    assert np.allclose(res.x, [1 / 3, 0, 1 / 3, 1 / 3], atol=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_minimum_matches_grid_oracle(seed):
    g = random_game((2, 2, 2), seed=seed)
    alpha = MixedStrategy(2, [0.4, 0.6])
    h = induce_game(g, alpha)
    for kind, rows in ((CED, ce_rows(h)), (HANNAN, hannan_rows(h))):
        lp = min_or_max_over_polytope(g, alpha, kind, "min")
        brute, _ = grid_min_over_polytope_4(rows, h.leader_payoff.ravel(), 1 / 200)
        # the grid optimum is feasible, so never below the LP optimum
        assert brute >= lp - 1e-9
        assert brute - lp <= 0.02


def test_hannan_contains_correlated():
    for seed in range(10):
        g = random_game((2, 2, 2), seed=seed)
        alpha = MixedStrategy(2, [0.5, 0.5])
        lo_c = min_or_max_over_polytope(g, alpha, CED, "min")
        lo_h = min_or_max_over_polytope(g, alpha, HANNAN, "min")
        hi_c = min_or_max_over_polytope(g, alpha, CED, "max")
        hi_h = min_or_max_over_polytope(g, alpha, HANNAN, "max")
        assert lo_h <= lo_c + 1e-9 and hi_c <= hi_h + 1e-9


def test_nash_products_are_correlated_equilibria():
    for seed in range(10):
        g = random_game((2, 3, 2), seed=seed)
        alpha = MixedStrategy(2, [0.3, 0.7])
        h = induce_game(g, alpha)
        system = build_ced_system(h)
        for eq in mixed_nash_support_enumeration(h):
            assert system.is_feasible(JointDistribution.product(eq).flat, 1e-7)


def test_distance_zero_inside_and_exact_outside():
    g = ce2_game()
    inside = JointDistribution.from_flat((0, 1), (2, 2), [1 / 3, 0, 1 / 3, 1 / 3])
    d, proj = l1_distance_to_set(inside, g, E, CED)
    assert d == pytest.approx(0.0, abs=1e-12)
    # (T,R) is not a correlated equilibrium: both learners regret it
    outside = JointDistribution.point_mass((0, 1), (2, 2), (0, 1))
    d, proj = l1_distance_to_set(outside, g, E, CED)
    assert abs(d - np.abs(proj.flat - outside.flat).sum()) <= 1e-9
    assert build_ced_system(induce_game(g, E)).is_feasible(proj.flat, 1e-9)
    assert d == pytest.approx(highs_l1_distance(outside.flat, ce_rows(induce_game(g, E))), abs=1e-7)
    assert d == pytest.approx(brute_l1_distance_2x2(outside.flat, ce_rows(induce_game(g, E))), abs=0.02)


point4 = st.lists(st.integers(0, 20), min_size=4, max_size=4).filter(lambda v: sum(v) > 0)


@settings(max_examples=15, deadline=None)
@given(counts=point4, seed=st.integers(0, 50))
def test_distance_properties(counts, seed):
    g = random_game((2, 2, 2), seed=seed)
    alpha = MixedStrategy(2, [0.5, 0.5])
    z = JointDistribution.from_flat((0, 1), (2, 2), np.array(counts) / sum(counts))
    d, proj = l1_distance_to_set(z, g, alpha, CED)
    h = induce_game(g, alpha)
    assert 0 <= d <= 2 + 1e-9
    assert build_ced_system(h).is_feasible(proj.flat, 1e-8)
    assert d == pytest.approx(highs_l1_distance(z.flat, ce_rows(h)), abs=1e-7)
    # grid points of the polytope are feasible, so never closer than the optimum
    brute = brute_l1_distance_2x2(z.flat, ce_rows(h), step=0.05)
    assert d <= brute + 1e-9
    d_h, _ = l1_distance_to_set(z, g, alpha, HANNAN)
    assert d_h <= d + 1e-9


def test_distance_validates_scope():
    g = ce2_game()
    with pytest.raises(InvalidInputError):
        l1_distance_to_set(JointDistribution.point_mass((0,), (2,), (0,)), g, E, CED)
