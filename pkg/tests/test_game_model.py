import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noregret_stackelberg import (
    GameSpec,
    InvalidInputError,
    JointDistribution,
    MixedProfile,
    MixedStrategy,
    best_reply_set,
    ce1_game,
    ce2_game,
    expected_utility,
    induce_game,
    random_game,
)
from noregret_stackelberg.game_model import (
    deviation_payoffs,
    expected_utility_joint,
    is_very_weakly_dominated,
    payoff_vector,
)
from noregret_stackelberg.games import matching_pennies


def test_flat_layout_last_player_fastest():
    g = ce1_game()
    assert g.shape == (2, 2, 1)
    assert g.payoffs[2][1, 0, 0] == -1.0  # (B, L, E)
    assert g.payoffs[2][1, 1, 0] == 1.0
    assert g.profile_index((1, 0, 0)) == 2
    assert g.action_index(1, "R") == 1


@pytest.mark.parametrize("labels, utils", [
    ([["a", "a"]], [[0, 0]]),
    ([["a"], []], [[0], [0]]),
    ([["a", "b"]], [[0, np.nan]]),
    ([["a", "b"]], [[0, 1, 2]]),
    ([["a", "b"], ["c"]], [[0, 1]]),
])
def test_invalid_games(labels, utils):
    with pytest.raises(InvalidInputError):
        GameSpec.from_flat(labels, utils)


def test_equality_is_structural():
    assert ce1_game() == ce1_game()
    assert ce1_game() != ce2_game()


@pytest.mark.parametrize("probs", [[0.5, 0.6], [-0.1, 1.1], [np.nan, 1.0], []])
def test_strategy_validation(probs):
    with pytest.raises(InvalidInputError):
        MixedStrategy(0, probs)


def test_strategy_sum_tolerance():
    MixedStrategy(0, [0.5, 0.5 + 1e-13])
    with pytest.raises(InvalidInputError):
        MixedStrategy(0, [0.5, 0.5 + 1e-11])


def test_pure_profile_utility_is_tensor_entry():
    g = random_game((2, 3, 2), seed=3)
    for z in g.profiles():
        prof = MixedProfile.pure(g, z)
        for i in range(3):
            assert expected_utility(g, prof, i) == pytest.approx(g.payoffs[i][z], abs=1e-15)


def _brute_expected(g, probs, player):
    total = 0.0
    for z in itertools.product(*[range(k) for k in g.shape]):
        w = np.prod([probs[i][a] for i, a in enumerate(z)])
        total += w * g.payoffs[player][z]
    return total


simplex = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=3).map(lambda v: np.array(v) / sum(v))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), data=st.data())
def test_expected_utility_matches_enumeration(seed, data):
    shape = tuple(data.draw(st.integers(1, 3)) for _ in range(data.draw(st.integers(1, 3))))
    g = random_game(shape, seed=seed)
    probs = []
    for k in shape:
        v = np.array(data.draw(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k)))
        probs.append(v / v.sum())
    prof = MixedProfile.from_probs(probs)
    for i in range(len(shape)):
        assert expected_utility(g, prof, i) == pytest.approx(_brute_expected(g, probs, i), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), a=simplex, b=simplex)
def test_best_reply_attains_max(seed, a, b):
    g = random_game((3, len(a), len(b)), seed=seed)
    others = MixedProfile((MixedStrategy(1, a), MixedStrategy(2, b)))
    br = best_reply_set(g, 0, others)
    v = payoff_vector(g, 0, others)
    assert br and all(v[x] >= v.max() - 1e-9 for x in br)
    for x in range(3):
        prof = MixedProfile((MixedStrategy.pure(0, x, 3),) + others.strategies)
        assert expected_utility(g, prof, 0) == pytest.approx(v[x], abs=1e-12)


def test_best_reply_ties_and_examples():
    mp = matching_pennies()
    uniform = MixedProfile((MixedStrategy(1, [0.5, 0.5]),))
    assert best_reply_set(mp, 0, uniform) == frozenset({0, 1})
    assert best_reply_set(mp, 0, MixedProfile((MixedStrategy.pure(1, 0, 2),))) == frozenset({0})
    with pytest.raises(InvalidInputError):
        best_reply_set(mp, 0, MixedProfile((MixedStrategy(0, [0.5, 0.5]),)))


def test_joint_distribution():
    prof = MixedProfile.from_probs([[0.25, 0.75], [1.0, 0.0]])
    d = JointDistribution.product(prof)
    assert d.flat.tolist() == [0.25, 0.0, 0.75, 0.0]
    with pytest.raises(InvalidInputError):
        JointDistribution((0,), np.array([0.5, 0.6]))
    with pytest.raises(InvalidInputError):
        JointDistribution((0, 1), np.array([0.5, 0.5]))


def test_expected_utility_joint_on_point_mass():
    g = ce2_game()
    alpha = MixedStrategy(2, [1.0])
    d = JointDistribution.point_mass((0, 1), (2, 2), (1, 0))
    assert expected_utility_joint(g, d, alpha, 2) == -1.0


def test_deviation_payoffs():
    g = ce2_game()
    assert deviation_payoffs(g, 0, (0, 1, 0)).tolist() == [0.0, 1.0]


def test_very_weak_dominance():
    # action 2 equals the average of actions 0 and 1 everywhere
    g = GameSpec.from_flat([["x", "y", "z"], ["l", "r"]], [[1, 0, 0, 1, 0.5, 0.5], [0] * 6])
    assert is_very_weakly_dominated(g, 0, "z")
    assert not is_very_weakly_dominated(g, 0, "x")
    # a copy of an action very weakly dominates it
    g2 = GameSpec.from_flat([["x", "y"], ["l", "r"]], [[1, 2, 1, 2], [0] * 4])
    assert is_very_weakly_dominated(g2, 0, 0) and is_very_weakly_dominated(g2, 0, 1)
    assert not is_very_weakly_dominated(matching_pennies(), 0, 0)


def test_induce_game():
    g = random_game((2, 2, 3), seed=1)
    alpha = MixedStrategy(2, [0.2, 0.3, 0.5])
    h = induce_game(g, alpha)
    assert h.shape == (2, 2)
    for z in h.profiles():
        want = sum(alpha.probs[c] * g.payoffs[0][z + (c,)] for c in range(3))
        assert h.payoffs[0][z] == pytest.approx(want, abs=1e-15)
        assert h.leader_payoff[z] == pytest.approx(sum(alpha.probs[c] * g.payoffs[2][z + (c,)] for c in range(3)))
    with pytest.raises(InvalidInputError):
        induce_game(g, MixedStrategy(2, [0.5, 0.5]))
