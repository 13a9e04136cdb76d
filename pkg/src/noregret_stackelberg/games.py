"""Built-in game fixtures and random game generators."""

from __future__ import annotations

import numpy as np

from .game_model import GameSpec

# Two learners (T/B and L/R) and an optimizer with the single action E.
_LEARNER_ACTIONS = (("T", "B"), ("L", "R"), ("E",))
# Flat order (T,L), (T,R), (B,L), (B,R); learners share the coordination payoff.
_COORDINATION = [1.0, 0.0, 0.0, 1.0]


def ce1_game() -> GameSpec:
    """Coordination between two learners; the optimizer prefers (B,R)."""
    return GameSpec.from_flat(
        _LEARNER_ACTIONS,
        [_COORDINATION, _COORDINATION, [0.0, 0.0, -1.0, 1.0]],
    )


def ce2_game() -> GameSpec:
    """Same learners; the optimizer gains on (T,R), loses on (B,L)."""
    return GameSpec.from_flat(
        _LEARNER_ACTIONS,
        [_COORDINATION, _COORDINATION, [0.0, 1.0, -1.0, 0.0]],
    )


BUILTIN_GAMES = {"ce1": ce1_game, "ce2": ce2_game}


def builtin_game(name: str) -> GameSpec:
    try:
        return BUILTIN_GAMES[name]()
    except KeyError:
        raise KeyError(f"unknown built-in game {name!r}; choose from {sorted(BUILTIN_GAMES)}") from None


def random_game(shape, seed=None, low=0.0, high=1.0) -> GameSpec:
    """Game with i.i.d. uniform utilities on ``[low, high)``."""
    rng = np.random.default_rng(seed)
    shape = tuple(int(k) for k in shape)
    labels = [[f"a{i}_{j}" for j in range(k)] for i, k in enumerate(shape)]
    payoffs = rng.uniform(low, high, size=(len(shape),) + shape)
    return GameSpec(labels, payoffs)


def matching_pennies() -> GameSpec:
    return GameSpec.from_flat(
        [["H", "T"], ["H", "T"]],
        [[1.0, -1.0, -1.0, 1.0], [-1.0, 1.0, 1.0, -1.0]],
    )
