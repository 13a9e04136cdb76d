"""Correlated-equilibrium and Hannan-set polytopes as linear systems.

Variables are the probabilities of the game's pure profiles in flat
lexicographic order.
"""

from __future__ import annotations

import numpy as np

from ..errors import InternalInvariantError, InvalidInputError
from ..game_model import GameSpec, JointDistribution, MixedStrategy, induce_game
from ..lp import LinearSystem, LPResult, lp_solve

CED = "ced"
HANNAN = "hannan"
SET_KINDS = (CED, HANNAN)


def simplex_system(num_vars: int) -> LinearSystem:
    """Probability simplex: ``x >= 0`` and ``sum(x) == 1``."""
    return LinearSystem(
        num_vars,
        -np.eye(num_vars),
        np.zeros(num_vars),
        np.ones((1, num_vars)),
        np.ones(1),
    )


def _swap_rows(game: GameSpec) -> np.ndarray:
    rows = []
    for i in range(game.num_players):
        u = game.payoffs[i]
        k = game.num_actions(i)
        for a in range(k):
            u_a = np.take(u, [a], axis=i)
            for b in range(k):
                if b == a:
                    continue
                coef = np.zeros(game.shape)
                sl = [slice(None)] * game.num_players
                sl[i] = slice(a, a + 1)
                coef[tuple(sl)] = np.take(u, [b], axis=i) - u_a
                rows.append(coef.ravel())
    return np.array(rows).reshape(len(rows), game.num_profiles)


def _hannan_rows(game: GameSpec) -> np.ndarray:
    rows = []
    for i in range(game.num_players):
        u = game.payoffs[i]
        for b in range(game.num_actions(i)):
            dev = np.broadcast_to(np.take(u, [b], axis=i), game.shape)
            rows.append((dev - u).ravel())
    return np.array(rows).reshape(len(rows), game.num_profiles)


def build_ced_system(game: GameSpec) -> LinearSystem:
    """For every player and ordered pair ``a != a'``: switching from ``a``
    to ``a'`` whenever ``a`` is recommended does not pay."""
    rows = _swap_rows(game)
    return simplex_system(game.num_profiles).stack(
        LinearSystem(game.num_profiles, rows, np.zeros(len(rows)))
    )


def build_hannan_system(game: GameSpec) -> LinearSystem:
    """For every player and action ``a'``: always playing ``a'`` does not pay."""
    rows = _hannan_rows(game)
    return simplex_system(game.num_profiles).stack(
        LinearSystem(game.num_profiles, rows, np.zeros(len(rows)))
    )


def build_system(game: GameSpec, set_kind: str) -> LinearSystem:
    if set_kind == CED:
        return build_ced_system(game)
    if set_kind == HANNAN:
        return build_hannan_system(game)
    raise InvalidInputError(f"unknown set kind {set_kind!r}; expected one of {SET_KINDS}")


def optimize_over_polytope(
    game: GameSpec, alpha: MixedStrategy, set_kind: str, direction: str = "min"
) -> LPResult:
    """Optimize the optimizer's payoff over the learners' polytope in the
    game induced by ``alpha``. ``x`` of the result is the optimal learner
    distribution (flat)."""
    if direction not in ("min", "max"):
        raise InvalidInputError(f"direction must be 'min' or 'max', got {direction!r}")
    induced = induce_game(game, alpha)
    res = lp_solve(
        induced.leader_payoff.ravel(),
        build_system(induced, set_kind),
        maximize=direction == "max",
    )
    if res.status != "optimal":
        # the correlated-equilibrium polytope of a finite game is never empty
        raise InternalInvariantError(f"polytope LP returned {res.status}")
    return res


def min_or_max_over_polytope(
    game: GameSpec, alpha: MixedStrategy, set_kind: str, direction: str = "min"
) -> float:
    return optimize_over_polytope(game, alpha, set_kind, direction).value


def l1_distance_to_set(
    dist: JointDistribution, game: GameSpec, alpha: MixedStrategy, set_kind: str
):
    """L1 distance from ``dist`` to the learners' polytope of the game
    induced by ``alpha``, together with a nearest point.

    Returns ``(distance, projection)``.
    """
    n = game.num_players
    if dist.scope != tuple(range(n - 1)) or dist.probs.shape != game.shape[:-1]:
        raise InvalidInputError("distribution must range over the learners' profiles")
    induced = induce_game(game, alpha)
    poly = build_system(induced, set_kind)
    p = induced.num_profiles
    d = dist.flat
    eye = np.eye(p)
    # variables [phi, s]; s >= |d - phi|
    a_ub = np.vstack([
        np.hstack([poly.A_ub, np.zeros((len(poly.b_ub), p))]),
        np.hstack([np.zeros((p, p)), -eye]),
        np.hstack([eye, -eye]),
        np.hstack([-eye, -eye]),
    ])
    b_ub = np.concatenate([poly.b_ub, np.zeros(p), d, -d])
    a_eq = np.hstack([poly.A_eq, np.zeros((poly.A_eq.shape[0], p))])
    system = LinearSystem(2 * p, a_ub, b_ub, a_eq, poly.b_eq)
    res = lp_solve(np.concatenate([np.zeros(p), np.ones(p)]), system)
    if res.status != "optimal":
        raise InternalInvariantError(f"projection LP returned {res.status}")
    phi = np.clip(res.x[:p], 0.0, None)
    phi /= phi.sum()
    projection = JointDistribution.from_flat(dist.scope, dist.probs.shape, phi)
    return max(res.value, 0.0), projection
