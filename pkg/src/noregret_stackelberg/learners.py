"""No-regret learners and regret bookkeeping.

Learner kinds:

``internal-regret-matching``
    Two actions (and no explicit ``mu``): play the first action with the
    probability ``p`` solving ``p * r(0->1)+ = (1 - p) * r(1->0)+``, where
    ``r(a->b)`` is the running-average regret of having played ``a``
    instead of ``b``. With more actions, or when ``mu`` is given: stay with
    the last action except for switching to ``b`` with probability
    ``r(last->b)+ / mu``.
``external-regret-matching``
    Play each action with probability proportional to the positive part of
    its average unconditional regret.
``scripted-ce1`` / ``scripted-ce2``
    The two-action rule above with fixed tie-breaks, only valid on the two
    built-in coordination games (see :mod:`noregret_stackelberg.games`).

When the rule leaves the choice open (all positive parts are zero, or the
first round) ``tie_break`` decides: ``previous`` repeats the last action
(uniform in round 1), ``always-first`` plays action 0, ``uniform`` mixes
evenly.

The update and strategy kernels are compiled with numba and shared with the
simulation engine, so the engine and this module cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InvalidConfigurationError, InvalidInputError
from .game_model import GameSpec, MixedStrategy, deviation_payoffs

INTERNAL = "internal-regret-matching"
EXTERNAL = "external-regret-matching"
SCRIPTED_CE1 = "scripted-ce1"
SCRIPTED_CE2 = "scripted-ce2"
KINDS = (INTERNAL, EXTERNAL, SCRIPTED_CE1, SCRIPTED_CE2)
SCRIPTED_KINDS = (SCRIPTED_CE1, SCRIPTED_CE2)

TIE_BREAKS = ("previous", "always-first", "uniform")

KIND_CODES = {INTERNAL: 0, EXTERNAL: 1, SCRIPTED_CE1: 2, SCRIPTED_CE2: 3}
TIE_CODES = {"previous": 0, "always-first": 1, "uniform": 2}

_INTERNAL, _EXTERNAL, _CE1, _CE2 = 0, 1, 2, 3
_TIE_PREVIOUS, _TIE_FIRST, _TIE_UNIFORM = 0, 1, 2

# regrets at or below this count as non-positive; absorbs rounding in
# running averages that are exactly zero in exact arithmetic
POS_TOL = 1e-12


# -- kernels ---------------------------------------------------------------

@njit(cache=True)
def _update_internal(regret, t, action, dev):
    """Running average over t+1 rounds; ``dev[b] = u(b, a_-i)``."""
    k = regret.shape[0]
    inv = 1.0 / (t + 1.0)
    scale = t * inv
    for a in range(k):
        for b in range(k):
            regret[a, b] *= scale
    base = dev[action]
    for b in range(k):
        if b != action:
            regret[action, b] += (dev[b] - base) * inv


@njit(cache=True)
def _update_external(regret, t, action, dev):
    k = regret.shape[0]
    inv = 1.0 / (t + 1.0)
    scale = t * inv
    base = dev[action]
    for b in range(k):
        regret[b] = regret[b] * scale + (dev[b] - base) * inv


@njit(cache=True)
def _pos(r):
    return r if r > POS_TOL else 0.0


@njit(cache=True)
def _two_action_p(r01, r10, tie_p):
    x = _pos(r01)
    y = _pos(r10)
    if x + y == 0.0:
        return tie_p
    return y / (x + y)


@njit(cache=True)
def _tie_p(tie, t, last):
    if tie == _TIE_FIRST:
        return 1.0
    if tie == _TIE_UNIFORM or t == 0:
        return 0.5
    return 1.0 if last == 0 else 0.0


@njit(cache=True)
def _tie_probs(tie, t, last, k, out):
    for b in range(k):
        out[b] = 0.0
    if tie == _TIE_FIRST:
        out[0] = 1.0
    elif tie == _TIE_UNIFORM or t == 0:
        for b in range(k):
            out[b] = 1.0 / k
    else:
        out[last] = 1.0


@njit(cache=True)
def _ce2_tie_p(player, prev0, prev1):
    # previous learner profile (prev0, prev1); 0 = T/L, 1 = B/R
    if player == 0:
        if prev0 == 1 and prev1 == 0:
            return 1.0
        if prev0 == prev1:
            return 0.0
        return 1.0
    if prev0 == 1:
        return 1.0
    if prev1 == 0:
        return 0.0
    return 1.0


@njit(cache=True)
def _inertia_probs(regret, last, mu, k, out):
    total = 0.0
    for b in range(k):
        out[b] = 0.0
        if b != last:
            out[b] = _pos(regret[last, b]) / mu
            total += out[b]
    out[last] = 1.0 - total


@njit(cache=True)
def _external_probs(regret, k, out):
    total = 0.0
    for b in range(k):
        out[b] = _pos(regret[b])
        total += out[b]
    if total == 0.0:
        return False
    for b in range(k):
        out[b] /= total
    return True


@njit(cache=True)
def _learner_probs(kind, tie, mu, player, k, t, prev, regret, ext, out):
    last = prev[player]
    if t == 0:
        if kind == _CE1 or kind == _CE2:
            _tie_probs(_TIE_FIRST, t, 0, k, out)
        else:
            _tie_probs(tie, t, 0, k, out)
        return
    if kind == _EXTERNAL:
        if not _external_probs(ext, k, out):
            _tie_probs(tie, t, last, k, out)
        return
    if kind == _INTERNAL and (k != 2 or mu > 0.0):
        _inertia_probs(regret, last, mu, k, out)
        return
    if kind == _CE1:
        tp = 1.0
    elif kind == _CE2:
        tp = _ce2_tie_p(player, prev[0], prev[1])
    else:
        tp = _tie_p(tie, t, last)
    p = _two_action_p(regret[0, 1], regret[1, 0], tp)
    out[0] = p
    out[1] = 1.0 - p


@njit(cache=True)
def _sample(probs, k, u):
    c = 0.0
    chosen = -1
    for j in range(k):
        if probs[j] > 0.0:
            chosen = j
            c += probs[j]
            if u < c:
                return j
    return chosen


# -- state types -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InternalRegretState:
    """``regret_matrix[a, b]``: average over all ``t`` rounds of
    ``u(b, a_-i) - u(a, a_-i)`` on rounds where ``a`` was played."""

    player: int
    t: int
    regret_matrix: np.ndarray

    def __post_init__(self):
        r = np.array(self.regret_matrix, dtype=float)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise InvalidInputError("regret matrix must be square")
        if np.any(np.diag(r) != 0.0):
            raise InvalidInputError("regret matrix diagonal must be zero")
        r.setflags(write=False)
        object.__setattr__(self, "regret_matrix", r)

    @classmethod
    def initial(cls, player: int, num_actions: int):
        return cls(player, 0, np.zeros((num_actions, num_actions)))

    @property
    def num_actions(self) -> int:
        return self.regret_matrix.shape[0]


@dataclass(frozen=True, eq=False)
class ExternalRegretState:
    """``regret_vector[a]``: average of ``u(a, a_-i) - u(a^t)``."""

    player: int
    t: int
    regret_vector: np.ndarray

    def __post_init__(self):
        r = np.array(self.regret_vector, dtype=float).ravel()
        r.setflags(write=False)
        object.__setattr__(self, "regret_vector", r)

    @classmethod
    def initial(cls, player: int, num_actions: int):
        return cls(player, 0, np.zeros(num_actions))


def _check_profile(game, profile):
    profile = tuple(int(a) for a in profile)
    if len(profile) != game.num_players or any(
        not 0 <= a < k for a, k in zip(profile, game.shape)
    ):
        raise InvalidInputError(f"invalid pure profile {profile} for game {game.shape}")
    return profile


def update_internal_regret(state: InternalRegretState, game: GameSpec, realized_profile):
    """State after one more round with ``realized_profile``."""
    profile = _check_profile(game, realized_profile)
    dev = np.ascontiguousarray(deviation_payoffs(game, state.player, profile), dtype=float)
    r = state.regret_matrix.copy()
    _update_internal(r, state.t, profile[state.player], dev)
    return InternalRegretState(state.player, state.t + 1, r)


def update_external_regret(state: ExternalRegretState, game: GameSpec, realized_profile):
    profile = _check_profile(game, realized_profile)
    dev = np.ascontiguousarray(deviation_payoffs(game, state.player, profile), dtype=float)
    r = state.regret_vector.copy()
    _update_external(r, state.t, profile[state.player], dev)
    return ExternalRegretState(state.player, state.t + 1, r)


def _tie_value(tie_break, t, last_action):
    if isinstance(tie_break, (int, float)) and not isinstance(tie_break, bool):
        if not 0.0 <= tie_break <= 1.0:
            raise InvalidInputError("numeric tie-break must be a probability")
        return float(tie_break)
    if tie_break not in TIE_CODES:
        raise InvalidInputError(f"unknown tie-break {tie_break!r}")
    if tie_break == "previous" and t > 0 and last_action is None:
        raise InvalidInputError("tie-break 'previous' needs the last action")
    return _tie_p(TIE_CODES[tie_break], t, 0 if last_action is None else int(last_action))


def next_strategy_regret_matching_2action(
    state: InternalRegretState, tie_break="previous", last_action=None
) -> MixedStrategy:
    """Two-action rule ``p * r(0->1)+ = (1-p) * r(1->0)+``; ``p`` is the
    probability of action 0. ``tie_break`` is a rule name or a number in
    ``[0, 1]`` used when both positive parts vanish."""
    if state.num_actions != 2:
        raise InvalidInputError(
            f"two-action regret matching called with {state.num_actions} actions"
        )
    r = state.regret_matrix
    tied = _pos(r[0, 1]) + _pos(r[1, 0]) == 0.0
    tie_p = _tie_value(tie_break, state.t, last_action) if tied else 0.0
    p = _two_action_p(r[0, 1], r[1, 0], tie_p)
    return MixedStrategy(state.player, [p, 1.0 - p])


def next_strategy_internal_regret_matching(
    state: InternalRegretState, last_action: int, mu: float
) -> MixedStrategy:
    """Switch from ``last_action`` to ``b`` with probability
    ``r(last_action->b)+ / mu``, otherwise stay."""
    if state.t < 1:
        raise InvalidInputError("inertia rule needs at least one observed round")
    k = state.num_actions
    if mu <= 0:
        raise InvalidConfigurationError("mu must be positive")
    out = np.empty(k)
    _inertia_probs(state.regret_matrix, int(last_action), float(mu), k, out)
    if out[last_action] < 0.0:
        raise InvalidConfigurationError(
            f"mu={mu} too small: switching probabilities sum to {1 - out[last_action]:.6g} > 1"
        )
    return MixedStrategy(state.player, out)


def next_strategy_external_regret_matching(
    state: ExternalRegretState, tie_break: str = "previous", last_action=None
) -> MixedStrategy:
    k = state.regret_vector.size
    out = np.empty(k)
    if not _external_probs(state.regret_vector, k, out):
        if tie_break not in TIE_CODES:
            raise InvalidInputError(f"unknown tie-break {tie_break!r}")
        _tie_probs(TIE_CODES[tie_break], state.t, 0 if last_action is None else last_action, k, out)
    return MixedStrategy(state.player, out)


def _check_scripted(player, state):
    if player not in (0, 1):
        raise InvalidConfigurationError("scripted learners are players 0 and 1")
    if state is not None and state.num_actions != 2:
        raise InvalidConfigurationError("scripted learners need exactly two actions")


def scripted_ce1_step(player: int, state: InternalRegretState | None) -> int:
    """Action of a learner in the first coordination game: action 0 in
    round 1, afterwards the two-action rule with ties resolved to action 0."""
    _check_scripted(player, state)
    if state is None or state.t == 0:
        return 0
    r = state.regret_matrix
    p = _two_action_p(r[0, 1], r[1, 0], 1.0)
    if p not in (0.0, 1.0):
        raise InvalidConfigurationError("scripted learner reached a randomized step")
    return 0 if p == 1.0 else 1


def scripted_ce2_step(player: int, state: InternalRegretState | None, previous_profile) -> int:
    """As :func:`scripted_ce1_step` but ties depend on the previous learner
    profile: player 0 plays 0 after (1,0) and 1 after (0,0) or (1,1);
    player 1 plays 0 after (1,1) or (1,0) and 1 after (0,0)."""
    _check_scripted(player, state)
    if state is None or state.t == 0:
        return 0
    prev = tuple(int(a) for a in previous_profile)
    r = state.regret_matrix
    p = _two_action_p(r[0, 1], r[1, 0], _ce2_tie_p(player, prev[0], prev[1]))
    if p not in (0.0, 1.0):
        raise InvalidConfigurationError("scripted learner reached a randomized step")
    return 0 if p == 1.0 else 1


# -- regret measurement ----------------------------------------------------

def _deviation_table(game: GameSpec, history: np.ndarray, player: int) -> np.ndarray:
    """``D[t, b] = u_player(b, a_-player^t)``."""
    u = np.moveaxis(game.payoffs[player], player, -1)
    others = [j for j in range(game.num_players) if j != player]
    return u[tuple(history[:, j] for j in others)]


def internal_regret_matrix(game: GameSpec, history, player: int) -> np.ndarray:
    """Average conditional swap regrets computed from scratch."""
    history = np.asarray(history, dtype=np.int64).reshape(-1, game.num_players)
    D = _deviation_table(game, history, player)
    own = history[:, player]
    k = game.num_actions(player)
    R = np.zeros((k, k))
    for a in range(k):
        rows = D[own == a]
        if len(rows):
            R[a] = (rows - rows[:, [a]]).sum(axis=0)
    return R / len(history)


def external_regret_vector(game: GameSpec, history, player: int) -> np.ndarray:
    history = np.asarray(history, dtype=np.int64).reshape(-1, game.num_players)
    D = _deviation_table(game, history, player)
    realized = D[np.arange(len(history)), history[:, player]]
    return (D - realized[:, None]).mean(axis=0)


def measure_regrets(game: GameSpec, history, player: int):
    """``(external, internal)`` average regret of ``player`` over ``history``.

    ``external`` is the positive part of the best constant-deviation gain;
    ``internal`` is the largest conditional swap gain over ordered action
    pairs (including ``a == b``, so it is never negative).
    """
    history = np.asarray(history, dtype=np.int64).reshape(-1, game.num_players)
    if len(history) == 0:
        raise InvalidInputError("empty history")
    ext = max(float(external_regret_vector(game, history, player).max()), 0.0)
    internal = float(internal_regret_matrix(game, history, player).max())
    return ext, internal


# -- policies --------------------------------------------------------------

def default_mu(game: GameSpec, player: int) -> float:
    k = game.num_actions(player)
    spread = game.utility_range(player)
    return 2.0 * (k - 1) * spread if spread > 0 else 1.0


@dataclass(frozen=True)
class LearnerPolicy:
    kind: str = INTERNAL
    tie_break: str = "previous"
    mu: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfigurationError(f"unknown learner kind {self.kind!r}; expected one of {KINDS}")
        if self.tie_break not in TIE_BREAKS:
            raise InvalidConfigurationError(
                f"unknown tie_break {self.tie_break!r}; expected one of {TIE_BREAKS}"
            )
        if self.mu is not None and self.kind != INTERNAL:
            raise InvalidConfigurationError("mu only applies to internal-regret-matching")

    @property
    def scripted(self) -> bool:
        return self.kind in SCRIPTED_KINDS

    def resolved_mu(self, game: GameSpec, player: int) -> float:
        """Inertia used by the engine; 0 selects the two-action rule."""
        if self.kind != INTERNAL:
            return 0.0
        k = game.num_actions(player)
        if self.mu is None:
            return 0.0 if k == 2 else default_mu(game, player)
        return float(self.mu)

    def validate(self, game: GameSpec, player: int):
        if player >= game.num_players - 1:
            raise InvalidConfigurationError(f"player {player} is not a learner")
        if self.scripted:
            from .games import ce1_game, ce2_game

            expected = ce1_game() if self.kind == SCRIPTED_CE1 else ce2_game()
            if game.shape != expected.shape or not np.array_equal(game.payoffs, expected.payoffs):
                raise InvalidConfigurationError(
                    f"{self.kind} only runs on its built-in game"
                )
        if self.kind == INTERNAL and self.mu is not None:
            k = game.num_actions(player)
            bound = (k - 1) * game.utility_range(player)
            if not self.mu > bound:
                raise InvalidConfigurationError(
                    f"mu={self.mu} must exceed (k-1)*range = {bound:g} for player {player}"
                )

    def describe(self) -> dict:
        d = {"kind": self.kind, "tie_break": self.tie_break}
        if self.mu is not None:
            d["mu"] = self.mu
        return d
