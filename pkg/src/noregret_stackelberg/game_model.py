"""Finite normal-form games, mixed strategies and their multilinear payoffs.

Conventions
-----------
Players are indexed ``0 .. n-1`` and the last player (``n-1``) is the
optimizer. Each player's utility is an ``ndarray`` of shape
``(k_0, ..., k_{n-1})`` in C order, i.e. pure profiles are enumerated
lexicographically with the last player's index varying fastest. The flat
arrays in game files use exactly this order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError
from .lp import LinearSystem, lp_solve

BEST_REPLY_TOL = 1e-9
STRATEGY_SUM_TOL = 1e-12
JOINT_SUM_TOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GameSpec:
    """A finite game with per-player utility tensors.

    ``leader_payoff`` is only set on games produced by :func:`induce_game`:
    it carries the optimizer's utility over the learners' profiles so the
    optimizer's value of any learner distribution stays computable.
    """

    action_labels: tuple
    payoffs: np.ndarray
    leader_payoff: np.ndarray | None = None

    def __post_init__(self):
        labels = tuple(tuple(str(a) for a in acts) for acts in self.action_labels)
        if not labels:
            raise InvalidInputError("a game needs at least one player")
        for i, acts in enumerate(labels):
            if len(acts) == 0:
                raise InvalidInputError(f"player {i} has no actions")
            if len(set(acts)) != len(acts):
                raise InvalidInputError(f"player {i} has duplicate action labels")
        shape = tuple(len(a) for a in labels)
        payoffs = np.asarray(self.payoffs, dtype=float)
        if payoffs.shape != (len(labels),) + shape:
            try:
                payoffs = payoffs.reshape((len(labels),) + shape)
            except ValueError:
                raise InvalidInputError(
                    f"utility tensor shape {payoffs.shape} does not match "
                    f"{len(labels)} players with action counts {shape}"
                ) from None
        if not np.all(np.isfinite(payoffs)):
            raise InvalidInputError("utilities must be finite reals")
        object.__setattr__(self, "action_labels", labels)
        object.__setattr__(self, "payoffs", _frozen(payoffs))
        if self.leader_payoff is not None:
            lead = np.asarray(self.leader_payoff, dtype=float).reshape(shape)
            if not np.all(np.isfinite(lead)):
                raise InvalidInputError("leader utilities must be finite reals")
            object.__setattr__(self, "leader_payoff", _frozen(lead))

    @classmethod
    def from_flat(cls, action_labels, utilities, leader_payoff=None):
        """Build from one flat utility list per player (last player fastest)."""
        labels = [list(a) for a in action_labels]
        size = int(np.prod([len(a) for a in labels]))
        rows = [np.asarray(u, dtype=float).ravel() for u in utilities]
        if len(rows) != len(labels):
            raise InvalidInputError(
                f"expected {len(labels)} utility arrays, got {len(rows)}"
            )
        for i, row in enumerate(rows):
            if row.size != size:
                raise InvalidInputError(
                    f"utility array of player {i} has length {row.size}, expected {size}"
                )
        return cls(labels, np.stack(rows), leader_payoff)

    @property
    def num_players(self) -> int:
        return len(self.action_labels)

    @property
    def shape(self) -> tuple:
        return self.payoffs.shape[1:]

    @property
    def num_profiles(self) -> int:
        return int(np.prod(self.shape))

    def num_actions(self, player: int) -> int:
        return self.shape[player]

    def utility(self, player: int) -> np.ndarray:
        return self.payoffs[player]

    def flat_utilities(self, player: int) -> np.ndarray:
        return self.payoffs[player].ravel()

    def profiles(self):
        """Pure profiles in lexicographic order."""
        return np.ndindex(*self.shape)

    def profile_index(self, profile) -> int:
        return int(np.ravel_multi_index(tuple(profile), self.shape))

    def action_index(self, player: int, action) -> int:
        if isinstance(action, (int, np.integer)):
            if not 0 <= action < self.shape[player]:
                raise InvalidInputError(f"action {action} out of range for player {player}")
            return int(action)
        try:
            return self.action_labels[player].index(str(action))
        except ValueError:
            raise InvalidInputError(f"player {player} has no action {action!r}") from None

    def utility_range(self, player: int) -> float:
        u = self.payoffs[player]
        return float(u.max() - u.min())

    def __eq__(self, other):
        if not isinstance(other, GameSpec):
            return NotImplemented
        if self.action_labels != other.action_labels:
            return False
        if not np.array_equal(self.payoffs, other.payoffs):
            return False
        if (self.leader_payoff is None) != (other.leader_payoff is None):
            return False
        return self.leader_payoff is None or np.array_equal(
            self.leader_payoff, other.leader_payoff
        )

    __hash__ = None

    def __repr__(self):
        return f"GameSpec(players={self.num_players}, actions={self.shape})"


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    player: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).ravel()
        if p.size == 0:
            raise InvalidInputError("empty strategy")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidInputError(f"strategy of player {self.player} has negative entries")
        if abs(p.sum() - 1.0) > STRATEGY_SUM_TOL:
            raise InvalidInputError(
                f"strategy of player {self.player} sums to {p.sum():.15g}, not 1"
            )
        object.__setattr__(self, "player", int(self.player))
        object.__setattr__(self, "probs", _frozen(p))

    @classmethod
    def pure(cls, player: int, action: int, num_actions: int) -> "MixedStrategy":
        p = np.zeros(num_actions)
        p[action] = 1.0
        return cls(player, p)

    @classmethod
    def uniform(cls, player: int, num_actions: int) -> "MixedStrategy":
        return cls(player, np.full(num_actions, 1.0 / num_actions))

    @property
    def support(self) -> tuple:
        return tuple(int(a) for a in np.flatnonzero(self.probs > 0))

    def __eq__(self, other):
        if not isinstance(other, MixedStrategy):
            return NotImplemented
        return self.player == other.player and np.array_equal(self.probs, other.probs)

    __hash__ = None


@dataclass(frozen=True)
class MixedProfile:
    strategies: tuple = field(default_factory=tuple)

    def __post_init__(self):
        strategies = tuple(self.strategies)
        players = [s.player for s in strategies]
        if len(set(players)) != len(players):
            raise InvalidInputError(f"duplicate players in profile: {players}")
        if any(p < 0 for p in players):
            raise InvalidInputError("negative player index")
        object.__setattr__(self, "strategies", strategies)

    @classmethod
    def from_probs(cls, probs: Sequence, players: Iterable[int] | None = None):
        probs = list(probs)
        players = range(len(probs)) if players is None else list(players)
        return cls(tuple(MixedStrategy(i, p) for i, p in zip(players, probs)))

    @classmethod
    def pure(cls, game: GameSpec, profile, players=None):
        players = range(len(profile)) if players is None else list(players)
        return cls(tuple(
            MixedStrategy.pure(i, int(a), game.num_actions(i))
            for i, a in zip(players, profile)
        ))

    @property
    def players(self) -> tuple:
        return tuple(s.player for s in self.strategies)

    def strategy(self, player: int) -> MixedStrategy:
        for s in self.strategies:
            if s.player == player:
                return s
        raise KeyError(player)

    def __len__(self):
        return len(self.strategies)

    def __iter__(self):
        return iter(self.strategies)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Distribution over the product of the action sets of ``scope``.

    ``probs`` has one axis per player in ``scope`` (C order, last fastest).
    """

    scope: tuple
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        scope = tuple(int(i) for i in self.scope)
        if p.ndim != len(scope):
            raise InvalidInputError(
                f"distribution has {p.ndim} axes but scope has {len(scope)} players"
            )
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidInputError("joint distribution has negative entries")
        if abs(p.sum() - 1.0) > JOINT_SUM_TOL:
            raise InvalidInputError(f"joint distribution sums to {p.sum():.15g}, not 1")
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "probs", _frozen(p))

    @classmethod
    def from_flat(cls, scope, shape, flat):
        return cls(scope, np.asarray(flat, dtype=float).reshape(shape))

    @classmethod
    def point_mass(cls, scope, shape, profile):
        p = np.zeros(shape)
        p[tuple(profile)] = 1.0
        return cls(scope, p)

    @classmethod
    def product(cls, profile: MixedProfile):
        """Independent product of the strategies in ``profile``."""
        p = np.ones(())
        for s in profile:
            p = np.multiply.outer(p, s.probs)
        return cls(profile.players, p)

    @property
    def flat(self) -> np.ndarray:
        return self.probs.ravel()


# -- payoffs ---------------------------------------------------------------

def _check_full_profile(game: GameSpec, profile: MixedProfile):
    if sorted(profile.players) != list(range(game.num_players)):
        raise InvalidInputError(
            f"profile covers players {sorted(profile.players)}, game has {game.num_players}"
        )
    for s in profile:
        if s.probs.size != game.num_actions(s.player):
            raise InvalidInputError(
                f"player {s.player} strategy has {s.probs.size} entries, "
                f"expected {game.num_actions(s.player)}"
            )


def _contract(tensor: np.ndarray, vectors: Sequence[np.ndarray]) -> np.ndarray:
    # contracts trailing axes, last vector against last axis
    t = tensor
    for v in reversed(vectors):
        t = t @ v
    return t


def expected_utility(game: GameSpec, profile: MixedProfile, player: int) -> float:
    """Multilinear extension of ``player``'s utility at a mixed profile."""
    _check_full_profile(game, profile)
    vecs = [profile.strategy(i).probs for i in range(game.num_players)]
    return float(_contract(game.payoffs[player], vecs))


def expected_utility_joint(
    game: GameSpec,
    learner_dist: JointDistribution,
    alpha: MixedStrategy,
    player: int,
) -> float:
    """Utility of ``player`` when learners follow ``learner_dist`` (correlated)
    and the optimizer independently plays ``alpha``."""
    n = game.num_players
    if learner_dist.scope != tuple(range(n - 1)):
        raise InvalidInputError(
            f"learner distribution scope {learner_dist.scope} != {tuple(range(n - 1))}"
        )
    if learner_dist.probs.shape != game.shape[:-1]:
        raise InvalidInputError("learner distribution shape does not match the game")
    if alpha.player != n - 1 or alpha.probs.size != game.shape[-1]:
        raise InvalidInputError("alpha must be a strategy of the last player")
    return float(np.sum(learner_dist.probs * (game.payoffs[player] @ alpha.probs)))


def payoff_vector(game: GameSpec, player: int, others: MixedProfile) -> np.ndarray:
    """Expected payoff of each pure action of ``player`` against ``others``."""
    expected = [i for i in range(game.num_players) if i != player]
    if sorted(others.players) != expected:
        raise InvalidInputError(
            f"opponent profile covers {sorted(others.players)}, expected {expected}"
        )
    vecs = []
    for i in expected:
        s = others.strategy(i)
        if s.probs.size != game.num_actions(i):
            raise InvalidInputError(f"player {i} strategy has wrong length")
        vecs.append(s.probs)
    u = np.moveaxis(game.payoffs[player], player, 0)
    return _contract(u, vecs)


def best_reply_set(game: GameSpec, player: int, others: MixedProfile) -> frozenset:
    """Pure actions within ``BEST_REPLY_TOL`` of the best payoff.

    A mixed strategy is a best reply iff its support lies in this set.
    """
    v = payoff_vector(game, player, others)
    return frozenset(int(a) for a in np.flatnonzero(v >= v.max() - BEST_REPLY_TOL))


def deviation_payoffs(game: GameSpec, player: int, profile) -> np.ndarray:
    """``u_player(b, profile_{-player})`` for every action ``b``."""
    idx = list(profile)
    idx[player] = slice(None)
    return game.payoffs[player][tuple(idx)]


def is_very_weakly_dominated(game: GameSpec, player: int, action) -> bool:
    """Whether some mixture of the player's *other* actions does at least as
    well as ``action`` against every pure opponent profile."""
    a = game.action_index(player, action)
    k = game.num_actions(player)
    if k < 2:
        return False
    others = [b for b in range(k) if b != a]
    u = np.moveaxis(game.payoffs[player], player, 0).reshape(k, -1)
    # variables: weights on `others`; rows: -sum_b x_b u(b, .) <= -u(a, .)
    a_ub = np.vstack([-u[others].T, -np.eye(len(others))])
    b_ub = np.concatenate([-u[a], np.zeros(len(others))])
    system = LinearSystem(len(others), a_ub, b_ub, np.ones((1, len(others))), np.ones(1))
    res = lp_solve(np.zeros(len(others)), system)
    return res.status == "optimal"


def induce_game(game: GameSpec, alpha: MixedStrategy) -> GameSpec:
    """The learners' game when the optimizer commits to ``alpha``.

    Learner ``i`` gets ``sum_{a_n} alpha(a_n) u_i(., a_n)``; the optimizer's
    averaged utility is kept as ``leader_payoff``.
    """
    n = game.num_players
    if n < 2:
        raise InvalidInputError("need at least one learner and the optimizer")
    if alpha.player != n - 1 or alpha.probs.size != game.shape[-1]:
        raise InvalidInputError("alpha must be a strategy of the last player")
    averaged = game.payoffs @ alpha.probs
    return GameSpec(game.action_labels[:-1], averaged[:-1], leader_payoff=averaged[-1])
