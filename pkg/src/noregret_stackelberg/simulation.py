"""Seeded repeated play between one optimizer and regret-based learners.

Randomness: player ``i`` draws its round-``t`` uniform from the ``t``-th
position of the stream ``numpy.random.default_rng([seed, i])``; actions are
sampled by inverse CDF. Streams are independent of each other and of any
metric computation, so trajectories are reproducible bit for bit.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .equilibria import CED, HANNAN, l1_distance_to_set
from .equilibria.stackelberg import (
    DEFAULT_GRID,
    correlated_stackelberg_value,
    hannan_stackelberg_value,
)
from .errors import InvalidConfigurationError, InvalidInputError
from .game_model import GameSpec, JointDistribution, MixedStrategy
from .learners import (
    EXTERNAL,
    KIND_CODES,
    TIE_CODES,
    LearnerPolicy,
    _learner_probs,
    _sample,
    _update_external,
    _update_internal,
    measure_regrets,
)


@dataclass(frozen=True, eq=False)
class OptimizerPolicy:
    """Either a fixed mix played every round or a cyclic action script."""

    kind: str
    alpha: MixedStrategy | None = None
    sequence: tuple = ()

    def __post_init__(self):
        if self.kind == "fixed-mixed":
            if self.alpha is None:
                raise InvalidConfigurationError("fixed-mixed optimizer needs alpha")
        elif self.kind == "scripted":
            if not self.sequence:
                raise InvalidConfigurationError("scripted optimizer needs a nonempty sequence")
            object.__setattr__(self, "sequence", tuple(int(a) for a in self.sequence))
        else:
            raise InvalidConfigurationError(f"unknown optimizer kind {self.kind!r}")

    @classmethod
    def fixed(cls, alpha: MixedStrategy):
        return cls("fixed-mixed", alpha=alpha)

    @classmethod
    def scripted(cls, sequence):
        return cls("scripted", sequence=tuple(sequence))

    def validate(self, game: GameSpec):
        n, k = game.num_players, game.shape[-1]
        if self.kind == "fixed-mixed":
            if self.alpha.player != n - 1 or self.alpha.probs.size != k:
                raise InvalidConfigurationError(
                    f"alpha must be a strategy over the optimizer's {k} actions"
                )
        elif any(not 0 <= a < k for a in self.sequence):
            raise InvalidConfigurationError("scripted optimizer action out of range")

    def describe(self) -> dict:
        if self.kind == "fixed-mixed":
            return {"kind": self.kind, "alpha": self.alpha.probs.tolist()}
        return {"kind": self.kind, "sequence": list(self.sequence)}


@dataclass(frozen=True, eq=False)
class Trajectory:
    game: GameSpec
    seed: int
    horizon: int
    profiles: np.ndarray  # (horizon, n) int64
    optimizer: OptimizerPolicy
    learners: tuple

    def __post_init__(self):
        p = np.asarray(self.profiles, dtype=np.int64)
        if p.shape != (self.horizon, self.game.num_players):
            raise InvalidInputError("profile array does not match horizon and players")
        p.setflags(write=False)
        object.__setattr__(self, "profiles", p)

    def to_bytes(self) -> bytes:
        return np.ascontiguousarray(self.profiles, dtype="<i8").tobytes()

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()

    def optimizer_payoffs(self, player: int | None = None) -> np.ndarray:
        """Realized per-round payoff of ``player`` (default: the optimizer)."""
        player = self.game.num_players - 1 if player is None else player
        return self.game.payoffs[player][tuple(self.profiles.T)]

    def labeled(self, t: int) -> tuple:
        return tuple(
            self.game.action_labels[i][a] for i, a in enumerate(self.profiles[t])
        )


@dataclass(frozen=True)
class MetricsRecord:
    t: int
    avg_opt_payoff: float
    dist_ced: float
    dist_hannan: float
    ext_regrets: tuple
    int_regrets: tuple


@dataclass(frozen=True)
class MetricsSeries:
    records: tuple = field(default_factory=tuple)

    def __post_init__(self):
        ts = [r.t for r in self.records]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvalidInputError("checkpoints must be strictly increasing")

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def at(self, t: int) -> MetricsRecord:
        for r in self.records:
            if r.t == t:
                return r
        raise KeyError(t)


@njit(cache=True)
def _play(flat, shape, strides, kinds, ties, mus, opt_probs, opt_seq, uniforms, out):
    n = shape.shape[0]
    L = n - 1
    K = 1
    for i in range(n):
        K = max(K, shape[i])
    regret = np.zeros((L, K, K))
    ext = np.zeros((L, K))
    probs = np.zeros(K)
    dev = np.zeros(K)
    prev = np.zeros(n, dtype=np.int64)
    M = out.shape[0]
    kn = shape[L]
    for t in range(M):
        for i in range(L):
            k = shape[i]
            _learner_probs(
                kinds[i], ties[i], mus[i], i, k, t, prev,
                regret[i, :k, :k], ext[i, :k], probs,
            )
            out[t, i] = _sample(probs, k, uniforms[i, t])
        if opt_seq.shape[0] > 0:
            out[t, L] = opt_seq[t % opt_seq.shape[0]]
        else:
            out[t, L] = _sample(opt_probs, kn, uniforms[L, t])
        idx = 0
        for j in range(n):
            idx += out[t, j] * strides[j]
        for i in range(L):
            k = shape[i]
            a = out[t, i]
            for b in range(k):
                dev[b] = flat[i, idx + (b - a) * strides[i]]
            if kinds[i] == 1:
                _update_external(ext[i, :k], t, a, dev[:k])
            else:
                _update_internal(regret[i, :k, :k], t, a, dev[:k])
        for j in range(n):
            prev[j] = out[t, j]


def player_uniforms(seed: int, num_players: int, horizon: int) -> np.ndarray:
    """Round-indexed uniforms, one independent stream per player."""
    return np.stack([
        np.random.default_rng([int(seed), i]).random(horizon) for i in range(num_players)
    ])


def run(
    game: GameSpec,
    optimizer: OptimizerPolicy,
    learners,
    M: int,
    seed: int,
) -> Trajectory:
    """Play ``M`` rounds; learners see the full realized profile each round."""
    n = game.num_players
    learners = tuple(learners)
    if n < 2:
        raise InvalidConfigurationError("need at least one learner and the optimizer")
    if len(learners) != n - 1:
        raise InvalidConfigurationError(f"game has {n - 1} learners, got {len(learners)} policies")
    if int(M) < 1:
        raise InvalidConfigurationError("horizon M must be at least 1")
    M = int(M)
    optimizer.validate(game)
    for i, pol in enumerate(learners):
        pol.validate(game, i)

    shape = np.array(game.shape, dtype=np.int64)
    strides = np.array(
        [int(np.prod(game.shape[i + 1:])) for i in range(n)], dtype=np.int64
    )
    flat = np.ascontiguousarray(game.payoffs.reshape(n, -1))
    kinds = np.array([KIND_CODES[p.kind] for p in learners], dtype=np.int64)
    ties = np.array([TIE_CODES[p.tie_break] for p in learners], dtype=np.int64)
    mus = np.array([p.resolved_mu(game, i) for i, p in enumerate(learners)], dtype=float)
    if optimizer.kind == "fixed-mixed":
        opt_probs = np.ascontiguousarray(optimizer.alpha.probs, dtype=float)
        opt_seq = np.zeros(0, dtype=np.int64)
    else:
        opt_probs = np.zeros(game.shape[-1])
        opt_seq = np.array(optimizer.sequence, dtype=np.int64)
    out = np.zeros((M, n), dtype=np.int64)
    _play(flat, shape, strides, kinds, ties, mus, opt_probs, opt_seq,
          player_uniforms(seed, n, M), out)
    return Trajectory(game, int(seed), M, out, optimizer, learners)


def empirical_distribution(traj: Trajectory, players=None, t: int | None = None) -> JointDistribution:
    """Frequencies of the restricted profiles over the first ``t`` rounds."""
    t = traj.horizon if t is None else int(t)
    if not 1 <= t <= traj.horizon:
        raise InvalidInputError(f"t={t} outside 1..{traj.horizon}")
    players = tuple(range(traj.game.num_players)) if players is None else tuple(sorted(players))
    shape = tuple(traj.game.shape[i] for i in players)
    idx = np.ravel_multi_index(tuple(traj.profiles[:t, list(players)].T), shape)
    counts = np.bincount(idx, minlength=int(np.prod(shape)))
    return JointDistribution.from_flat(players, shape, counts / t)


def default_checkpoints(M: int) -> list:
    pts = []
    p = 1
    while p <= M:
        pts.append(p)
        p *= 10
    if pts[-1] != M:
        pts.append(M)
    return pts


def compute_metrics(traj: Trajectory, alpha: MixedStrategy, checkpoints=None) -> MetricsSeries:
    """Average optimizer payoff, L1 distance of the learners' empirical
    distribution to both polytopes of the game induced by ``alpha``, and
    each learner's regrets, at every checkpoint."""
    checkpoints = default_checkpoints(traj.horizon) if checkpoints is None else sorted(set(checkpoints))
    if checkpoints and (checkpoints[0] < 1 or checkpoints[-1] > traj.horizon):
        raise InvalidInputError("checkpoints must lie in 1..M")
    game = traj.game
    n = game.num_players
    learners = tuple(range(n - 1))
    cum = np.cumsum(traj.optimizer_payoffs())
    records = []
    for t in checkpoints:
        z = empirical_distribution(traj, learners, t)
        d_ced, _ = l1_distance_to_set(z, game, alpha, CED)
        d_h, _ = l1_distance_to_set(z, game, alpha, HANNAN)
        regs = [measure_regrets(game, traj.profiles[:t], i) for i in learners]
        records.append(MetricsRecord(
            t=int(t),
            avg_opt_payoff=float(cum[t - 1] / t),
            dist_ced=float(d_ced),
            dist_hannan=float(d_h),
            ext_regrets=tuple(r[0] for r in regs),
            int_regrets=tuple(r[1] for r in regs),
        ))
    return MetricsSeries(tuple(records))


def check_slln_drift(traj: Trajectory, alpha: MixedStrategy, player: int) -> float:
    """Average of ``u_i(a^t) - u_i(a_-n^t, alpha)`` over the trajectory."""
    game = traj.game
    realized = traj.optimizer_payoffs(player)
    averaged = (game.payoffs[player] @ alpha.probs)[tuple(traj.profiles[:, :-1].T)]
    return float(np.mean(realized - averaged))


# -- CSV output ------------------------------------------------------------

def metrics_header(num_learners: int) -> list:
    return (
        ["seed", "t", "avg_opt_payoff", "dist_ced", "dist_hannan"]
        + [f"ext_regret_p{i + 1}" for i in range(num_learners)]
        + [f"int_regret_p{i + 1}" for i in range(num_learners)]
    )


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def metrics_csv(runs, num_learners: int) -> str:
    """CSV text for ``runs`` = iterable of ``(seed, MetricsSeries)``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(metrics_header(num_learners))
    for seed, series in runs:
        for r in series:
            w.writerow(
                [seed, r.t, _fmt(r.avg_opt_payoff), _fmt(r.dist_ced), _fmt(r.dist_hannan)]
                + [_fmt(x) for x in r.ext_regrets]
                + [_fmt(x) for x in r.int_regrets]
            )
    return buf.getvalue()


def trajectory_csv(trajs) -> str:
    trajs = list(trajs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = trajs[0].game.num_players if trajs else 0
    w.writerow(["seed", "t"] + [f"a{i + 1}" for i in range(n)])
    for traj in trajs:
        labels = traj.game.action_labels
        for t, prof in enumerate(traj.profiles, start=1):
            w.writerow([traj.seed, t] + [labels[i][a] for i, a in enumerate(prof)])
    return buf.getvalue()


# -- guarantee check -------------------------------------------------------

@dataclass(frozen=True)
class GuaranteeReport:
    benchmark: str  # "v_corr" or "v_h"
    value: float
    alpha: tuple
    epsilon: float
    horizon: int
    seeds: tuple
    averages: tuple
    final_distances: tuple

    @property
    def mean(self) -> float:
        return float(np.mean(self.averages))

    @property
    def minimum(self) -> float:
        return float(np.min(self.averages))

    @property
    def threshold(self) -> float:
        return self.value - self.epsilon

    @property
    def expected_ok(self) -> bool:
        return self.mean >= self.threshold

    @property
    def pathwise_ok(self) -> bool:
        return self.minimum >= self.threshold


def verify_guarantee(
    game: GameSpec,
    learner,
    M: int,
    seeds,
    epsilon: float,
    grid_resolution: float = DEFAULT_GRID,
) -> GuaranteeReport:
    """Play the value-achieving fixed mix against regret-matching learners.

    Internal-regret (and scripted) learners are measured against ``v_corr``
    and the correlated polytope, external-regret learners against ``v_h``
    and the Hannan set. The mean over seeds stands in for the expectation,
    the minimum over seeds for the pathwise claim.
    """
    if not epsilon > 0:
        raise InvalidConfigurationError("epsilon must be positive")
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise InvalidConfigurationError("at least one seed is required")
    policy = learner if isinstance(learner, LearnerPolicy) else LearnerPolicy(kind=learner)
    if policy.kind == EXTERNAL:
        res, kind, name = hannan_stackelberg_value(game, grid_resolution), HANNAN, "v_h"
    else:
        res, kind, name = correlated_stackelberg_value(game, grid_resolution), CED, "v_corr"
    alpha = MixedStrategy(game.num_players - 1, res.alpha)
    policies = [policy] * (game.num_players - 1)
    averages, dists = [], []
    for seed in seeds:
        traj = run(game, OptimizerPolicy.fixed(alpha), policies, M, seed)
        averages.append(float(traj.optimizer_payoffs().mean()))
        z = empirical_distribution(traj, range(game.num_players - 1))
        dists.append(float(l1_distance_to_set(z, game, alpha, kind)[0]))
    return GuaranteeReport(
        benchmark=name,
        value=float(res.value),
        alpha=tuple(float(a) for a in res.alpha),
        epsilon=float(epsilon),
        horizon=int(M),
        seeds=seeds,
        averages=tuple(averages),
        final_distances=tuple(dists),
    )
