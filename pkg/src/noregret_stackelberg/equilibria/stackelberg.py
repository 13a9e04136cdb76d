"""Stackelberg values of the optimizer against best-responding learners.

Six values are computed:

* ``V_pure`` / ``v_pure``   optimistic / pessimistic, pure learner equilibria
* ``V_mixed`` / ``v_mixed`` optimistic / pessimistic, mixed learner equilibria
* ``v_corr``                pessimistic, correlated equilibria of the learners
* ``v_h``                   pessimistic, Hannan set of the learners

``V_pure`` is exact: for a fixed pure learner profile the best-reply
conditions are linear in the optimizer's mix, so each profile is one LP.
The others maximize over the optimizer's simplex with a uniform grid plus
two local refinement passes at half the previous step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
import itertools

import numpy as np

from ..errors import InternalInvariantError
from ..game_model import GameSpec, JointDistribution, MixedStrategy, induce_game
from ..lp import LinearSystem, lp_solve
from .nash import check_size_cap, mixed_nash_support_enumeration, pure_nash_profiles
from .polytopes import CED, HANNAN, optimize_over_polytope

DEFAULT_GRID = 1 / 50
REFINEMENTS = 2
TIE_TOL = 1e-12
CHAIN_TOL = 0.02


@dataclass(frozen=True, eq=False)
class ValueResult:
    """One Stackelberg value with its witnesses.

    ``value`` is ``None`` when the value does not exist (no pure
    equilibrium for any optimizer mix).
    """

    name: str
    value: float | None
    alpha: np.ndarray | None
    response: object
    method: str
    grid_points: int = 0
    skipped_points: int = 0  # grid points where the inner set was empty

    @property
    def exists(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        resp = self.response
        if isinstance(resp, JointDistribution):
            resp = resp.flat.tolist()
        elif hasattr(resp, "strategies"):
            resp = [s.probs.tolist() for s in resp]
        elif isinstance(resp, tuple):
            resp = list(resp)
        return {
            "value": "nonexistent" if self.value is None else float(self.value),
            "method": self.method,
            "alpha": None if self.alpha is None else [float(a) for a in self.alpha],
            "response": resp,
            "grid_points": self.grid_points,
            "skipped_points": self.skipped_points,
        }


# -- outer grid over the optimizer simplex --------------------------------

def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _normalize(point, denom):
    g = denom
    for c in point:
        g = gcd(g, c)
    return tuple(c // g for c in point), denom // g


def _grid_steps(resolution):
    steps = max(1, int(round(1.0 / resolution)))
    return steps


def grid_maximize(num_actions: int, resolution: float, evaluate, refinements: int = REFINEMENTS):
    """Maximize ``evaluate(alpha) -> (value | None, witness)`` over the
    simplex. Ties go to the lexicographically smallest ``alpha``.

    Returns ``(value, alpha, witness, points_evaluated)``; value is None if
    every point evaluated to None.
    """
    cache = {}

    def run(points, denom):
        for p in points:
            key = _normalize(p, denom)
            if key in cache:
                continue
            alpha = np.array(key[0], dtype=float) / key[1]
            cache[key] = evaluate(alpha)

    def best():
        winner = None
        for key, (val, wit) in cache.items():
            if val is None:
                continue
            order = tuple(Fraction(c, key[1]) for c in key[0])
            if (
                winner is None
                or val > winner[0] + TIE_TOL
                or (abs(val - winner[0]) <= TIE_TOL and order < winner[1])
            ):
                winner = (val, order, key, wit)
        return winner

    if num_actions == 1:
        run([(1,)], 1)
    else:
        steps = _grid_steps(resolution)
        run(_compositions(steps, num_actions), steps)
        denom = steps
        for _ in range(refinements):
            w = best()
            if w is None:
                break
            point, d = w[2]
            denom *= 2
            center = [c * (denom // d) for c in point]
            offsets = itertools.product(range(-2, 3), repeat=num_actions)
            nbrs = []
            for off in offsets:
                if sum(off) != 0:
                    continue
                q = tuple(c + o for c, o in zip(center, off))
                if min(q) >= 0:
                    nbrs.append(q)
            run(sorted(nbrs, reverse=True), denom)
    w = best()
    if w is None:
        return None, None, None, len(cache)
    val, _, (point, d), wit = w
    return val, np.array(point, dtype=float) / d, wit, len(cache)


def _method(game, resolution, exact_tag):
    if game.shape[-1] == 1:
        return exact_tag
    return f"grid({resolution:g})"


def _alpha(game, probs):
    return MixedStrategy(game.num_players - 1, probs)


# -- values ----------------------------------------------------------------

def _pure_profile_lp(game: GameSpec, z):
    """Max of the optimizer's payoff over mixes making pure profile ``z``
    an equilibrium of the induced learner game."""
    n = game.num_players
    k = game.shape[-1]
    rows = []
    for i in range(n - 1):
        here = game.payoffs[i][tuple(z)]
        for b in range(game.shape[i]):
            if b == z[i]:
                continue
            dev = list(z)
            dev[i] = b
            rows.append(game.payoffs[i][tuple(dev)] - here)
    a_ub = np.vstack([-np.eye(k)] + ([np.array(rows)] if rows else []))
    b_ub = np.zeros(a_ub.shape[0])
    system = LinearSystem(k, a_ub, b_ub, np.ones((1, k)), np.ones(1))
    return lp_solve(game.payoffs[n - 1][tuple(z)], system, maximize=True)


def pure_stackelberg_values(game: GameSpec, grid_resolution: float = DEFAULT_GRID):
    """``(V_pure, v_pure)`` as :class:`ValueResult`; ``V_pure`` is exact."""
    learner_shape = game.shape[:-1]
    best = None
    for z in np.ndindex(*learner_shape):
        res = _pure_profile_lp(game, z)
        if res.status != "optimal":
            continue
        if best is None or res.value > best[0] + TIE_TOL:
            best = (res.value, np.clip(res.x, 0.0, None), tuple(int(a) for a in z))
    if best is None:
        V = ValueResult("V_pure", None, None, None, "exact-lp")
    else:
        a = best[1] / best[1].sum()
        V = ValueResult("V_pure", float(best[0]), a, best[2], "exact-lp")

    skipped = []

    def pessimistic(alpha):
        g = induce_game(game, _alpha(game, alpha))
        eqs = pure_nash_profiles(g)
        if not eqs:
            skipped.append(alpha)
            return None, None
        vals = [g.leader_payoff[z] for z in eqs]
        j = int(np.argmin(vals))
        return float(vals[j]), eqs[j]

    val, alpha, wit, count = grid_maximize(game.shape[-1], grid_resolution, pessimistic)
    v = ValueResult(
        "v_pure", val, alpha, wit, _method(game, grid_resolution, "exact"), count, len(skipped)
    )
    return V, v


def mixed_stackelberg_values(game: GameSpec, grid_resolution: float = DEFAULT_GRID):
    """``(V_mixed, v_mixed)`` by grid search with exact enumeration of the
    learners' extreme equilibria at each optimizer mix."""
    check_size_cap(induce_game(game, MixedStrategy.uniform(game.num_players - 1, game.shape[-1])))
    cache = {}

    def extremes(alpha):
        key = alpha.tobytes()
        if key not in cache:
            g = induce_game(game, _alpha(game, alpha))
            eqs = mixed_nash_support_enumeration(g)
            if not eqs:
                raise InternalInvariantError("a finite game always has a Nash equilibrium")
            vals = []
            for prof in eqs:
                t = g.leader_payoff
                for s in reversed(prof.strategies):
                    t = t @ s.probs
                vals.append(float(t))
            hi, lo = int(np.argmax(vals)), int(np.argmin(vals))
            cache[key] = ((vals[hi], eqs[hi]), (vals[lo], eqs[lo]))
        return cache[key]

    k = game.shape[-1]
    tag = _method(game, grid_resolution, "exact")
    val, a, wit, c = grid_maximize(k, grid_resolution, lambda x: extremes(x)[0])
    V = ValueResult("V_mixed", val, a, wit, tag, c)
    val, a, wit, c = grid_maximize(k, grid_resolution, lambda x: extremes(x)[1])
    v = ValueResult("v_mixed", val, a, wit, tag, c)
    return V, v


def _polytope_value(game, grid_resolution, set_kind, name):
    shape = game.shape[:-1]

    def inner(alpha):
        res = optimize_over_polytope(game, _alpha(game, alpha), set_kind, "min")
        phi = np.clip(res.x, 0.0, None)
        return res.value, JointDistribution.from_flat(
            tuple(range(game.num_players - 1)), shape, phi / phi.sum()
        )

    val, a, wit, c = grid_maximize(game.shape[-1], grid_resolution, inner)
    return ValueResult(name, val, a, wit, _method(game, grid_resolution, "exact-lp"), c)


def correlated_stackelberg_value(game: GameSpec, grid_resolution: float = DEFAULT_GRID):
    """Max over optimizer mixes of the worst correlated equilibrium of the
    induced learner game (inner problem is an exact LP)."""
    return _polytope_value(game, grid_resolution, CED, "v_corr")


def hannan_stackelberg_value(game: GameSpec, grid_resolution: float = DEFAULT_GRID):
    """As :func:`correlated_stackelberg_value` over the Hannan set."""
    return _polytope_value(game, grid_resolution, HANNAN, "v_h")


# -- report ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StackelbergReport:
    V_pure: ValueResult
    v_pure: ValueResult
    V_mixed: ValueResult
    v_mixed: ValueResult
    v_corr: ValueResult
    v_h: ValueResult
    grid_resolution: float
    chain_tolerance: float = CHAIN_TOL
    lp_tolerance: float = 1e-9
    values: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", {
            r.name: r for r in
            (self.V_pure, self.v_pure, self.V_mixed, self.v_mixed, self.v_corr, self.v_h)
        })

    @property
    def pure_everywhere(self) -> bool:
        """Pure values exist and every evaluated optimizer mix induces a
        learner game with a pure equilibrium."""
        return self.V_pure.exists and self.v_pure.exists and self.v_pure.skipped_points == 0

    def chain_checks(self, tol: float | None = None) -> list:
        """``(lhs, rhs, slack, ok)`` for each link of
        v_h <= v_corr <= v_mixed <= v_pure <= V_pure <= V_mixed.

        The pure links are only checked when :attr:`pure_everywhere` holds.
        Otherwise the pessimistic pure value ignores mixes without a pure
        equilibrium and may legitimately fall below ``v_mixed``.
        """
        tol = self.chain_tolerance if tol is None else tol
        order = ["v_h", "v_corr", "v_mixed", "v_pure", "V_pure", "V_mixed"]
        if not self.pure_everywhere:
            order = ["v_h", "v_corr", "v_mixed", "V_mixed"]
        out = []
        for lo, hi in zip(order, order[1:]):
            slack = self.values[hi].value - self.values[lo].value
            out.append((lo, hi, slack, slack >= -tol))
        return out

    def chain_holds(self, tol: float | None = None) -> bool:
        return all(ok for *_, ok in self.chain_checks(tol))

    def to_dict(self) -> dict:
        return {
            "grid_resolution": self.grid_resolution,
            "lp_tolerance": self.lp_tolerance,
            "values": {name: r.to_dict() for name, r in self.values.items()},
            "chain": [
                {"lhs": lo, "rhs": hi, "slack": float(s), "ok": bool(ok)}
                for lo, hi, s, ok in self.chain_checks()
            ],
            "chain_tolerance": self.chain_tolerance,
            "pure_links_checked": self.pure_everywhere,
        }


def stackelberg_report(game: GameSpec, grid_resolution: float = DEFAULT_GRID) -> StackelbergReport:
    V_mixed, v_mixed = mixed_stackelberg_values(game, grid_resolution)
    V_pure, v_pure = pure_stackelberg_values(game, grid_resolution)
    return StackelbergReport(
        V_pure=V_pure,
        v_pure=v_pure,
        V_mixed=V_mixed,
        v_mixed=v_mixed,
        v_corr=correlated_stackelberg_value(game, grid_resolution),
        v_h=hannan_stackelberg_value(game, grid_resolution),
        grid_resolution=grid_resolution,
    )
