"""Pure and mixed Nash equilibria of small games.

Two-player games are handled exactly, including degenerate ones: for every
pair of supports ``(S1, S2)`` the strategies of player 2 on ``S2`` making
all of ``S1`` best replies form a polytope (and symmetrically for player 1),
every product of the two polytopes consists of equilibria, and every
equilibrium lies in one such product. We return the vertex pairs, i.e. the
extreme equilibria; any multilinear objective attains its extremes over the
equilibrium set there. One-player games reduce to pure best replies.

Three-player games use support enumeration with the indifference
equations solved numerically from several starting points.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy import optimize

from ..errors import UnsupportedSizeError
from ..game_model import BEST_REPLY_TOL, GameSpec, MixedProfile, payoff_vector

MAX_PLAYERS = 3
MAX_ACTIONS = 4
VERIFY_TOL = 1e-7
_ROOT_STARTS = 6


def check_size_cap(game: GameSpec):
    if game.num_players > MAX_PLAYERS or max(game.shape) > MAX_ACTIONS:
        raise UnsupportedSizeError(
            f"mixed Nash enumeration supports at most {MAX_PLAYERS} players with "
            f"{MAX_ACTIONS} actions each; got {game.num_players} players with {game.shape}"
        )


def pure_nash_profiles(game: GameSpec) -> list:
    """All pure profiles where every action is a best reply (tol 1e-9)."""
    mask = np.ones(game.shape, dtype=bool)
    for i in range(game.num_players):
        u = game.payoffs[i]
        mask &= u >= u.max(axis=i, keepdims=True) - BEST_REPLY_TOL
    return [tuple(int(a) for a in idx) for idx in np.argwhere(mask)]


def is_nash(game: GameSpec, profile: MixedProfile, tol: float = VERIFY_TOL) -> bool:
    for s in profile:
        others = MixedProfile(tuple(t for t in profile if t.player != s.player))
        v = payoff_vector(game, s.player, others)
        if s.probs @ v < v.max() - tol:
            return False
    return True


def _subsets(k):
    for r in range(1, k + 1):
        yield from itertools.combinations(range(k), r)


def _vertices(E, e, G, g, tol=1e-9):
    """Vertices of ``{z : E z = e, G z <= g}``."""
    s = E.shape[1]
    rank = np.linalg.matrix_rank(E)
    need = s - rank
    out = []
    for rows in itertools.combinations(range(G.shape[0]), need):
        M = np.vstack([E, G[list(rows)]]) if rows else E
        rhs = np.concatenate([e, g[list(rows)]]) if rows else e
        if np.linalg.matrix_rank(M) < s:
            continue
        z, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        if np.all(np.abs(E @ z - e) <= tol) and np.all(G @ z <= g + tol):
            out.append(z)
    return out


def _indifference_polytope(u, rows, cols):
    """Vertices of strategies ``z`` over ``cols`` such that every row in
    ``rows`` is a best reply of the row player with payoff matrix ``u``."""
    s = len(cols)
    sub = u[:, list(cols)]
    r0 = rows[0]
    E = [np.ones(s)] + [sub[r] - sub[r0] for r in rows[1:]]
    e = [1.0] + [0.0] * (len(rows) - 1)
    G = [-row for row in np.eye(s)] + [
        sub[c] - sub[r0] for c in range(u.shape[0]) if c not in rows
    ]
    g = [0.0] * len(G)
    verts = _vertices(np.array(E), np.array(e), np.array(G), np.array(g))
    full = []
    for z in verts:
        x = np.zeros(u.shape[1])
        x[list(cols)] = np.clip(z, 0.0, None)
        full.append(x / x.sum())
    return full


def _two_player(game: GameSpec) -> list:
    u1, u2 = game.payoffs
    k1, k2 = game.shape
    found = []
    for s1 in _subsets(k1):
        for s2 in _subsets(k2):
            ys = _indifference_polytope(u1, s1, s2)
            if not ys:
                continue
            xs = _indifference_polytope(u2.T, s2, s1)
            for x in xs:
                for y in ys:
                    found.append((x, y))
    return found


def _three_player(game: GameSpec, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    shape = game.shape
    found = []
    for supports in itertools.product(*(list(_subsets(k)) for k in shape)):
        sizes = [len(s) for s in supports]
        offsets = np.cumsum([0] + sizes)

        def unpack(v):
            out = []
            for i, s in enumerate(supports):
                x = np.zeros(shape[i])
                x[list(s)] = v[offsets[i]:offsets[i + 1]]
                out.append(x)
            return out

        def equations(v):
            xs = unpack(v)
            res = []
            for i, s in enumerate(supports):
                pay = np.moveaxis(game.payoffs[i], i, 0)
                rest = [xs[j] for j in range(3) if j != i]
                vals = pay @ rest[1] @ rest[0]
                res.extend(vals[list(s[1:])] - vals[s[0]])
                res.append(xs[i].sum() - 1.0)
            return np.array(res)

        if sum(sizes) == len(sizes):
            found.append(tuple(unpack(np.ones(len(sizes)))))
            continue
        starts = [np.concatenate([np.full(k, 1.0 / k) for k in sizes])]
        for _ in range(_ROOT_STARTS - 1):
            starts.append(np.concatenate([rng.dirichlet(np.ones(k)) for k in sizes]))
        for v0 in starts:
            sol = optimize.root(equations, v0, method="hybr")
            if not sol.success or np.max(np.abs(equations(sol.x))) > 1e-10:
                continue
            if np.any(sol.x < -1e-9):
                continue
            xs = [np.clip(x, 0.0, None) for x in unpack(sol.x)]
            found.append(tuple(x / x.sum() for x in xs))
    return found


def mixed_nash_support_enumeration(game: GameSpec) -> list:
    """Extreme Nash equilibria of a game with at most 3 players and 4
    actions each, as a deterministic list of :class:`MixedProfile`."""
    check_size_cap(game)
    n = game.num_players
    if n == 1:
        u = game.payoffs[0]
        best = np.flatnonzero(u >= u.max() - BEST_REPLY_TOL)
        return [MixedProfile.pure(game, (int(a),)) for a in best]
    candidates = _two_player(game) if n == 2 else _three_player(game)
    seen = set()
    result = []
    for probs in candidates:
        profile = MixedProfile.from_probs([p / p.sum() for p in probs])
        if not is_nash(game, profile):
            continue
        key = tuple(np.round(np.concatenate(probs), 9).tolist())
        if key in seen:
            continue
        seen.add(key)
        result.append((key, profile))
    result.sort(key=lambda kv: kv[0])
    return [p for _, p in result]
