"""Dense two-phase simplex with Bland's pivoting rule.

Problems are small (tens of variables) so a full tableau is fine. Bland's
rule (lowest-index entering column, lowest-index leaving basic variable on
ratio ties) makes the pivot sequence deterministic and prevents cycling,
which matters because correlated-equilibrium polytopes are highly
degenerate.

Variables are free unless the system contains a row of the exact form
``-x_j <= 0``; such rows are turned into sign bounds instead of constraints.
Free variables are split as ``x = x+ - x-``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InternalInvariantError, InvalidInputError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
MAX_PIVOTS = 100_000


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """``A_ub @ x <= b_ub`` and ``A_eq @ x == b_eq`` over ``num_vars`` reals."""

    num_vars: int
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None

    def __post_init__(self):
        n = int(self.num_vars)
        for a_name, b_name in (("A_ub", "b_ub"), ("A_eq", "b_eq")):
            a, b = getattr(self, a_name), getattr(self, b_name)
            a = np.zeros((0, n)) if a is None else np.atleast_2d(np.asarray(a, dtype=float))
            b = np.zeros(0) if b is None else np.asarray(b, dtype=float).ravel()
            if a.size == 0:
                a = a.reshape(0, n)
            if a.shape[1] != n:
                raise InvalidInputError(
                    f"{a_name} has {a.shape[1]} columns, expected {n}"
                )
            if a.shape[0] != b.size:
                raise InvalidInputError(f"{a_name} and {b_name} row counts differ")
            object.__setattr__(self, a_name, a)
            object.__setattr__(self, b_name, b)
        object.__setattr__(self, "num_vars", n)

    @classmethod
    def from_rows(cls, num_vars, inequalities=(), equalities=()):
        ineq = list(inequalities)
        eq = list(equalities)
        return cls(
            num_vars,
            np.array([c for c, _ in ineq], dtype=float).reshape(len(ineq), num_vars),
            np.array([b for _, b in ineq], dtype=float),
            np.array([c for c, _ in eq], dtype=float).reshape(len(eq), num_vars),
            np.array([b for _, b in eq], dtype=float),
        )

    @property
    def inequalities(self):
        return list(zip(self.A_ub, self.b_ub))

    @property
    def equalities(self):
        return list(zip(self.A_eq, self.b_eq))

    def is_feasible(self, x, tol: float = FEAS_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        ok_ub = np.all(self.A_ub @ x <= self.b_ub + tol) if len(self.b_ub) else True
        ok_eq = np.all(np.abs(self.A_eq @ x - self.b_eq) <= tol) if len(self.b_eq) else True
        return bool(ok_ub and ok_eq)

    def stack(self, other: "LinearSystem") -> "LinearSystem":
        if other.num_vars != self.num_vars:
            raise InvalidInputError("cannot stack systems over different variables")
        return LinearSystem(
            self.num_vars,
            np.vstack([self.A_ub, other.A_ub]),
            np.concatenate([self.b_ub, other.b_ub]),
            np.vstack([self.A_eq, other.A_eq]),
            np.concatenate([self.b_eq, other.b_eq]),
        )


@dataclass(frozen=True, eq=False)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float | None = None
    x: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _pivot(T, row, col):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])


def _simplex(T, basis, num_cols):
    """Minimize the objective in the last row of ``T`` over columns
    ``< num_cols``. Returns "optimal" or "unbounded"."""
    m = T.shape[0] - 1
    for _ in range(MAX_PIVOTS):
        reduced = T[-1, :num_cols]
        candidates = np.flatnonzero(reduced < -PIVOT_TOL)
        if candidates.size == 0:
            return "optimal"
        col = int(candidates[0])
        column = T[:m, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded"
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        row = int(min(tied, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
    raise InternalInvariantError("simplex pivot limit exceeded")


def _sign_bounds(system: LinearSystem):
    """Detect rows ``-x_j <= 0`` and return (nonneg mask, remaining row mask)."""
    a, b = system.A_ub, system.b_ub
    nonneg = np.zeros(system.num_vars, dtype=bool)
    keep = np.ones(len(b), dtype=bool)
    if len(b):
        nz = np.count_nonzero(a, axis=1)
        for r in np.flatnonzero((nz == 1) & (b == 0)):
            j = int(np.flatnonzero(a[r])[0])
            if a[r, j] < 0:
                nonneg[j] = True
                keep[r] = False
    return nonneg, keep


def lp_solve(objective, system: LinearSystem, maximize: bool = False) -> LPResult:
    """Optimize ``objective @ x`` over ``system``.

    Infeasible and unbounded problems are reported through ``status``.
    """
    c = np.asarray(objective, dtype=float).ravel()
    if c.size != system.num_vars:
        raise InvalidInputError(
            f"objective has {c.size} coefficients, system has {system.num_vars} variables"
        )
    sign = -1.0 if maximize else 1.0
    n = system.num_vars

    nonneg, keep = _sign_bounds(system)
    # column map: x = S @ y, y >= 0
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cols.append(e)
        if not nonneg[j]:
            cols.append(-e)
    S = np.array(cols).T
    a_ub = system.A_ub[keep] @ S
    b_ub = system.b_ub[keep]
    a_eq = system.A_eq @ S
    b_eq = system.b_eq
    ny = S.shape[1]
    m_ub, m_eq = len(b_ub), len(b_eq)
    m = m_ub + m_eq

    if m == 0:
        cy = sign * (c @ S)
        if np.any(cy < -PIVOT_TOL):
            return LPResult("unbounded")
        return LPResult("optimal", 0.0, np.zeros(n))

    # standard form rows: [A_ub I; A_eq 0] [y; s] = b
    A = np.zeros((m, ny + m_ub))
    A[:m_ub, :ny] = a_ub
    A[:m_ub, ny:] = np.eye(m_ub)
    A[m_ub:, :ny] = a_eq
    b = np.concatenate([b_ub, b_eq])
    flip = b < 0
    A[flip] *= -1.0
    b = np.where(flip, -b, b)

    # slack columns can start in the basis on unflipped <= rows
    n_struct = A.shape[1]
    basis = [-1] * m
    needs_art = []
    for r in range(m):
        if r < m_ub and not flip[r]:
            basis[r] = ny + r
        else:
            needs_art.append(r)
    n_art = len(needs_art)
    T = np.zeros((m + 1, n_struct + n_art + 1))
    T[:m, :n_struct] = A
    T[:m, -1] = b
    for k, r in enumerate(needs_art):
        T[r, n_struct + k] = 1.0
        basis[r] = n_struct + k

    if n_art:
        # phase 1: minimize the sum of artificials
        T[-1, n_struct:n_struct + n_art] = 1.0
        for r in needs_art:
            T[-1] -= T[r]
        status = _simplex(T, basis, n_struct + n_art)
        if status != "optimal":
            raise InternalInvariantError("phase 1 cannot be unbounded")
        if -T[-1, -1] > FEAS_TOL * max(1.0, float(np.abs(b).max())):
            return LPResult("infeasible")
        # drive zero-level artificials out of the basis
        r = 0
        while r < T.shape[0] - 1:
            if basis[r] >= n_struct:
                nz = np.flatnonzero(np.abs(T[r, :n_struct]) > PIVOT_TOL)
                if nz.size:
                    _pivot(T, r, int(nz[0]))
                    basis[r] = int(nz[0])
                else:
                    T = np.delete(T, r, axis=0)
                    del basis[r]
                    continue
            r += 1
        T = np.delete(T, np.s_[n_struct:n_struct + n_art], axis=1)

    # phase 2
    cost = np.zeros(n_struct)
    cost[:ny] = sign * (c @ S)
    T[-1] = 0.0
    T[-1, :n_struct] = cost
    for r, j in enumerate(basis):
        if cost[j] != 0.0:
            T[-1] -= cost[j] * T[r]
    status = _simplex(T, basis, n_struct)
    if status == "unbounded":
        return LPResult("unbounded")
    y = np.zeros(n_struct)
    for r, j in enumerate(basis):
        y[j] = T[r, -1]
    x = S @ y[:ny]
    return LPResult("optimal", float(c @ x), x)
