"""Dense linear-program solver (two-phase primal simplex, Bland's rule).

Solves
    maximize    c^T v
    subject to  G v <= h
                A v == b
                bounds[j][0] <= v_j <= bounds[j][1]

Variables are free by default.  The solver is self-contained and
deterministic: Bland's anti-cycling rule fixes the pivot choice, so a
given LinearProgram always produces the same LpOutcome.  Intended for
desk-scale instances (up to a few thousand rows/columns), where a dense
tableau is simpler and fast enough.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

# Pivot entries smaller than PIVOT_TOL are treated as zero; a solution is
# accepted as feasible when constraint violations stay below FEAS_TOL.
PIVOT_TOL = 1e-10
FEAS_TOL = 1e-7

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """Maximization LP with inequality rows, equality rows, and bounds.

    c: objective coefficients, length nv.
    G, h: inequality system G v <= h (G is m_i x nv).
    A, b: equality system A v == b (A is m_e x nv).
    bounds: per-variable (low, high) with None meaning unbounded;
        None as a whole means all variables free.
    """

    c: np.ndarray
    G: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    bounds: Optional[Sequence[Tuple[Optional[float], Optional[float]]]] = None

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float)
        object.__setattr__(self, "c", c)
        nv = c.shape[0]
        for mat_name, rhs_name in (("G", "h"), ("A", "b")):
            mat = getattr(self, mat_name)
            rhs = getattr(self, rhs_name)
            if (mat is None) != (rhs is None):
                raise ValueError(f"{mat_name} and {rhs_name} must be given together")
            if mat is None:
                continue
            mat = np.asarray(mat, dtype=float)
            if mat.ndim != 2:
                mat = mat.reshape(-1, nv)
            rhs = np.asarray(rhs, dtype=float).reshape(-1)
            if mat.shape != (rhs.shape[0], nv):
                raise ValueError(
                    f"{mat_name} has shape {mat.shape}, expected ({rhs.shape[0]}, {nv})"
                )
            if not (np.all(np.isfinite(mat)) and np.all(np.isfinite(rhs))):
                raise ValueError(f"{mat_name}/{rhs_name} must be finite")
            object.__setattr__(self, mat_name, mat)
            object.__setattr__(self, rhs_name, rhs)
        if self.bounds is not None and len(self.bounds) != nv:
            raise ValueError("bounds length must match number of variables")

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]


@dataclass(frozen=True)
class LpOutcome:
    """Solver result: status plus the maximizer and objective value."""

    status: str
    x: Optional[np.ndarray] = None
    value: Optional[float] = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _standard_form(lp: LinearProgram):
    """Rewrite lp over nonnegative variables.

    Returns (c, Aeq, beq, n_ineq, recover) where the standard problem is
        maximize c^T y  s.t.  Aeq y == beq, y >= 0,
    the first rows of Aeq carry slack columns for inequalities, and
    recover(y) maps a standard-form point back to the original variables.
    """
    nv = lp.num_vars
    bounds = lp.bounds if lp.bounds is not None else [(None, None)] * nv

    # Column build-up: each original variable becomes either one shifted
    # nonnegative column or a split pair; finite upper bounds become rows.
    col_plus = np.full(nv, -1, dtype=int)
    col_minus = np.full(nv, -1, dtype=int)
    shift = np.zeros(nv)
    ncols = 0
    extra_rows = []  # (var index, upper bound) handled as y_j <= hi - lo
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None and hi is not None and hi < lo:
            return None  # bound-infeasible
        if lo is None:
            col_plus[j] = ncols
            col_minus[j] = ncols + 1
            ncols += 2
        else:
            col_plus[j] = ncols
            shift[j] = lo
            ncols += 1
        if hi is not None:
            extra_rows.append((j, hi))

    def expand(mat: np.ndarray) -> np.ndarray:
        out = np.zeros((mat.shape[0], ncols))
        for j in range(nv):
            out[:, col_plus[j]] += mat[:, j]
            if col_minus[j] >= 0:
                out[:, col_minus[j]] -= mat[:, j]
        return out

    G = lp.G if lp.G is not None else np.zeros((0, nv))
    h = lp.h if lp.h is not None else np.zeros(0)
    if extra_rows:
        rows = np.zeros((len(extra_rows), nv))
        rhs = np.zeros(len(extra_rows))
        for k, (j, hi) in enumerate(extra_rows):
            rows[k, j] = 1.0
            rhs[k] = hi
        G = np.vstack([G, rows])
        h = np.concatenate([h, rhs])
    A = lp.A if lp.A is not None else np.zeros((0, nv))
    b = lp.b if lp.b is not None else np.zeros(0)

    # Shifts move constants to the right-hand side.
    h = h - G @ shift
    b = b - A @ shift
    c_obj = expand(lp.c.reshape(1, -1))[0]

    Gx = expand(G)
    Ax = expand(A)
    m_i = Gx.shape[0]
    slack = np.eye(m_i)
    Aeq = np.vstack(
        [
            np.hstack([Gx, slack]),
            np.hstack([Ax, np.zeros((Ax.shape[0], m_i))]),
        ]
    )
    beq = np.concatenate([h, b])
    c_full = np.concatenate([c_obj, np.zeros(m_i)])

    def recover(y: np.ndarray) -> np.ndarray:
        x = np.empty(nv)
        for j in range(nv):
            x[j] = y[col_plus[j]] + shift[j]
            if col_minus[j] >= 0:
                x[j] -= y[col_minus[j]]
        return x

    return c_full, Aeq, beq, m_i, recover


# After this many consecutive degenerate pivots the entering rule drops
# from Dantzig to Bland until the objective moves again; after twice as
# many the tableau is recomputed from pristine data.  Bland's rule only
# excludes cycles in exact arithmetic — hundreds of dense rank-one
# updates can drift row values far enough that a cycle survives it —
# so the periodic rebuild resets the drift that sustains such cycles.
STALL_SWITCH = 256
REBUILD_EVERY = 512


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    basis[row] = col


def _fresh_tableau(columns: np.ndarray, rhs: np.ndarray, cost: np.ndarray,
                   basis: np.ndarray, freeze_from: Optional[int] = None):
    """Recompute the tableau for a basis from the original data.

    Solves B T = [columns | rhs] and rebuilds the reduced-cost row, so
    every entry carries only one factorization's worth of rounding.
    `freeze_from` reapplies the phase-2 convention: columns from that
    index on are inactive and rows basic in them stay neutralized.
    Returns None when the basis matrix is numerically singular.
    """
    m = columns.shape[0]
    try:
        sol = np.linalg.solve(columns[:, basis],
                              np.hstack([columns, rhs[:, None]]))
    except np.linalg.LinAlgError:
        return None
    sol[:, -1] = np.maximum(sol[:, -1], 0.0)
    if freeze_from is not None:
        sol[:, freeze_from:-1] = 0.0
        sol[basis >= freeze_from] = 0.0
    out = np.zeros((m + 1, columns.shape[1] + 1))
    out[:m] = sol
    in_basis = cost[basis]
    out[-1, :] = np.concatenate([cost, [0.0]]) - in_basis @ sol
    return out


def _simplex(tableau: np.ndarray, basis: np.ndarray, ncols: int,
             rebuild=None) -> str:
    """Run primal simplex on a maximization tableau.

    tableau rows 0..m-1 are constraints with the RHS in the last column;
    the final row holds reduced costs (of -z).  Entering column: Dantzig
    (most positive reduced cost) while the objective moves, Bland
    (lowest index) during long degenerate runs.  Leaving row: minimum
    ratio, ties to the lowest basis index.  Long degenerate runs also
    trigger `rebuild`, which replaces the tableau with one recomputed
    from unpivoted data.  All three devices are deterministic, so
    reruns pivot identically.
    """
    m = tableau.shape[0] - 1
    rows = np.arange(m)
    degenerate_run = 0
    for _ in range(1000000):
        cost = tableau[-1, :ncols]
        if degenerate_run < STALL_SWITCH:
            enter = int(np.argmax(cost))
            if cost[enter] <= PIVOT_TOL:
                return OPTIMAL
        else:
            positive = np.flatnonzero(cost > PIVOT_TOL)
            if positive.size == 0:
                return OPTIMAL
            enter = int(positive[0])
        col = tableau[:m, enter]
        open_rows = col > PIVOT_TOL
        if not open_rows.any():
            return UNBOUNDED
        # Clamp drifted slightly-negative basic values: a feasible
        # tableau has none, and negative ratios derail the ratio test.
        rhs = np.maximum(tableau[:m, -1], 0.0)
        ratios = np.full(m, np.inf)
        ratios[open_rows] = rhs[open_rows] / col[open_rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_TOL]
        leave = int(ties[np.argmin(basis[ties])])
        if best <= PIVOT_TOL:
            degenerate_run += 1
            if rebuild is not None and degenerate_run % REBUILD_EVERY == 0:
                refreshed = rebuild(basis)
                if refreshed is not None:
                    tableau[:] = refreshed
                    continue
        else:
            degenerate_run = 0
        _pivot(tableau, basis, leave, enter)
    raise RuntimeError("simplex exceeded pivot limit")


def solve_lp(lp: LinearProgram) -> LpOutcome:
    """Solve the LP, returning status, argmax, and optimal value."""
    std = _standard_form(lp)
    if std is None:
        return LpOutcome(INFEASIBLE)
    c, Aeq, beq, _, recover = std
    m, n = Aeq.shape

    # Make every RHS nonnegative so artificials start feasible.
    neg = beq < 0
    Aeq = Aeq.copy()
    Aeq[neg] *= -1.0
    beq = beq.copy()
    beq[neg] *= -1.0

    # Phase 1: artificial basis, minimize the artificial sum.
    columns = np.hstack([Aeq, np.eye(m)])
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :-1] = columns
    tableau[:m, -1] = beq
    basis = np.arange(n, n + m)
    # Reduced costs for maximizing -(sum of artificials).
    tableau[-1, :n] = Aeq.sum(axis=0)
    tableau[-1, -1] = beq.sum()
    cost1 = np.concatenate([np.zeros(n), -np.ones(m)])
    status = _simplex(tableau, basis, n + m,
                      lambda bs: _fresh_tableau(columns, beq, cost1, bs))
    if status != OPTIMAL or tableau[-1, -1] > FEAS_TOL:
        return LpOutcome(INFEASIBLE)

    # Drive remaining artificials out of the basis; rows that cannot
    # pivot are redundant and get neutralized.
    for r in range(m):
        if basis[r] >= n:
            piv = -1
            for j in range(n):
                if abs(tableau[r, j]) > PIVOT_TOL:
                    piv = j
                    break
            if piv >= 0:
                _pivot(tableau, basis, r, piv)
            else:
                tableau[r, :] = 0.0
                tableau[r, basis[r]] = 1.0

    # Phase 2: original objective, artificial columns frozen.
    tableau[:, n : n + m] = 0.0
    tableau[-1, :] = 0.0
    tableau[-1, :n] = c
    for r in range(m):
        j = basis[r]
        if j < n and abs(tableau[-1, j]) > 0.0:
            tableau[-1] -= tableau[-1, j] * tableau[r]
    cost2 = np.concatenate([c, np.zeros(m)])
    status = _simplex(tableau, basis, n,
                      lambda bs: _fresh_tableau(columns, beq, cost2, bs,
                                                freeze_from=n))
    if status == UNBOUNDED:
        return LpOutcome(UNBOUNDED)

    y = np.zeros(n)
    for r in range(m):
        if basis[r] < n:
            y[basis[r]] = tableau[r, -1]
    x = recover(y)
    return LpOutcome(OPTIMAL, x=x, value=float(lp.c @ x))
