"""Dense two-phase simplex for the small linear programs used here.

Problems are stated as: maximize c @ x subject to A @ x <= b, x >= 0.
Equality constraints should be passed as two opposing inequalities. Sizes
stay tiny (tens of variables and rows), so a dense tableau with Bland's
rule is plenty and guarantees termination.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    constraint_matrix: np.ndarray
    constraint_bounds: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        a = np.atleast_2d(np.asarray(self.constraint_matrix, dtype=float))
        b = np.atleast_1d(np.asarray(self.constraint_bounds, dtype=float))
        if a.shape != (b.size, c.size):
            raise ValueError(f"constraint matrix is {a.shape}, "
                             f"expected ({b.size}, {c.size})")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraint_matrix", a)
        object.__setattr__(self, "constraint_bounds", b)


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal", "infeasible", or "unbounded"
    point: np.ndarray | None
    objective_value: float | None


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    for r in range(tableau.shape[0]):
        if r != row and abs(tableau[r, col]) > 0:
            tableau[r] -= tableau[r, col] * tableau[row]
    basis[row] = col


def _run_simplex(tableau: np.ndarray, basis: np.ndarray, num_cols: int) -> str:
    """Bland's rule on the given tableau; last row is the objective."""
    while True:
        obj = tableau[-1, :num_cols]
        entering = -1
        for j in range(num_cols):
            if obj[j] < -PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return "optimal"
        ratios = np.full(tableau.shape[0] - 1, np.inf)
        col = tableau[:-1, entering]
        positive = col > PIVOT_TOL
        ratios[positive] = tableau[:-1, -1][positive] / col[positive]
        if not positive.any():
            return "unbounded"
        best = ratios.min()
        # Bland: among minimal ratios, leave the smallest basis variable.
        leaving = min((basis[r], r) for r in range(len(ratios))
                      if ratios[r] <= best + PIVOT_TOL)[1]
        _pivot(tableau, basis, leaving, entering)


def solve(lp: LinearProgram) -> LpSolution:
    c = lp.objective
    a = lp.constraint_matrix.copy()
    b = lp.constraint_bounds.copy()
    num_rows, num_vars = a.shape

    # Make every bound nonnegative so slacks/artificials start feasible.
    flip = b < 0
    a[flip] *= -1.0
    b = np.abs(b)
    # Rows that were flipped become >= rows: slack coefficient -1, so they
    # need an artificial; original <= rows start basic on their slack.
    num_cols = num_vars + num_rows + int(flip.sum())
    tableau = np.zeros((num_rows + 1, num_cols + 1))
    tableau[:num_rows, :num_vars] = a
    tableau[:num_rows, -1] = b
    basis = np.zeros(num_rows, dtype=np.int64)
    art_cols = []
    next_art = num_vars + num_rows
    for r in range(num_rows):
        slack = num_vars + r
        tableau[r, slack] = -1.0 if flip[r] else 1.0
        if flip[r]:
            tableau[r, next_art] = 1.0
            basis[r] = next_art
            art_cols.append(next_art)
            next_art += 1
        else:
            basis[r] = slack

    if art_cols:
        # Phase 1: minimize artificial sum.
        for col in art_cols:
            tableau[-1, col] = 1.0
        for r in range(num_rows):
            if basis[r] in art_cols:
                tableau[-1] -= tableau[r]
        status = _run_simplex(tableau, basis, num_cols)
        if status != "optimal" or tableau[-1, -1] < -1e-8:
            return LpSolution("infeasible", None, None)
        # Drive any artificial still basic (at zero) out of the basis.
        for r in range(num_rows):
            if basis[r] in art_cols:
                cand = next((j for j in range(num_vars + num_rows)
                             if abs(tableau[r, j]) > PIVOT_TOL), None)
                if cand is not None:
                    _pivot(tableau, basis, r, cand)
        tableau[:, art_cols] = 0.0

    # Phase 2 objective (maximize c @ x as minimize -c @ x).
    tableau[-1, :] = 0.0
    tableau[-1, :num_vars] = -c
    for r in range(num_rows):
        if tableau[-1, basis[r]] != 0:
            tableau[-1] -= tableau[-1, basis[r]] * tableau[r]
    status = _run_simplex(tableau, basis, num_vars + num_rows)
    if status == "unbounded":
        return LpSolution("unbounded", None, None)
    x = np.zeros(num_vars)
    for r in range(num_rows):
        if basis[r] < num_vars:
            x[basis[r]] = tableau[r, -1]
    return LpSolution("optimal", x, float(c @ x))


def solve_lexicographic(lp: LinearProgram, tiebreak: np.ndarray) -> LpSolution:
    """Optimize lp, then break ties by maximizing `tiebreak` over its optimal
    face. The returned objective_value is still the primary one."""
    first = solve(lp)
    if first.status != "optimal":
        return first
    opt = first.objective_value
    a2 = np.vstack([lp.constraint_matrix, lp.objective, -lp.objective])
    b2 = np.concatenate([lp.constraint_bounds, [opt + 1e-9], [-opt + 1e-9]])
    second = solve(LinearProgram(np.asarray(tiebreak, dtype=float), a2, b2))
    if second.status != "optimal":
        return first
    return LpSolution("optimal", second.point,
                      float(lp.objective @ second.point))
