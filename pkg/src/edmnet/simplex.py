"""Two-phase primal simplex for equality-form LPs with bounded variables.

Solves::

    min  c @ x
    s.t. A @ x == b
         lower <= x <= upper        (lower finite, upper may be +inf)

Nonbasic variables rest on one of their bounds; entering and leaving choices
follow Bland's smallest-index rule, which rules out cycling on the heavily
degenerate problems produced by quantile regression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL = 1e-9


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray
    objective: float
    duals: np.ndarray  # simplex multipliers of the equality rows
    basis: tuple
    iterations: int


class _Tableau:
    """Revised-simplex state: basis indices plus bound status of nonbasics."""

    def __init__(self, A, b, lower, upper, basis, at_upper):
        self.A, self.b = A, b
        self.lower, self.upper = lower, upper
        self.basis = list(basis)
        self.at_upper = at_upper  # meaningful for nonbasic columns only
        self.iterations = 0

    def nonbasic_values(self):
        x = np.where(self.at_upper, self.upper, self.lower)
        x[self.basis] = 0.0
        return x

    def basic_values(self, B):
        x = self.nonbasic_values()
        return np.linalg.solve(B, self.b - self.A @ x)

    def solution(self):
        B = self.A[:, self.basis]
        x = self.nonbasic_values()
        x[self.basis] = self.basic_values(B)
        return x

    def run(self, c, max_iter):
        m, n = self.A.shape
        is_basic = np.zeros(n, dtype=bool)
        is_basic[self.basis] = True
        fixed = self.upper - self.lower <= TOL
        while self.iterations < max_iter:
            B = self.A[:, self.basis]
            x_b = self.basic_values(B)
            pi = np.linalg.solve(B.T, c[self.basis])
            d = c - pi @ self.A
            eligible = ~is_basic & ~fixed & (
                (~self.at_upper & (d < -TOL)) | (self.at_upper & (d > TOL))
            )
            hits = np.flatnonzero(eligible)
            if hits.size == 0:
                return "optimal", pi
            j = int(hits[0])
            direction = -1.0 if self.at_upper[j] else 1.0
            alpha = np.linalg.solve(B, self.A[:, j]) * direction
            # x_B(t) = x_b - t * alpha for step t >= 0
            step = self.upper[j] - self.lower[j]
            leave_pos, leave_to_upper = -1, False
            lb = self.lower[self.basis]
            ub = self.upper[self.basis]
            best_idx = n + 1 if np.isinf(step) else j
            for r in range(m):
                a = alpha[r]
                if a > TOL:
                    t, to_upper = (x_b[r] - lb[r]) / a, False
                elif a < -TOL and np.isfinite(ub[r]):
                    t, to_upper = (ub[r] - x_b[r]) / -a, True
                else:
                    continue
                t = max(t, 0.0)
                idx = self.basis[r]
                if t < step - TOL or (t <= step + TOL and idx < best_idx):
                    step, leave_pos, leave_to_upper, best_idx = t, r, to_upper, idx
            if np.isinf(step):
                return "unbounded", pi
            self.iterations += 1
            if leave_pos < 0:
                self.at_upper[j] = not self.at_upper[j]
                continue
            out = self.basis[leave_pos]
            is_basic[out] = False
            self.at_upper[out] = leave_to_upper
            self.basis[leave_pos] = j
            is_basic[j] = True
        raise RuntimeError(f"simplex did not terminate within {max_iter} iterations")


def solve_lp(c, A, b, lower, upper, start_at_upper=None, max_iter=None) -> LpResult:
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    m, n = A.shape
    if np.any(~np.isfinite(lower)):
        raise ValueError("lower bounds must be finite")
    if np.any(upper < lower - TOL):
        return LpResult("infeasible", np.full(n, np.nan), np.nan, np.full(m, np.nan), (), 0)
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    at_upper = np.zeros(n, dtype=bool)
    if start_at_upper is not None:
        at_upper[:] = np.asarray(start_at_upper, dtype=bool) & np.isfinite(upper)
    x0 = np.where(at_upper, upper, lower)
    resid = b - A @ x0
    sign = np.where(resid < 0, -1.0, 1.0)
    A1 = np.hstack([A * sign[:, None], np.eye(m)])
    b1 = b * sign
    lo1 = np.concatenate([lower, np.zeros(m)])
    up1 = np.concatenate([upper, np.full(m, np.inf)])
    tab = _Tableau(A1, b1, lo1, up1, range(n, n + m), np.concatenate([at_upper, np.zeros(m, dtype=bool)]))

    # Phase 1: drive the artificials to zero.
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    tab.run(c1, max_iter)
    x1 = tab.solution()
    infeas = float(x1[n:].sum())
    if infeas > TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
        return LpResult("infeasible", x1[:n], np.nan, np.full(m, np.nan), tuple(tab.basis), tab.iterations)

    # Pin artificials at zero and pivot basic ones out where possible.
    tab.upper = tab.upper.copy()
    tab.upper[n:] = 0.0
    for r, var in enumerate(list(tab.basis)):
        if var < n:
            continue
        B = A1[:, tab.basis]
        row = np.linalg.solve(B.T, np.eye(m)[r]) @ A1[:, :n]
        row[list(v for v in tab.basis if v < n)] = 0.0
        cand = np.flatnonzero(np.abs(row) > 1e-7)
        if cand.size:
            j = int(cand[0])
            tab.basis[r] = j
            # The artificial leaves at zero; j keeps its old bound value, which a
            # degenerate pivot preserves.
    # Phase 2 on the original objective.
    c2 = np.concatenate([c, np.zeros(m)])
    status, pi = tab.run(c2, max_iter)
    x = _snap(tab.solution()[:n], lower, upper)
    return LpResult(status, x, float(c @ x), pi * sign, tuple(tab.basis), tab.iterations)


def _snap(x, lower, upper, tol=1e-12):
    """Round values within ``tol`` of a bound onto it (basic values carry solve noise)."""
    x = np.where(np.abs(x - lower) <= tol * np.maximum(1.0, np.abs(lower)), lower, x)
    fin = np.isfinite(upper)
    near = fin & (np.abs(x - np.where(fin, upper, 0.0)) <= tol * np.maximum(1.0, np.abs(np.where(fin, upper, 0.0))))
    return np.where(near, upper, x)
