"""Dense bounded-variable primal simplex.

Solves ``min c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
``lb <= x <= ub``. Nonbasic variables sit at one of their bounds, so box
constraints never become rows. Phase 1 drives artificial variables to zero;
Dantzig pricing switches to Bland's rule after a run of degenerate pivots.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
FEAS_TOL = 1e-7
DEGENERATE_SWITCH = 50


@dataclass
class LPResult:
    status: str          # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    x: Optional[np.ndarray]
    objective: float
    iterations: int = 0


def _matrix(a, n: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, n))
    return np.asarray(a, dtype=float).reshape(-1, n)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lb=None, ub=None,
             maximize: bool = False, max_iter: Optional[int] = None) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = len(c)
    A_ub, A_eq = _matrix(A_ub, n), _matrix(A_eq, n)
    b_ub = np.asarray(b_ub if b_ub is not None else [], dtype=float)
    b_eq = np.asarray(b_eq if b_eq is not None else [], dtype=float)
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float).copy()
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float).copy()
    if np.any(lb > ub + FEAS_TOL):
        return LPResult("infeasible", None, np.nan)
    sign = -1.0 if maximize else 1.0

    # Map every original variable onto columns with a finite lower bound:
    # x = lb + y, x = ub - y, or x = y+ - y-.
    cols = []       # (orig index, factor)
    shift = np.zeros(n)
    col_lb, col_ub = [], []
    for j in range(n):
        if np.isfinite(lb[j]):
            cols.append([(j, 1.0)])
            shift[j] = lb[j]
            col_lb.append(0.0)
            col_ub.append(ub[j] - lb[j])
        elif np.isfinite(ub[j]):
            cols.append([(j, -1.0)])
            shift[j] = ub[j]
            col_lb.append(0.0)
            col_ub.append(np.inf)
        else:
            cols.append([(j, 1.0)])
            cols.append([(j, -1.0)])
            col_lb += [0.0, 0.0]
            col_ub += [np.inf, np.inf]
    T = np.zeros((n, len(cols)))
    for k, terms in enumerate(cols):
        for j, f in terms:
            T[j, k] = f

    m_ub, m_eq = len(b_ub), len(b_eq)
    A = np.vstack([A_ub @ T, A_eq @ T]) if (m_ub + m_eq) else np.zeros((0, len(cols)))
    b = np.concatenate([b_ub - A_ub @ shift, b_eq - A_eq @ shift])
    cost = sign * (c @ T)

    # equilibrate rows so one tolerance fits rows measured in cents and in persons
    scale = np.abs(A).max(axis=1, initial=0.0) if len(b) else np.zeros(0)
    scale[scale == 0] = 1.0
    A = A / scale[:, None]
    b = b / scale

    m = m_ub + m_eq
    nstruct = A.shape[1]
    # slacks for <= rows
    A = np.hstack([A, np.vstack([np.eye(m_ub), np.zeros((m_eq, m_ub))])]) if m_ub else A
    L = np.concatenate([np.array(col_lb), np.zeros(m_ub)])
    U = np.concatenate([np.array(col_ub), np.full(m_ub, np.inf)])
    cost = np.concatenate([cost, np.zeros(m_ub)])

    solver = _Simplex(A, b, L, U, nstruct, m_ub, max_iter)
    status = solver.run(cost)
    if status != "optimal":
        return LPResult(status, None, np.nan, solver.iterations)
    y = solver.x[:nstruct]
    x = T @ y + shift
    # snap to bounds
    x = np.where(np.isfinite(lb), np.maximum(x, lb), x)
    x = np.where(np.isfinite(ub), np.minimum(x, ub), x)
    obj = float(c @ x)
    return LPResult("optimal", x, obj, solver.iterations)


class _Simplex:
    def __init__(self, A, b, L, U, slack_start: int, n_slack: int, max_iter: Optional[int]):
        m, N = A.shape
        self.m = m
        x = L.copy()
        resid = b - A @ x
        # one artificial per row carrying the residual
        art = np.eye(m) * np.where(resid >= 0, 1.0, -1.0)
        self.A = np.hstack([A, art])
        self.L = np.concatenate([L, np.zeros(m)])
        self.U = np.concatenate([U, np.full(m, np.inf)])
        self.x = np.concatenate([x, np.abs(resid)])
        self.basis = list(range(N, N + m))
        self.b = b
        for i in range(min(n_slack, m)):
            if resid[i] >= 0:
                j = slack_start + i
                self.x[j] = resid[i]
                self.x[N + i] = 0.0
                self.basis[i] = j
        self.N = N
        self.iterations = 0
        self.max_iter = max_iter or 50 * (m + N + 10)

    def run(self, cost) -> str:
        N = self.N
        if self.m == 0:
            # bounded box only
            for j in range(N):
                if cost[j] < 0:
                    if not np.isfinite(self.U[j]):
                        return "unbounded"
                    self.x[j] = self.U[j]
            return "optimal"
        phase1 = np.concatenate([np.zeros(N), np.ones(self.m)])
        if any(j >= N for j in self.basis):
            st = self._iterate(phase1)
            if st != "optimal":
                return "iteration_limit" if st == "iteration_limit" else "infeasible"
            if np.any(self.x[N:] > FEAS_TOL * np.maximum(1.0, np.abs(self.b))):
                return "infeasible"
        # artificials may stay basic at zero but can never grow again
        self.U[N:] = 0.0
        self.x[N:] = 0.0
        full = np.concatenate([cost, np.zeros(self.m)])
        return self._iterate(full)

    def _iterate(self, cost) -> str:
        A, L, U = self.A, self.L, self.U
        total = A.shape[1]
        degenerate = 0
        while True:
            if self.iterations >= self.max_iter:
                return "iteration_limit"
            B = A[:, self.basis]
            try:
                y = np.linalg.solve(B.T, cost[self.basis])
            except np.linalg.LinAlgError:
                return "iteration_limit"
            d = cost - y @ A
            in_basis = np.zeros(total, dtype=bool)
            in_basis[self.basis] = True
            at_upper = np.isfinite(U) & (self.x >= U - PIVOT_TOL)
            at_lower = self.x <= L + PIVOT_TOL
            fixed = U - L <= PIVOT_TOL
            can_up = ~in_basis & ~fixed & at_lower & (d < -COST_TOL)
            can_down = ~in_basis & ~fixed & at_upper & (d > COST_TOL)
            eligible = np.nonzero(can_up | can_down)[0]
            if len(eligible) == 0:
                return "optimal"
            if degenerate >= DEGENERATE_SWITCH:
                j = int(eligible[0])
            else:
                j = int(eligible[np.argmax(np.abs(d[eligible]))])
            direction = 1.0 if can_up[j] else -1.0
            w = np.linalg.solve(B, A[:, j])
            rate = -direction * w          # d x_B / dt
            xb = self.x[self.basis]
            lb_b, ub_b = L[self.basis], U[self.basis]
            ratios = np.full(self.m, np.inf)
            dec = rate < -PIVOT_TOL
            inc = (rate > PIVOT_TOL) & np.isfinite(ub_b)
            ratios[dec] = (xb[dec] - lb_b[dec]) / -rate[dec]
            ratios[inc] = (ub_b[inc] - xb[inc]) / rate[inc]
            ratios = np.maximum(ratios, 0.0)
            flip = U[j] - L[j]
            t = min(ratios.min(initial=np.inf), flip)
            if not np.isfinite(t):
                return "unbounded"
            self.iterations += 1
            degenerate = degenerate + 1 if t <= PIVOT_TOL else 0
            self.x[self.basis] = xb + t * rate
            self.x[j] += direction * t
            if flip <= ratios.min(initial=np.inf):
                self.x[j] = U[j] if direction > 0 else L[j]
                continue
            ties = np.nonzero(ratios <= t + PIVOT_TOL)[0]
            if degenerate >= DEGENERATE_SWITCH:
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                r = int(ties[np.argmax(np.abs(rate[ties]))])
            leaving = self.basis[r]
            self.x[leaving] = lb_b[r] if rate[r] < 0 else ub_b[r]
            self.basis[r] = j
