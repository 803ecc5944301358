"""Embedded LP-based branch and bound for :class:`MilpModel`."""

from __future__ import annotations

import heapq
import itertools
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import MilpModel
from .simplex import solve_lp

INT_TOL = 1e-6


class NeedsExternalSolver(RuntimeError):
    """The model is larger than the embedded solver is configured to take."""


@dataclass
class SolveOptions:
    max_integers: int = 5000
    node_limit: int = 1_000_000
    int_tol: float = INT_TOL
    gap_tol: float = 1e-9
    log_path: Optional[str] = None


@dataclass
class MilpResult:
    status: str          # "optimal" | "infeasible" | "unbounded" | "node_limit"
    x: Optional[np.ndarray]
    objective: float
    nodes: int = 0

    def value(self, model: MilpModel, name: str) -> float:
        return float(self.x[model.index(name)])

    def as_dict(self, model: MilpModel) -> dict[str, float]:
        return {v.name: float(self.x[j]) for j, v in enumerate(model.variables)}


def _most_fractional(x: np.ndarray, mask: np.ndarray, tol: float) -> int:
    frac = np.abs(x - np.round(x))
    frac[~mask] = 0.0
    if frac.max(initial=0.0) <= tol:
        return -1
    # distance to 0.5, smallest wins; argmin returns the lowest index on ties
    return int(np.argmin(np.where(frac > tol, np.abs(frac - 0.5), np.inf)))


def solve_embedded(model: MilpModel, options: Optional[SolveOptions] = None) -> MilpResult:
    """Exact optimum by best-bound branch and bound on the most fractional
    variable; each node LP is solved by the bundled simplex."""
    opts = options or SolveOptions()
    model.validate()
    mask = model.integer_mask
    if int(mask.sum()) > opts.max_integers:
        raise NeedsExternalSolver(f"{int(mask.sum())} integer variables exceed the cap of {opts.max_integers}")
    c, A_ub, b_ub, A_eq, b_eq, lb, ub = model.arrays()
    lb = np.where(mask, np.ceil(lb - opts.int_tol), lb)
    ub = np.where(mask, np.floor(ub + opts.int_tol), ub)
    sign = -1.0 if model.maximize else 1.0
    log = open(opts.log_path, "w") if opts.log_path else None

    def relax(lo, hi):
        if np.any(lo > hi):
            return None
        return solve_lp(c, A_ub, b_ub, A_eq, b_eq, lo, hi, maximize=model.maximize)

    counter = itertools.count()
    best_x, best_val = None, math.inf       # internal minimization value
    nodes = 0
    root = relax(lb, ub)
    if root is not None and root.status == "iteration_limit":
        raise RuntimeError("simplex iteration limit reached at the root")
    if root is None or root.status == "infeasible":
        return MilpResult("infeasible", None, math.nan, 1)
    if root.status == "unbounded":
        return MilpResult("unbounded", None, math.nan, 1)
    heap = [(sign * root.objective, 0, next(counter), lb, ub, root)]
    try:
        while heap:
            bound, negdepth, nid, lo, hi, lp = heapq.heappop(heap)
            nodes += 1
            if nodes > opts.node_limit:
                return MilpResult("node_limit", best_x, _report(model, best_x), nodes)
            if best_x is not None and bound >= best_val - opts.gap_tol * max(1.0, abs(best_val)):
                continue
            j = _most_fractional(lp.x, mask, opts.int_tol)
            if log:
                log.write(json.dumps({"node": nid, "bound": sign * bound, "branch": j}) + "\n")
            if j < 0:
                x = lp.x.copy()
                x[mask] = np.round(x[mask])
                val = sign * model.evaluate(x) - sign * model.objective_constant
                if val < best_val:
                    best_x, best_val = x, val
                continue
            for side in (0, 1):
                nlo, nhi = lo.copy(), hi.copy()
                if side == 0:
                    nhi[j] = math.floor(lp.x[j])
                else:
                    nlo[j] = math.ceil(lp.x[j])
                child = relax(nlo, nhi)
                if child is not None and child.status == "iteration_limit":
                    raise RuntimeError("simplex iteration limit reached at a node")
                if child is None or child.status != "optimal":
                    continue
                cb = sign * child.objective
                # a child's relaxation can never beat its parent's
                assert cb >= bound - 1e-6 * max(1.0, abs(bound)), "LP bound increased down a branch"
                if best_x is None or cb < best_val - opts.gap_tol * max(1.0, abs(best_val)):
                    heapq.heappush(heap, (cb, negdepth - 1, next(counter), nlo, nhi, child))
    finally:
        if log:
            log.close()
    if best_x is None:
        return MilpResult("infeasible", None, math.nan, nodes)
    return MilpResult("optimal", best_x, _report(model, best_x), nodes)


def _report(model: MilpModel, x) -> float:
    return math.nan if x is None else model.evaluate(x)
