"""Exact recovery-plan selection for a fixed retrofit plan and tornado.

Only hit locations contribute dislocation, and the do-nothing plan costs
nothing, so unhit locations take plan 0 and the rest is a multiple-choice
knapsack: pick one plan per hit location, minimizing dislocation, within the
budget left after retrofitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .model import BudgetError, Instance, RetrofitPlan, TornadoScenario

DP_BUDGET_LIMIT = 10**7
DP_CELL_LIMIT = 2 * 10**7


@dataclass(frozen=True)
class RecoveryAssignment:
    plans: tuple[int, ...]
    objective: float
    spend: int  # cents


def _z_of(z) -> tuple[int, ...]:
    if isinstance(z, TornadoScenario):
        return z.z
    return tuple(int(bool(v)) for v in z)


def solve_q(z, plan: RetrofitPlan, inst: Instance, method: str = "auto") -> RecoveryAssignment:
    """Minimum post-tornado dislocation for coverage ``z`` under ``plan``.

    ``method`` is ``"dp"``, ``"bnb"`` or ``"auto"`` (DP when the scaled
    residual budget is small). Ties go to the lexicographically smallest
    plan vector.
    """
    z = _z_of(z)
    residual = inst.budget - plan.cost(inst)
    if residual < 0:
        raise BudgetError("retrofit cost alone exceeds the budget")
    hit = [l for l, v in enumerate(z) if v]
    costs = [[int(inst.c[l, plan.strategies[l], p]) for p in range(inst.n_plans)] for l in hit]
    values = [[float(inst.g[l, plan.strategies[l], p]) for p in range(inst.n_plans)] for l in hit]
    choice = choose_plans(costs, values, residual, method)
    plans = [0] * inst.n_locations
    for l, p in zip(hit, choice):
        plans[l] = p
    objective = math.fsum(values[k][p] for k, p in enumerate(choice))
    spend = sum(costs[k][p] for k, p in enumerate(choice))
    return RecoveryAssignment(tuple(plans), objective, spend)


def choose_plans(costs: Sequence[Sequence[int]], values: Sequence[Sequence[float]], budget: int,
                 method: str = "auto") -> list[int]:
    """Multiple-choice knapsack (minimization). Option 0 of each item must be
    affordable on its own; returns one option index per item."""
    n = len(costs)
    if n == 0:
        return []
    if method not in ("auto", "dp", "bnb"):
        raise ValueError(f"unknown method {method!r}")
    positive = [c for row in costs for c in row if c > 0]
    unit = reduce(math.gcd, positive, 0) or 1
    scaled = budget // unit
    if method == "dp" or (method == "auto" and scaled <= DP_BUDGET_LIMIT and (scaled + 1) * n <= DP_CELL_LIMIT):
        return _dp(costs, values, budget, unit)
    return _bnb(costs, values, budget)


def _dp(costs, values, budget: int, unit: int) -> list[int]:
    n = len(costs)
    cap = budget // unit
    ccost = [[c // unit for c in row] for row in costs]
    # tables[k][b]: best value of items k.. with at most b units
    tables = [None] * (n + 1)
    tables[n] = np.zeros(cap + 1)
    for k in range(n - 1, -1, -1):
        nxt = tables[k + 1]
        cur = np.full(cap + 1, np.inf)
        for p, (cp, vp) in enumerate(zip(ccost[k], values[k])):
            if cp > cap:
                continue
            cand = np.full(cap + 1, np.inf)
            cand[cp:] = nxt[: cap + 1 - cp] + vp
            np.minimum(cur, cand, out=cur)
        tables[k] = cur
    out = []
    rem = cap
    for k in range(n):
        target = tables[k][rem]
        for p, (cp, vp) in enumerate(zip(ccost[k], values[k])):
            if cp <= rem and tables[k + 1][rem - cp] + vp == target:
                out.append(p)
                rem -= cp
                break
        else:  # pragma: no cover - tables are built from these same expressions
            raise RuntimeError("DP reconstruction failed")
    return out


def _hull_segments(cost_row, value_row):
    """Upgrade steps along the lower convex hull from the cheapest option:
    list of (cost increase, value decrease) with decreasing efficiency."""
    pts = sorted(zip(cost_row, value_row))
    hull = []
    for c, v in pts:
        if hull and v >= hull[-1][1]:
            continue
        while len(hull) >= 2:
            (c1, v1), (c2, v2) = hull[-2], hull[-1]
            # drop the middle point if it lies on or above the chord
            if (v2 - v1) * (c - c1) >= (v - v1) * (c2 - c1):
                hull.pop()
            else:
                break
        hull.append((c, v))
    return [(hull[i + 1][0] - hull[i][0], hull[i][1] - hull[i + 1][1]) for i in range(len(hull) - 1)]


def _bnb(costs, values, budget: int) -> list[int]:
    """Depth-first branch and bound with the LP-relaxation bound."""
    n = len(costs)
    base = [min(zip(costs[k], values[k]))[1] for k in range(n)]
    base_cost = [min(costs[k]) for k in range(n)]
    # segments tagged with their item, sorted by value drop per cent
    segs = []
    for k in range(n):
        for dc, dv in _hull_segments(costs[k], values[k]):
            segs.append((-(dv / dc) if dc > 0 else -math.inf, k, dc, dv))
    segs.sort()
    suffix_base = [0.0] * (n + 1)
    suffix_cost = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix_base[k] = suffix_base[k + 1] + base[k]
        suffix_cost[k] = suffix_cost[k + 1] + base_cost[k]

    def bound(k: int, rem: int) -> float:
        rem -= suffix_cost[k]
        if rem < 0:
            return math.inf
        val = suffix_base[k]
        for _, item, dc, dv in segs:
            if item < k:
                continue
            if dc <= rem:
                rem -= dc
                val -= dv
            else:
                val -= dv * rem / dc
                break
        return val

    best_val = math.inf
    best: list[int] = []
    choice = [0] * n

    def dfs(k: int, rem: int, acc: float):
        nonlocal best_val, best
        if k == n:
            if not best or acc < best_val - 1e-12 * max(1.0, abs(best_val)):
                best_val, best = acc, choice.copy()
            return
        if best and acc + bound(k, rem) >= best_val - 1e-12 * max(1.0, abs(best_val)):
            return
        for p in range(len(costs[k])):
            cp = costs[k][p]
            if cp > rem:
                continue
            choice[k] = p
            dfs(k + 1, rem - cp, acc + values[k][p])

    dfs(0, budget, 0.0)
    if not best:
        raise BudgetError("no affordable recovery assignment")
    return best
