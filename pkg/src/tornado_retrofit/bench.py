"""Baselines and simulation: random retrofit policies, random tornadoes and
budget sweeps."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .ccg import CCGOptions, solve
from .dbc import Mode, solve_phi
from .geometry import Rect, Segment, covered_by_segment
from .model import Instance, RetrofitPlan
from .second_stage import solve_q

EPS = 1e-6


@dataclass(frozen=True)
class SimulationSummary:
    average: float
    maximum: float
    minimum: float
    std: float
    replications: int
    seed: Optional[int] = None
    values: tuple[float, ...] = field(default=(), repr=False)

    @classmethod
    def from_values(cls, values: Sequence[float], seed: Optional[int] = None) -> "SimulationSummary":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            raise ValueError("no values to summarize")
        if v.min() == v.max():
            avg, std = float(v[0]), 0.0
        else:
            avg = min(max(math.fsum(v) / v.size, float(v.min())), float(v.max()))
            std = math.sqrt(math.fsum((v - avg) ** 2) / v.size)
        return cls(avg, float(v.max()), float(v.min()), std, int(v.size), seed, tuple(float(x) for x in v))


def random_retrofit(inst: Instance, budget_fraction: float, seed: int,
                    max_attempts: Optional[int] = None) -> RetrofitPlan:
    """Draw (location, strategy) pairs uniformly and keep each one that still
    fits in ``budget_fraction`` of the budget. A location is retrofitted at
    most once. The rest of the budget is left for recovery."""
    if not 0.0 <= budget_fraction <= 1.0:
        raise ValueError("budget_fraction must lie in [0, 1]")
    L, S = inst.n_locations, inst.n_strategies
    allot = int(math.floor(budget_fraction * inst.budget))
    rng = np.random.default_rng(seed)
    strategies = [0] * L
    if S < 2 or L == 0:
        return RetrofitPlan(tuple(strategies))
    attempts = max_attempts if max_attempts is not None else 20 * L * S
    spent = 0
    for _ in range(attempts):
        free = [l for l in range(L) if strategies[l] == 0]
        if not free:
            break
        cheapest = min(int(inst.d[l, s]) for l in free for s in range(1, S))
        if spent + cheapest > allot:
            break
        l = free[int(rng.integers(len(free)))]
        s = int(rng.integers(1, S))
        cost = int(inst.d[l, s])
        if spent + cost <= allot:
            strategies[l] = s
            spent += cost
    return RetrofitPlan(tuple(strategies))


def evaluate_worst_case(plan: RetrofitPlan, inst: Instance, mode: Mode | str = Mode.DEC) -> float:
    """Pre-tornado dislocation plus the worst-case recovery dislocation."""
    return plan.pre_dislocation(inst) + solve_phi(plan, inst, mode).phi


def _clip(p0: np.ndarray, p1: np.ndarray, rect: Rect) -> Optional[Segment]:
    """Liang-Barsky clipping of p0->p1 against ``rect``."""
    d = p1 - p0
    t0, t1 = 0.0, 1.0
    for p, q in ((-d[0], p0[0] - rect.xmin), (d[0], rect.xmax - p0[0]),
                 (-d[1], p0[1] - rect.ymin), (d[1], rect.ymax - p0[1])):
        if p == 0:
            if q < 0:
                return None
            continue
        t = q / p
        if p < 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    a, b = p0 + t0 * d, p0 + t1 * d
    return Segment((float(a[0]), float(a[1])), (float(b[0]), float(b[1])))


def random_tornado(inst: Instance, rng: np.random.Generator, length_law: str = "fixed") -> Segment:
    """Start uniform in the rectangle, direction uniform, then clipped to the
    rectangle. An unbounded length becomes the rectangle's diagonal."""
    r = inst.rect
    E = inst.length if math.isfinite(inst.length) else math.hypot(r.xmax - r.xmin, r.ymax - r.ymin)
    if length_law == "fixed":
        length = E
    elif length_law == "uniform":
        length = float(rng.uniform(0.0, E))
    else:
        raise ValueError(f"unknown length law {length_law!r}")
    p0 = np.array([rng.uniform(r.xmin, r.xmax), rng.uniform(r.ymin, r.ymax)])
    angle = rng.uniform(0.0, 2.0 * math.pi)
    p1 = p0 + length * np.array([math.cos(angle), math.sin(angle)])
    seg = _clip(p0, p1, r)
    return seg if seg is not None else Segment(tuple(p0), tuple(p0))


def simulate_random_tornadoes(plan: RetrofitPlan, inst: Instance, n: int, seed: int,
                              length_law: str = "fixed") -> SimulationSummary:
    """Dislocation of ``plan`` under ``n`` random tornadoes, each recovered
    optimally. Replication ``i`` draws from its own child seed of ``seed``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    base = plan.pre_dislocation(inst)
    values = []
    for child in np.random.SeedSequence(seed).spawn(n):
        seg = random_tornado(inst, np.random.default_rng(child), length_law)
        z = covered_by_segment(inst.coords, seg, inst.delta)
        values.append(base + solve_q(z, plan, inst).objective)
    return SimulationSummary.from_values(values, seed)


@dataclass(frozen=True)
class SweepPoint:
    budget: int        # cents
    value: float
    strategies: tuple[int, ...]


def budget_sweep(inst: Instance, budgets: Sequence[int], options: Optional[CCGOptions] = None) -> list[SweepPoint]:
    """Robust optimum at each budget (cents, ascending)."""
    budgets = [int(b) for b in budgets]
    if any(b2 < b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ValueError("budgets must be ascending")
    done: dict[int, SweepPoint] = {}
    out = []
    for b in budgets:
        if b not in done:
            rep = solve(inst.replace(budget=b), options)
            done[b] = SweepPoint(b, rep.value, rep.plan.strategies)
        out.append(done[b])
    for p1, p2 in zip(out, out[1:]):
        if p2.value > p1.value + EPS:
            raise RuntimeError(f"value rose from {p1.value} to {p2.value} between budgets {p1.budget} and {p2.budget}")
    return out


def policy_rows(inst: Instance, fractions: Sequence[float], replications: int, seed: int,
                mode: Mode | str = Mode.DEC) -> list[dict]:
    """Worst-case dislocation of random policies, one row per retrofit
    fraction, summarized over ``replications`` seeded draws."""
    rows = []
    children = np.random.SeedSequence(seed).spawn(len(fractions))
    for frac, child in zip(fractions, children):
        seeds = child.generate_state(replications)
        vals = [evaluate_worst_case(random_retrofit(inst, frac, int(s)), inst, mode) for s in seeds]
        summ = SimulationSummary.from_values(vals, seed)
        rows.append({"policy": f"random-{frac:g}", **summary_row(summ)})
    return rows


def summary_row(s: SimulationSummary) -> dict:
    return {"average": s.average, "maximum": s.maximum, "minimum": s.minimum, "std": s.std,
            "replications": s.replications, "seed": s.seed}


SUMMARY_FIELDS = ["policy", "average", "maximum", "minimum", "std", "replications", "seed"]


def write_summary_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def write_sweep_csv(points: Sequence[SweepPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["budget_usd", "v"])
        for p in points:
            w.writerow([f"{p.budget / 100:.2f}", repr(p.value)])
