"""Random instances and exhaustive oracles shared by the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np

from tornado_retrofit.geometry import Rect, segment_cover_feasible
from tornado_retrofit.model import Instance, RetrofitPlan
from tornado_retrofit.params import RawBlock, build_instance, cluster_blocks, example_config
from tornado_retrofit.second_stage import solve_q


def random_instance(rng: np.random.Generator, n_locations=None, n_strategies=2, n_plans=2,
                    max_locations=8, length=None, box=4.0) -> Instance:
    """Integer dislocations so that sums are exact in floating point."""
    L = int(n_locations or rng.integers(1, max_locations + 1))
    S, P = n_strategies, n_plans
    coords = rng.uniform(0.0, box, size=(L, 2))
    pop = rng.integers(50, 200, size=L).astype(float)
    d = np.zeros((L, S), dtype=np.int64)
    d[:, 1:] = rng.integers(1, 50, size=(L, S - 1)) * 100
    g = np.zeros((L, S, P))
    for l in range(L):
        for s in range(S):
            top = int(rng.integers(10, int(pop[l])))
            vals = sorted((int(v) for v in rng.integers(0, top + 1, size=P - 1)), reverse=True)
            g[l, s] = [top] + vals
    # retrofitting never makes things worse
    g[:, 1:, :] = np.minimum(g[:, 1:, :], g[:, :1, :])
    c = np.zeros((L, S, P), dtype=np.int64)
    c[:, :, 1:] = rng.integers(1, 50, size=(L, S, P - 1)) * 100
    return Instance(
        ids=[f"L{i}" for i in range(L)], coords=coords, population=pop, area=np.ones(L),
        w=np.zeros((L, S)), d=d, g=g, c=c, budget=int(rng.integers(0, 60)) * 100,
        delta=float(rng.uniform(0.2, 1.0)),
        length=float(rng.uniform(0.5, 4.0)) if length is None else length,
        rect=Rect(-1.0, box + 1.0, -1.0, box + 1.0),
    )


def make_testbed(seed: int, n_locations: int = 10) -> Instance:
    """Ten blocks scattered over a small town, parameters from the example
    fragility config."""
    rng = np.random.default_rng(seed)
    blocks = [RawBlock(f"b{i}", (float(x), float(y)), float(rng.integers(20, 150)), float(rng.uniform(800, 4000)))
              for i, (x, y) in enumerate(rng.uniform(0, 4.0, size=(n_locations, 2)))]
    locs = cluster_blocks(blocks, n_locations, seed)
    budget = float(rng.uniform(0.5, 2.0)) * 1e5
    return build_instance(locs, example_config(), budget, delta=0.375, length=2.0, rect=Rect(-0.5, 4.5, -0.5, 4.5))


def sweep_line_count(points, delta: float, n_angles: int = 3600) -> int:
    """Most points within ``delta`` of one line, over a dense grid of line
    angles. For each angle the best offset is found exactly by sliding a
    window of width 2*delta over the sorted normal projections, so the grid
    only ever underestimates the true maximum."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return 0
    theta = np.linspace(0.0, math.pi, n_angles, endpoint=False)
    proj = np.sort(pts @ np.stack([np.cos(theta), np.sin(theta)]), axis=0)   # (n, angles)
    best = 1
    for k in range(len(pts)):
        reach = np.sum(proj <= proj[k] + 2 * delta + 1e-12, axis=0) - k
        best = max(best, int(reach.max()))
    return best


class CoverCache:
    def __init__(self, inst: Instance):
        self.inst = inst
        self.cache = {}

    def __call__(self, active) -> bool:
        active = tuple(active)
        if not active:
            return True
        if active not in self.cache:
            inst = self.inst
            self.cache[active] = segment_cover_feasible(inst.coords[list(active)], inst.delta, inst.length,
                                                        inst.rect).feasible
        return self.cache[active]


def feasible_coverages(inst: Instance, cover=None):
    cover = cover or CoverCache(inst)
    for z in itertools.product((0, 1), repeat=inst.n_locations):
        if cover(tuple(i for i, v in enumerate(z) if v)):
            yield z


def oracle_phi(plan: RetrofitPlan, inst: Instance, cover=None) -> float:
    """max over realizable z of the exact recourse value, by enumeration."""
    cover = cover or CoverCache(inst)
    return max(solve_q(z, plan, inst).objective for z in feasible_coverages(inst, cover))


def oracle_value(inst: Instance) -> float:
    """min over affordable plans of pre-dislocation plus the oracle worst case."""
    cover = CoverCache(inst)
    zs = list(feasible_coverages(inst, cover))
    best = math.inf
    for f in itertools.product(range(inst.n_strategies), repeat=inst.n_locations):
        plan = RetrofitPlan(f)
        if plan.cost(inst) > inst.budget:
            continue
        v = plan.pre_dislocation(inst) + max(solve_q(z, plan, inst).objective for z in zs)
        best = min(best, v)
    return best
