"""Worst-case tornado for a fixed retrofit plan.

The max-min problem is solved on its one-level form: maximize ``eta`` over
coverage vectors ``z`` subject to

* recourse cuts ``eta <= sum_l z_l g[l, f_l, r_l]``, one per known recovery
  assignment ``r``, and
* conflict cuts ``sum_{l in C} z_l <= |C| - 1`` for location sets ``C`` that
  no tornado can cover together.

Both families are generated lazily inside a best-first branch and bound
that this module owns. Three modes mirror the usual comparison:

``DEC``
    Pair and triple conflicts up front; every uncoverable active set found
    at an integral node becomes a global conflict cut.
``AVC``
    Same up-front conflicts, but integral nodes that turn out uncoverable
    are handed to the nonlinear bridge and cut off only inside their own
    subtree, as a solver working on the original constraint set would.
``ORG``
    No up-front conflicts, local handling as in ``AVC``.
"""

from __future__ import annotations

import heapq
import itertools
import json
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .geometry import CoverResult, infeasible_pairs, infeasible_triples, segment_cover_feasible
from .milp.simplex import solve_lp
from .model import Instance, RetrofitPlan, TornadoScenario
from .second_stage import RecoveryAssignment, solve_q

logger = logging.getLogger(__name__)

INT_TOL = 1e-6
CUT_TOL = 1e-7


class Mode(str, Enum):
    ORG = "ORG"
    AVC = "AVC"
    DEC = "DEC"


@dataclass
class CutPool:
    """Conflict sets (plan independent) and recourse vectors (plan specific)."""

    conflicts: list[tuple[int, ...]] = field(default_factory=list)
    origins: list[str] = field(default_factory=list)
    recourse: list[tuple[int, ...]] = field(default_factory=list)
    coeffs: list[np.ndarray] = field(default_factory=list)
    _seen_c: set = field(default_factory=set, repr=False)
    _seen_r: set = field(default_factory=set, repr=False)

    def add_conflict(self, members, origin: str) -> bool:
        key = tuple(sorted(int(i) for i in members))
        if key in self._seen_c:
            return False
        self._seen_c.add(key)
        self.conflicts.append(key)
        self.origins.append(origin)
        return True

    def add_recourse(self, plans: Sequence[int], coeffs: np.ndarray) -> bool:
        key = tuple(int(p) for p in plans)
        if key in self._seen_r:
            return False
        self._seen_r.add(key)
        self.recourse.append(key)
        self.coeffs.append(np.asarray(coeffs, dtype=float))
        return True

    def conflict_pool(self) -> "CutPool":
        """Copy holding only the conflict sets, for reuse under another plan."""
        out = CutPool()
        for c, o in zip(self.conflicts, self.origins):
            out.add_conflict(c, o)
        return out

    def count(self, origin: str) -> int:
        return sum(1 for o in self.origins if o == origin)


def recourse_coeffs(inst: Instance, plan: RetrofitPlan, plans: Sequence[int]) -> np.ndarray:
    idx = np.arange(inst.n_locations)
    return inst.g[idx, np.asarray(plan.strategies), np.asarray(plans)].astype(float)


def init_cut_pool(plan: RetrofitPlan, inst: Instance, mode: Mode | str = Mode.DEC,
                  conflicts: Optional[CutPool] = None) -> CutPool:
    """Starting pool: pair and triple conflicts (skipped in ``ORG``) and the
    recovery assignment that is optimal when nothing is hit."""
    mode = Mode(mode)
    pool = conflicts.conflict_pool() if conflicts is not None else CutPool()
    if mode is not Mode.ORG:
        for pair in sorted(infeasible_pairs(inst.coords, inst.delta, inst.length)):
            pool.add_conflict(pair, "pair")
        for triple in sorted(infeasible_triples(inst.coords, inst.delta)):
            pool.add_conflict(triple, "triple")
    r0 = solve_q((0,) * inst.n_locations, plan, inst)
    pool.add_recourse(r0.plans, recourse_coeffs(inst, plan, r0.plans))
    return pool


class CoverageOracle:
    """Cached segment-feasibility queries keyed by the active set."""

    def __init__(self, inst: Instance, cache: bool = True):
        self.inst = inst
        self.use_cache = cache
        self.cache: dict[tuple[int, ...], CoverResult] = {}
        self.calls = 0
        self.warnings: list[str] = []

    def __call__(self, active: tuple[int, ...]) -> CoverResult:
        if self.use_cache and active in self.cache:
            return self.cache[active]
        self.calls += 1
        inst = self.inst
        res = segment_cover_feasible(inst.coords[list(active)], inst.delta, inst.length, inst.rect)
        if res.status == "inconclusive":
            self.warnings.append(f"inconclusive geometry for {list(active)} (residual {res.residual:.3g})")
        if self.use_cache:
            self.cache[active] = res
        return res


@dataclass
class Verdict:
    kind: str                                   # "feasible" | "conflict" | "recourse"
    conflict: Optional[tuple[int, ...]] = None
    assignment: Optional[RecoveryAssignment] = None
    cover: Optional[CoverResult] = None


def separate(eta: float, z: Sequence[int], plan: RetrofitPlan, inst: Instance, pool: CutPool,
             oracle: Optional[Callable[[tuple[int, ...]], CoverResult]] = None) -> Verdict:
    """Check an integral candidate: coverability first, then the recourse
    value. Cuts are returned, not added."""
    z = tuple(int(round(v)) for v in z)
    active = tuple(i for i, v in enumerate(z) if v)
    oracle = oracle or CoverageOracle(inst)
    cover = oracle(active)
    if not cover.feasible:
        return Verdict("conflict", conflict=active, cover=cover)
    q = solve_q(z, plan, inst)
    if eta > q.objective + CUT_TOL * max(1.0, abs(q.objective)):
        return Verdict("recourse", assignment=q, cover=cover)
    return Verdict("feasible", assignment=q, cover=cover)


@dataclass
class PhiOptions:
    bound: str = "lp"                  # "lp" or "combinatorial"
    trace_path: Optional[str] = None
    node_limit: int = 10_000_000


@dataclass
class SubproblemResult:
    z_star: TornadoScenario
    phi: float
    assignment: RecoveryAssignment
    cuts_added: dict[str, int]
    node_count: int
    wall_time: float
    bridge_calls: int = 0
    separation_time: float = 0.0
    mode: str = "DEC"
    warnings: list[str] = field(default_factory=list)
    pool: Optional[CutPool] = None

    def to_dict(self) -> dict:
        w = self.z_star.witness
        return {
            "mode": self.mode,
            "phi": self.phi,
            "z": list(self.z_star.z),
            "witness": w.to_list() if w is not None else None,
            "recovery_plans": list(self.assignment.plans),
            "recovery_spend_cents": self.assignment.spend,
            "cuts_added": dict(self.cuts_added),
            "node_count": self.node_count,
            "bridge_calls": self.bridge_calls,
            "warnings": list(self.warnings),
        }


@dataclass(order=True)
class _Node:
    key: tuple
    lo: np.ndarray = field(compare=False)
    hi: np.ndarray = field(compare=False)
    local: tuple = field(compare=False, default=())
    depth: int = field(compare=False, default=0)
    nid: int = field(compare=False, default=0)


class _Tracer:
    def __init__(self, path: Optional[str]):
        self.fh = open(path, "w") if path else None

    def __call__(self, **rec):
        if self.fh:
            self.fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def close(self):
        if self.fh:
            self.fh.close()


def solve_phi(plan: RetrofitPlan, inst: Instance, mode: Mode | str = Mode.DEC,
              options: Optional[PhiOptions] = None, conflicts: Optional[CutPool] = None) -> SubproblemResult:
    """Exact worst-case recovery dislocation for ``plan``.

    ``conflicts`` may carry conflict sets found under another plan; they stay
    valid because coverability does not depend on the plan.
    """
    opts = options or PhiOptions()
    mode = Mode(mode)
    t0 = time.perf_counter()
    L = inst.n_locations
    pool = init_cut_pool(plan, inst, mode, conflicts)
    n_pair, n_triple = pool.count("pair"), pool.count("triple")
    if conflicts is not None:
        n_pair -= conflicts.count("pair")
        n_triple -= conflicts.count("triple")
    lazy_c = lazy_r = 0
    sep_time = 0.0
    oracle = CoverageOracle(inst)
    bridge = CoverageOracle(inst, cache=False)
    tracer = _Tracer(opts.trace_path)

    strat = np.asarray(plan.strategies)
    gmax = inst.g[np.arange(L), strat, :].max(axis=1) if L else np.zeros(0)
    eta_cap = float(gmax.sum()) + 1.0

    best_val = 0.0
    best_z = (0,) * L
    best_q = solve_q(best_z, plan, inst)
    best_cover: Optional[CoverResult] = None

    def node_lp(lo, hi, local):
        rows, rhs = [], []
        for a in pool.coeffs:
            rows.append(np.concatenate([[1.0], -a]))
            rhs.append(0.0)
        for c in itertools.chain(pool.conflicts, local):
            r = np.zeros(L + 1)
            r[1 + np.array(c)] = 1.0
            rows.append(r)
            rhs.append(len(c) - 1.0)
        c = np.zeros(L + 1)
        c[0] = 1.0
        lb = np.concatenate([[0.0], lo])
        ub = np.concatenate([[eta_cap], hi])
        return solve_lp(c, np.array(rows), np.array(rhs), lb=lb, ub=ub, maximize=True)

    def comb_bound(lo, hi, local):
        fixed_one = {i for i in range(L) if lo[i] > 0.5}
        for c in itertools.chain(pool.conflicts, local):
            if fixed_one.issuperset(c):
                return None
        return float(gmax[hi > 0.5].sum())

    counter = itertools.count()
    root = _Node((-math.inf, 0, 0), np.zeros(L), np.ones(L), (), 0, next(counter))
    heap = [root]
    nodes = 0
    try:
        while heap:
            node = heapq.heappop(heap)
            if -node.key[0] <= best_val + 1e-9:
                tracer(node=node.nid, bound=-node.key[0], action="prune")
                continue
            nodes += 1
            if nodes > opts.node_limit:
                raise RuntimeError("subproblem node limit reached")
            local = node.local
            while True:
                if opts.bound == "lp":
                    lp = node_lp(node.lo, node.hi, local)
                    if lp.status != "optimal":
                        if lp.status == "iteration_limit":
                            raise RuntimeError("simplex iteration limit reached in the subproblem")
                        tracer(node=node.nid, bound=None, action="infeasible")
                        bound, zf = None, None
                        break
                    bound, eta, zf = lp.objective, lp.x[0], lp.x[1:]
                else:
                    bound = comb_bound(node.lo, node.hi, local)
                    if bound is None:
                        tracer(node=node.nid, bound=None, action="infeasible")
                        break
                    free = np.nonzero(node.lo != node.hi)[0]
                    if len(free):
                        zf = np.where(node.lo == node.hi, node.lo, 0.5)
                    else:
                        zf = node.lo.copy()
                        eta = min(float(np.dot(a, zf)) for a in pool.coeffs)
                        bound = eta
                if bound <= best_val + 1e-9:
                    tracer(node=node.nid, bound=bound, action="prune")
                    bound = None
                    break
                frac = np.abs(zf - np.round(zf))
                if frac.max(initial=0.0) > INT_TOL:
                    break
                z = tuple(int(v) for v in np.round(zf))
                active = tuple(i for i, v in enumerate(z) if v)
                ts = time.perf_counter()
                if mode is Mode.DEC:
                    verdict = separate(eta, z, plan, inst, pool, oracle)
                else:
                    # coverability of the candidate is decided by the nonlinear bridge
                    cover = bridge(active)
                    if cover.feasible:
                        verdict = separate(eta, z, plan, inst, pool, lambda _a, _c=cover: _c)
                    else:
                        verdict = Verdict("conflict", conflict=active, cover=cover)
                sep_time += time.perf_counter() - ts
                if verdict.kind == "conflict":
                    if mode is Mode.DEC:
                        pool.add_conflict(verdict.conflict, "lazy")
                        lazy_c += 1
                    else:
                        local = local + (verdict.conflict,)
                    tracer(node=node.nid, bound=bound, action="cut", cut="C", set=list(verdict.conflict))
                    continue
                if verdict.kind == "recourse":
                    q = verdict.assignment
                    pool.add_recourse(q.plans, recourse_coeffs(inst, plan, q.plans))
                    lazy_r += 1
                    tracer(node=node.nid, bound=bound, action="cut", cut="R")
                    # the candidate itself is now a feasible incumbent
                    if q.objective > best_val:
                        best_val, best_z, best_q, best_cover = q.objective, z, q, verdict.cover
                    continue
                q = verdict.assignment
                if q.objective > best_val:
                    best_val, best_z, best_q, best_cover = q.objective, z, q, verdict.cover
                tracer(node=node.nid, bound=bound, action="incumbent", value=q.objective)
                bound = None
                break
            if bound is None:
                continue
            # branch on the most fractional coverage variable, lowest index on ties
            score = np.where(frac > INT_TOL, np.abs(frac - 0.5), np.inf)
            j = int(np.argmin(score))
            tracer(node=node.nid, bound=bound, action="branch", var=j)
            for val in (1.0, 0.0):
                lo, hi = node.lo.copy(), node.hi.copy()
                lo[j] = hi[j] = val
                heapq.heappush(heap, _Node((-bound, -(node.depth + 1), next(counter)), lo, hi, local,
                                           node.depth + 1, next(counter)))
    finally:
        tracer.close()

    if not any(best_z):
        scenario = TornadoScenario.empty(inst)
    else:
        scenario = TornadoScenario(best_z, best_cover.witness)
    warnings = oracle.warnings + bridge.warnings
    for w in warnings:
        logger.warning(w)
    return SubproblemResult(
        z_star=scenario,
        phi=best_q.objective,
        assignment=best_q,
        cuts_added={"pair": n_pair, "triple": n_triple, "lazy_C": lazy_c, "lazy_R": lazy_r},
        node_count=nodes,
        wall_time=time.perf_counter() - t0,
        bridge_calls=bridge.calls,
        separation_time=sep_time,
        mode=mode.value,
        warnings=warnings,
        pool=pool,
    )


def brute_force_phi(plan: RetrofitPlan, inst: Instance) -> tuple[float, tuple[int, ...]]:
    """Enumerate every coverage vector; for tests and tiny instances."""
    L = inst.n_locations
    oracle = CoverageOracle(inst)
    best, best_z = 0.0, (0,) * L
    for z in itertools.product((0, 1), repeat=L):
        active = tuple(i for i, v in enumerate(z) if v)
        if not active or not oracle(active).feasible:
            continue
        q = solve_q(z, plan, inst).objective
        if q > best:
            best, best_z = q, z
    return best, best_z
