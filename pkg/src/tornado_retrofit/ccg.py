"""Column-and-constraint generation for the two-stage retrofit problem.

The master keeps a pool of tornado scenarios. For each one it carries its
own copy of the recovery variables, restricted to the locations that
scenario hits (an unhit location contributes no dislocation and its
do-nothing recovery costs nothing, so its recovery choice is implied).
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dbc import CutPool, Mode, PhiOptions, SubproblemResult, solve_phi
from .milp import MilpModel, SolveOptions, solve_embedded, solve_external
from .model import Instance, RetrofitPlan, TornadoScenario, ensure_valid
from .second_stage import solve_q

logger = logging.getLogger(__name__)

EPS = 1e-6


class MasterInfeasibleError(RuntimeError):
    pass


def build_master(scenarios: Sequence[TornadoScenario], inst: Instance) -> MilpModel:
    """One-level master over the pooled scenarios."""
    if not scenarios:
        raise ValueError("the scenario pool is empty")
    L, S, P = inst.n_locations, inst.n_strategies, inst.n_plans
    m = MilpModel(name="master")
    f = {(l, s): m.add_var(f"f_{l}_{s}", "binary") for l in range(L) for s in range(S)}
    theta = m.add_var("theta", "continuous", 0.0, math.inf)
    for l in range(L):
        m.add_constr({f[l, s]: 1.0 for s in range(S)}, "=", 1.0, f"assign_{l}")
    first_stage = {f[l, s]: float(inst.d[l, s]) for l in range(L) for s in range(S) if inst.d[l, s]}
    m.add_constr(first_stage, "<=", float(inst.budget), "budget_first")
    for i, sc in enumerate(scenarios):
        hit = sc.active
        r = {}
        for l in hit:
            for s in range(S):
                for p in range(P):
                    r[l, s, p] = m.add_var(f"r{i}_{l}_{s}_{p}", "binary")
        # theta bounds this scenario's recovery dislocation
        terms = {theta: 1.0}
        for key, j in r.items():
            terms[j] = -float(inst.g[key])
        m.add_constr(terms, ">=", 0.0, f"worst_{i}")
        budget = dict(first_stage)
        for key, j in r.items():
            if inst.c[key]:
                budget[j] = float(inst.c[key])
        m.add_constr(budget, "<=", float(inst.budget), f"budget_{i}")
        for l in hit:
            for s in range(S):
                terms = {r[l, s, p]: 1.0 for p in range(P)}
                terms[f[l, s]] = -1.0
                m.add_constr(terms, "=", 0.0, f"link{i}_{l}_{s}")
    obj = {f[l, s]: float(inst.w[l, s]) for l in range(L) for s in range(S) if inst.w[l, s]}
    obj[theta] = 1.0
    m.set_objective(obj, maximize=False)
    return m


def plan_from_master(model: MilpModel, x, inst: Instance) -> RetrofitPlan:
    strategies = []
    for l in range(inst.n_locations):
        vals = [x[model.index(f"f_{l}_{s}")] for s in range(inst.n_strategies)]
        strategies.append(int(np.argmax(vals)))
    return RetrofitPlan(tuple(strategies))


@dataclass
class CCGOptions:
    mode: Mode | str = Mode.DEC
    eps: float = EPS
    max_iterations: int = 1000
    seed_scenarios: Sequence[TornadoScenario] = ()
    solver_cmd: Optional[str] = None
    milp: SolveOptions = field(default_factory=SolveOptions)
    phi: PhiOptions = field(default_factory=PhiOptions)
    reuse_conflicts: bool = True


@dataclass
class IterationRecord:
    iteration: int
    lower_bound: float
    upper_bound: float
    master_time: float
    subproblem_time: float
    separation_time: float
    scenario: tuple[int, ...]
    nodes: int = 0
    bridge_calls: int = 0


@dataclass
class SolveReport:
    plan: RetrofitPlan
    value: float
    lower_bound: float
    scenarios: list[TornadoScenario]
    assignments: list[dict]
    worst_case: SubproblemResult
    trace: list[IterationRecord]
    timings: dict[str, float]
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def subproblem_nodes(self) -> int:
        return sum(rec.nodes for rec in self.trace)

    def to_dict(self, inst: Optional[Instance] = None) -> dict:
        """JSON-ready summary. Wall-clock timings are left out so that equal
        inputs give byte-identical files; see :attr:`timings`."""
        out = {
            "value": self.value,
            "lower_bound": self.lower_bound,
            "converged": self.converged,
            "iterations": self.iterations,
            "strategies": list(self.plan.strategies),
            "worst_case": self.worst_case.to_dict(),
            "scenarios": [
                {"z": list(sc.z), "witness": sc.witness.to_list() if sc.witness is not None else None, **a}
                for sc, a in zip(self.scenarios, self.assignments)
            ],
            "bounds": [{"iteration": r.iteration, "lower_bound": r.lower_bound, "upper_bound": r.upper_bound}
                       for r in self.trace],
        }
        if inst is not None:
            out["strategy_names"] = [inst.strategy_names[s] for s in self.plan.strategies]
            out["retrofit_cost_cents"] = self.plan.cost(inst)
            out["pre_dislocation"] = self.plan.pre_dislocation(inst)
        return out


def _solve_master(model: MilpModel, opts: CCGOptions):
    if opts.solver_cmd:
        return solve_external(model, opts.solver_cmd)
    return solve_embedded(model, opts.milp)


def solve(inst: Instance, options: Optional[CCGOptions] = None) -> SolveReport:
    """Robust-optimal retrofit plan and its worst-case dislocation."""
    opts = options or CCGOptions()
    ensure_valid(inst)
    mode = Mode(opts.mode)
    pool: list[TornadoScenario] = [TornadoScenario.empty(inst)]
    seen = {pool[0].z}
    for sc in opts.seed_scenarios:
        if sc.z not in seen:
            seen.add(sc.z)
            pool.append(sc)

    lb, ub = -math.inf, math.inf
    best_plan: Optional[RetrofitPlan] = None
    best_sub: Optional[SubproblemResult] = None
    conflicts: Optional[CutPool] = None
    trace: list[IterationRecord] = []
    t_master = t_sub = t_sep = 0.0
    converged = False

    for k in range(1, opts.max_iterations + 1):
        t0 = time.perf_counter()
        master = build_master(pool, inst)
        res = _solve_master(master, opts)
        dt_master = time.perf_counter() - t0
        if res.status != "optimal":
            raise MasterInfeasibleError(f"master problem is {res.status}")
        lb = max(lb, res.objective)
        plan = plan_from_master(master, res.x, inst)

        t0 = time.perf_counter()
        sub = solve_phi(plan, inst, mode, opts.phi, conflicts if opts.reuse_conflicts else None)
        dt_sub = time.perf_counter() - t0
        if opts.reuse_conflicts and sub.pool is not None:
            conflicts = sub.pool.conflict_pool()
        value = plan.pre_dislocation(inst) + sub.phi
        if value < ub:
            ub, best_plan, best_sub = value, plan, sub
        t_master += dt_master
        t_sub += dt_sub
        t_sep += sub.separation_time
        trace.append(IterationRecord(k, lb, ub, dt_master, dt_sub, sub.separation_time, sub.z_star.z,
                                     sub.node_count, sub.bridge_calls))
        logger.info("iteration %d: LB=%.6f UB=%.6f", k, lb, ub)
        if ub - lb <= opts.eps:
            converged = True
            break
        if sub.z_star.z in seen:
            # the master already prices this scenario, so the gap can only be numerical
            logger.warning("worst-case scenario repeated with gap %.3g; stopping", ub - lb)
            break
        seen.add(sub.z_star.z)
        pool.append(sub.z_star)

    assignments = []
    for sc in pool:
        q = solve_q(sc.z, best_plan, inst)
        assignments.append({"recovery_plans": list(q.plans), "dislocation": q.objective,
                            "recovery_spend_cents": q.spend})
    return SolveReport(
        plan=best_plan,
        value=ub,
        lower_bound=lb,
        scenarios=pool,
        assignments=assignments,
        worst_case=best_sub,
        trace=trace,
        timings={"master": t_master, "subproblem": t_sub, "separation": t_sep,
                 "total": t_master + t_sub},
        converged=converged,
    )


def write_report_json(report: SolveReport, path, inst: Optional[Instance] = None) -> None:
    Path(path).write_text(json.dumps(report.to_dict(inst), indent=2, sort_keys=True) + "\n")


def write_trace_csv(report: SolveReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "LB", "UB", "master_time", "sub_time", "separation_time"])
        for rec in report.trace:
            w.writerow([rec.iteration, repr(rec.lower_bound), repr(rec.upper_bound),
                        f"{rec.master_time:.6f}", f"{rec.subproblem_time:.6f}", f"{rec.separation_time:.6f}"])
