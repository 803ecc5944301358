"""Command-line entry point.

Exit codes: 0 success, 2 bad configuration, 3 infeasible or invalid input,
4 external solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import bench, ccg, model, params
from .dbc import Mode, PhiOptions, solve_phi
from .export import plan_geojson, write_geojson
from .geometry import Rect, infeasible_pairs, infeasible_triples, segment_cover_feasible, stabbing_line
from .milp import NeedsExternalSolver, SolverBridgeError
from .milp.bridge import solver_command
from .model import BudgetError, InvalidInstanceError, RetrofitPlan, usd_to_cents

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 2, 3, 4

log = logging.getLogger("tornado_retrofit")


class ConfigError(Exception):
    pass


def _length(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a length: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("length must be non-negative")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tornado-retrofit",
                                description="Robust retrofit and recovery planning against tornado paths.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, instance=True):
        if instance:
            sp.add_argument("--instance", required=True, help="instance JSON")
        sp.add_argument("--delta", type=_positive, help="half-width of the tornado (miles)")
        sp.add_argument("--length", type=_length, help="maximum path length in miles, or 'inf'")
        sp.add_argument("--budget", type=float, action="append", help="budget in USD (repeatable for sweep)")
        sp.add_argument("--mode", choices=[m.value for m in Mode], default="DEC")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--solver-cmd", help="external MILP solver template with {in} and {out}; "
                                              "falls back to $SOLVER_CMD")

    common(sub.add_parser("solve", help="robust-optimal plan"))
    sp = sub.add_parser("subproblem", help="worst-case tornado for a given plan")
    common(sp)
    sp.add_argument("--strategies", help="comma-separated strategy index per location (default: do-nothing)")
    sp.add_argument("--trace", help="JSONL node trace path")
    sp = sub.add_parser("simulate", help="random tornadoes against a plan")
    common(sp)
    sp.add_argument("--strategies", help="plan to simulate (default: solve for the robust plan)")
    sp.add_argument("-n", "--replications", type=int, default=100)
    sp.add_argument("--length-law", choices=["fixed", "uniform"], default="fixed")
    sp.add_argument("--random-fractions", help="comma-separated retrofit fractions for random baselines")
    sp.add_argument("--policy-replications", type=int, default=10)
    common(sub.add_parser("sweep", help="robust value over several budgets"))
    sp = sub.add_parser("gen", help="instance from blocks CSV and fragility JSON")
    common(sp, instance=False)
    sp.add_argument("--blocks", required=True, help="CSV with id,x,y,population,area")
    sp.add_argument("--fragility", help="fragility JSON (default: bundled illustrative config)")
    sp.add_argument("-k", "--clusters", type=int, required=True)
    sp = sub.add_parser("geomcheck", help="can one tornado cover all the given points?")
    common(sp, instance=False)
    sp.add_argument("--points", required=True, help="'x,y;x,y;...' or a CSV file with x,y columns")
    sp.add_argument("--rect", help="xmin,xmax,ymin,ymax")
    return p


def _load_instance(args) -> model.Instance:
    path = Path(args.instance)
    if not path.is_file():
        raise ConfigError(f"instance file not found: {path}")
    try:
        inst = model.load(path)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    changes = {}
    if args.delta is not None:
        changes["delta"] = args.delta
    if args.length is not None:
        changes["length"] = args.length
    if args.budget and args.command != "sweep":
        if len(args.budget) != 1:
            raise ConfigError(f"{args.command} takes a single --budget")
        changes["budget"] = usd_to_cents(args.budget[0])
    if changes:
        inst = inst.replace(**changes)
    return model.ensure_valid(inst)


def _strategies(inst: model.Instance, text: Optional[str]) -> RetrofitPlan:
    if not text:
        return RetrofitPlan.do_nothing(inst)
    try:
        values = [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError("--strategies must be comma-separated integers") from None
    try:
        return RetrofitPlan.build(inst, values)
    except BudgetError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _ccg_options(args) -> ccg.CCGOptions:
    return ccg.CCGOptions(mode=args.mode, solver_cmd=solver_command(args.solver_cmd))


def cmd_solve(args) -> int:
    inst = _load_instance(args)
    report = ccg.solve(inst, _ccg_options(args))
    out = _out(args)
    ccg.write_report_json(report, out / "report.json", inst)
    ccg.write_trace_csv(report, out / "trace.csv")
    write_geojson(plan_geojson(inst, report.plan, report.worst_case.z_star), out / "plan.geojson")
    (out / "timings.json").write_text(json.dumps(report.timings, indent=1, sort_keys=True) + "\n")
    print(f"v = {report.value:.6f} persons after {report.iterations} iterations")
    print("strategies: " + ",".join(str(s) for s in report.plan.strategies))
    return EXIT_OK


def cmd_subproblem(args) -> int:
    inst = _load_instance(args)
    plan = _strategies(inst, args.strategies)
    res = solve_phi(plan, inst, args.mode, PhiOptions(trace_path=args.trace))
    out = _out(args)
    doc = res.to_dict() | {"strategies": list(plan.strategies),
                           "worst_case": plan.pre_dislocation(inst) + res.phi}
    (out / "subproblem.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"phi = {res.phi:.6f} persons, z = {''.join(map(str, res.z_star.z))}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    inst = _load_instance(args)
    if args.strategies:
        plan, label = _strategies(inst, args.strategies), "given"
    else:
        plan, label = ccg.solve(inst, _ccg_options(args)).plan, "robust"
    if args.replications < 1:
        raise ConfigError("--replications must be at least 1")
    summ = bench.simulate_random_tornadoes(plan, inst, args.replications, args.seed, args.length_law)
    rows = [{"policy": label, **bench.summary_row(summ)}]
    out = _out(args)
    bench.write_summary_csv(rows, out / "simulation.csv")
    if args.random_fractions:
        fracs = [float(v) for v in args.random_fractions.split(",")]
        worst = bench.evaluate_worst_case(plan, inst, args.mode)
        prow = [{"policy": label, "average": worst, "maximum": worst, "minimum": worst, "std": 0.0,
                 "replications": 1, "seed": args.seed}]
        prow += bench.policy_rows(inst, fracs, args.policy_replications, args.seed, args.mode)
        bench.write_summary_csv(prow, out / "policies.csv")
    print(f"average {summ.average:.6f}, max {summ.maximum:.6f}, min {summ.minimum:.6f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    inst = _load_instance(args)
    if not args.budget:
        raise ConfigError("sweep needs at least one --budget")
    budgets = sorted(usd_to_cents(b) for b in args.budget)
    points = bench.budget_sweep(inst, budgets, _ccg_options(args))
    bench.write_sweep_csv(points, _out(args) / "sweep.csv")
    for p in points:
        print(f"{p.budget / 100:.2f}\t{p.value:.6f}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if not Path(args.blocks).is_file():
        raise ConfigError(f"blocks file not found: {args.blocks}")
    cfg = params.load_config(args.fragility) if args.fragility else params.example_config()
    blocks = params.read_blocks_csv(args.blocks)
    try:
        locs = params.cluster_blocks(blocks, args.clusters, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    delta = args.delta if args.delta is not None else 0.375
    length = args.length if args.length is not None else math.inf
    budget = args.budget[0] if args.budget else 0.0
    inst = params.build_instance(locs, cfg, budget, delta, length)
    model.ensure_valid(inst)
    model.save(inst, _out(args) / "instance.json")
    print(f"wrote {len(locs)} locations to {Path(args.out) / 'instance.json'}")
    return EXIT_OK


def _points(text: str) -> np.ndarray:
    path = Path(text)
    try:
        if path.is_file():
            rows = []
            with open(path, newline="") as fh:
                for k, row in enumerate(csv.reader(fh)):
                    if k == 0 and row and not _is_number(row[0]):
                        continue   # header
                    if row:
                        rows.append([float(row[0]), float(row[1])])
            return np.array(rows, dtype=float).reshape(-1, 2)
        return np.array([[float(v) for v in pt.split(",")] for pt in text.split(";") if pt.strip()]).reshape(-1, 2)
    except (ValueError, IndexError):
        raise ConfigError(f"cannot read points from {text!r}") from None


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def cmd_geomcheck(args) -> int:
    pts = _points(args.points)
    if args.delta is None:
        raise ConfigError("geomcheck needs --delta")
    length = args.length if args.length is not None else math.inf
    rect = None
    if args.rect:
        try:
            rect = Rect(*[float(v) for v in args.rect.split(",")])
        except (TypeError, ValueError):
            raise ConfigError("--rect must be xmin,xmax,ymin,ymax") from None
    res = segment_cover_feasible(pts, args.delta, length, rect, seed=args.seed)
    stab = stabbing_line(pts, args.delta) if len(pts) else None
    doc = {
        "verdict": "feasible" if res.feasible else "infeasible",
        "status": res.status,
        "stage": res.stage,
        "witness": res.witness.to_list() if res.feasible and res.witness is not None else None,
        "infeasible_pairs": sorted(list(p) for p in infeasible_pairs(pts, args.delta, length)),
        "infeasible_triples": sorted(list(t) for t in infeasible_triples(pts, args.delta)),
        "stabbing_count": stab.count if stab else 0,
    }
    print(doc["verdict"])
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "subproblem": cmd_subproblem, "simulate": cmd_simulate,
            "sweep": cmd_sweep, "gen": cmd_gen, "geomcheck": cmd_geomcheck}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidInstanceError, BudgetError, ccg.MasterInfeasibleError) as exc:
        print(f"infeasible input: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SolverBridgeError, NeedsExternalSolver) as exc:
        print(f"solver bridge failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
