"""Process-based bridge to an external MILP solver.

The solver is any command that reads an LP file and writes a solution file
of ``name value`` lines. The command template holds ``{in}`` and ``{out}``
placeholders, for example::

    SOLVER_CMD='gurobi_cl ResultFile={out} {in}'

Running this module as a script gives a reference solver backed by the
embedded branch and bound, handy for testing the bridge end to end::

    python3 -m tornado_retrofit.milp.bridge model.lp model.sol
"""

from __future__ import annotations

import math
import os
import shlex
import subprocess
import sys
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from .bnb import MilpResult, SolveOptions, solve_embedded
from .lpformat import LPParseError, export_lp, import_solution, read_lp, write_solution
from .model import MilpModel

ENV_VAR = "SOLVER_CMD"


class SolverBridgeError(RuntimeError):
    pass


def solver_command(explicit: Optional[str] = None) -> Optional[str]:
    return explicit or os.environ.get(ENV_VAR) or None


def solve_external(model: MilpModel, command: Optional[str] = None, workdir=None,
                   timeout: Optional[float] = None) -> MilpResult:
    template = solver_command(command)
    if not template:
        raise SolverBridgeError(f"no solver command given and ${ENV_VAR} is unset")
    if "{in}" not in template or "{out}" not in template:
        raise SolverBridgeError("solver command must contain {in} and {out}")
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "model.sol"
        export_lp(model, lp_path)
        argv = [a.replace("{in}", str(lp_path)).replace("{out}", str(sol_path)) for a in shlex.split(template)]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise SolverBridgeError(f"solver command failed to run: {exc}") from exc
        if proc.returncode != 0:
            raise SolverBridgeError(f"solver exited with code {proc.returncode}: {proc.stderr.strip()[:500]}")
        if not sol_path.exists():
            return MilpResult("infeasible", None, math.nan)
        try:
            sol = import_solution(sol_path)
        except LPParseError as exc:
            raise SolverBridgeError(f"unreadable solution file: {exc}") from exc
    x = np.zeros(model.n_vars)
    for name, value in sol.values.items():
        try:
            x[model.index(name)] = value
        except KeyError:
            raise SolverBridgeError(f"solution names unknown variable {name!r}") from None
    mask = model.integer_mask
    x[mask] = np.round(x[mask])
    objective = model.evaluate(x)
    return MilpResult("optimal", x, objective)


def main(argv=None) -> int:
    args = sys.argv[1:] if argv is None else argv
    if len(args) != 2:
        print("usage: python3 -m tornado_retrofit.milp.bridge IN.lp OUT.sol", file=sys.stderr)
        return 2
    model = read_lp(args[0])
    res = solve_embedded(model, SolveOptions())
    if res.status == "optimal":
        write_solution(model, res.x, res.objective, args[1])
    return 0


if __name__ == "__main__":
    sys.exit(main())
