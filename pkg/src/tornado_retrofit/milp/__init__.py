"""Neutral MILP model, embedded branch and bound, LP files and a solver bridge."""

from .bnb import MilpResult, NeedsExternalSolver, SolveOptions, solve_embedded
from .bridge import SolverBridgeError, solve_external
from .lpformat import (
    LPParseError, Solution, dumps_lp, dumps_solution, export_lp, import_solution, loads_lp, loads_solution,
    read_lp, write_solution,
)
from .model import MilpModel, ModelError
from .simplex import LPResult, solve_lp

__all__ = [
    "LPParseError", "LPResult", "MilpModel", "MilpResult", "ModelError", "NeedsExternalSolver",
    "Solution", "SolveOptions", "SolverBridgeError", "dumps_lp", "dumps_solution", "export_lp",
    "import_solution", "loads_lp", "loads_solution", "read_lp", "solve_embedded", "solve_external", "solve_lp",
    "write_solution",
]
