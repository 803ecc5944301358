"""Two-stage robust retrofit and recovery planning against tornado paths."""

from .ccg import CCGOptions, SolveReport, build_master, solve
from .dbc import CutPool, Mode, PhiOptions, SubproblemResult, init_cut_pool, separate, solve_phi
from .geometry import (Disk, Line, Rect, Segment, infeasible_pairs, infeasible_triples,
                       segment_cover_feasible, shortest_covering_segment_on_line, stabbing_line)
from .model import BudgetError, Instance, InvalidInstanceError, RetrofitPlan, TornadoScenario
from .second_stage import RecoveryAssignment, solve_q

__version__ = "0.1.0"

__all__ = [
    "BudgetError", "CCGOptions", "CutPool", "Disk", "Instance", "InvalidInstanceError", "Line", "Mode",
    "PhiOptions", "RecoveryAssignment", "Rect", "RetrofitPlan", "Segment", "SolveReport",
    "SubproblemResult", "TornadoScenario", "build_master", "infeasible_pairs", "infeasible_triples",
    "init_cut_pool", "segment_cover_feasible", "separate", "shortest_covering_segment_on_line",
    "solve", "solve_phi", "solve_q", "stabbing_line",
]
