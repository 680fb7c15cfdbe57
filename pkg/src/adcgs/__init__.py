"""Adaptive conditional gradient sliding: projection-free accelerated solvers
with adaptive stepsizes, comparison baselines, and a benchmark harness."""

from .core import (
    ContractViolation,
    LineSearchFailure,
    NumericalAbort,
    OracleCounters,
    TRACE_COLUMNS,
    TraceRecord,
    UnsupportedOperation,
)
from .feasible_sets import FeasibleSet, KSparsePolytope, L2Ball, Simplex, set_from_config
from .inner_cg import InnerResult, SubproblemSpec, inner_iteration_cap, solve_subproblem
from .objectives import LeastSquares, Logistic, LpLoss, Objective
from .solver import (
    BETA_MAX,
    RestartConfig,
    RestartResult,
    RunResult,
    ScheduleConfig,
    run,
    run_restarted,
)

__all__ = [
    "BETA_MAX",
    "ContractViolation",
    "FeasibleSet",
    "InnerResult",
    "KSparsePolytope",
    "L2Ball",
    "LeastSquares",
    "LineSearchFailure",
    "Logistic",
    "LpLoss",
    "NumericalAbort",
    "Objective",
    "OracleCounters",
    "RestartConfig",
    "RestartResult",
    "RunResult",
    "ScheduleConfig",
    "Simplex",
    "SubproblemSpec",
    "TRACE_COLUMNS",
    "TraceRecord",
    "UnsupportedOperation",
    "inner_iteration_cap",
    "run",
    "run_restarted",
    "set_from_config",
    "solve_subproblem",
]

__version__ = "0.1.0"
