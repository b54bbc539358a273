"""Functional DCOP solvers: C-CoCoA, CoCoA and HCMS, with oracles and a benchmark harness."""

from .baselines import CoCoA, cocoa_solve, hcms_solve
from .ccocoa import CCoCoA, SolverConfig, solve
from .engine import AgentState, RunMetrics
from .model import (
    Edge,
    IntervalDomain,
    Problem,
    QuadraticCost,
    global_cost,
    local_objective,
    parse_problem,
    serialize_problem,
)

__all__ = [
    "AgentState",
    "CCoCoA",
    "CoCoA",
    "Edge",
    "IntervalDomain",
    "Problem",
    "QuadraticCost",
    "RunMetrics",
    "SolverConfig",
    "cocoa_solve",
    "global_cost",
    "hcms_solve",
    "local_objective",
    "parse_problem",
    "serialize_problem",
    "solve",
]
