"""Solver output container."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .model import Instance, LocationId, Strategy


class Branch(enum.Enum):
    GREEDY = "greedy"
    SINGLE_LOCATION = "single_location"
    BRUTE_FORCE_PAIR = "brute_force_pair"
    ORACLE = "oracle"


@dataclass(frozen=True)
class SolveResult:
    strategy: Strategy
    objective_value: float
    branch: Branch
    diagnostics: tuple[tuple[LocationId, float], ...] = ()
    budget: float = 0.0
    # optimum of the concave relaxation, set by the MCUA-based solvers
    mcua_bound: float | None = None
    # a-priori error of grid-based answers
    error_bound: float | None = None


def allocation_record(instance: Instance, strategy: Strategy) -> tuple[tuple[LocationId, float], ...]:
    return tuple((loc_id, strategy.alloc[loc_id]) for loc_id in instance.ids if strategy.alloc[loc_id] > 0)
