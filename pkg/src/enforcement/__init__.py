"""Patrol allocation for parking enforcement: model, solvers, oracles and CLI."""

from .constrained import Hierarchy, QuotaSet, constrained_greedy, relax_quotas, validate_hierarchy
from .contracts import ContractOutcome, contract_greedy, dense_sample, dense_sample_oracle
from .errors import (
    CalibrationError,
    EnforcementError,
    HierarchyError,
    InfeasibleError,
    ModeError,
    ParameterError,
    SizeError,
    StructuralError,
)
from .heterogeneous import greedy_payoff_het, greedy_revenue_het
from .homogeneous import greedy_payoff, greedy_payoff_naive, greedy_revenue, ptas_payoff
from .mcua import build_mcua, eval_mcua, location_mcua, location_value_function
from .model import (
    PAYOFF,
    REVENUE,
    Contract,
    Instance,
    Location,
    ObjectiveMode,
    Strategy,
    UserType,
    best_response,
    contract_objective,
    objective,
    payoff,
    revenue,
    threshold,
)
from .oracles import grid_oracle, knapsack_lp_bound, structural_oracle
from .result import Branch, SolveResult
from .scenario import Scenario, load_scenario, parse_scenario, serialize_scenario

__all__ = [name for name in dir() if not name.startswith("_")]
