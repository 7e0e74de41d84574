"""Segment-greedy solvers for locations with several user types."""

from __future__ import annotations

from .homogeneous import single_location_best
from .mcua import Segment, eval_mcua, location_mcua
from .model import PAYOFF, REVENUE, TOL, Instance, ObjectiveMode, Strategy, max_threshold, objective
from .result import Branch, SolveResult


def instance_segments(instance: Instance, mode: ObjectiveMode, caps: list[float] | None = None):
    """Per-location MCUA segment lists on [0, t_l] with t_l = min(R, max tau)."""
    per_location = []
    for i, loc in enumerate(instance.locations):
        t = min(instance.budget, max_threshold(loc, instance.fine, instance.deter_prob))
        if caps is not None:
            t = min(t, caps[i])
        per_location.append(location_mcua(loc, instance.fine, instance.deter_prob, mode, t))
    return per_location


def slope_order(per_location: list[list[Segment]]) -> list[tuple[int, Segment]]:
    """All segments by descending slope; ties keep (location, segment) order."""
    flat = [(i, seg) for i, segs in enumerate(per_location) for seg in segs]
    return sorted(flat, key=lambda item: -item[1].slope)


def mcua_optimum(per_location: list[list[Segment]], budget: float) -> float:
    """Optimum of the concave relaxation: fill segments by slope until R runs out."""
    sigma = [0.0] * len(per_location)
    remaining = budget
    for i, seg in slope_order(per_location):
        take = min(remaining, seg.width)
        if take <= 0:
            break
        sigma[i] += take
        remaining -= take
    return sum(eval_mcua(segs, s) for segs, s in zip(per_location, sigma))


def _segment_greedy(instance: Instance, mode: ObjectiveMode, partial: bool) -> SolveResult:
    per_location = instance_segments(instance, mode)
    sigma = [0.0] * len(instance.locations)
    steps = []
    remaining = instance.budget
    for i, seg in slope_order(per_location):
        if seg.slope <= TOL:
            # plateaus add nothing to the relaxation and can lower true revenue
            continue
        if seg.width <= remaining + TOL:
            take = min(seg.width, remaining)
        elif partial:
            take = remaining
        else:
            break
        if take <= 0:
            break
        sigma[i] += take
        remaining -= take
        steps.append((instance.locations[i].id, take))
    strategy = Strategy.from_values(instance, sigma)
    bound = mcua_optimum(per_location, instance.budget)
    greedy = SolveResult(
        strategy, objective(instance, strategy, mode), Branch.GREEDY, tuple(steps), instance.budget, bound
    )
    single = single_location_best(instance, mode)
    if single.objective_value > greedy.objective_value + TOL:
        return SolveResult(
            single.strategy, single.objective_value, single.branch, single.diagnostics, instance.budget, bound
        )
    return greedy


def greedy_revenue_het(instance: Instance) -> SolveResult:
    """Stops at the first segment wider than the remaining budget."""
    return _segment_greedy(instance, REVENUE, partial=False)


def greedy_payoff_het(instance: Instance) -> SolveResult:
    """Fills the first unaffordable segment partially and keeps going."""
    return _segment_greedy(instance, PAYOFF, partial=True)
