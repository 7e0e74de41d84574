"""Solvers for instances with one user type per location."""

from __future__ import annotations

import itertools

from .errors import ModeError, ParameterError
from .model import (
    PAYOFF,
    REVENUE,
    TOL,
    Instance,
    ObjectiveMode,
    Strategy,
    breakpoints,
    location_value,
    objective,
    threshold,
)
from .result import Branch, SolveResult


def _require_homogeneous(instance: Instance, alternative: str) -> None:
    if not instance.is_homogeneous:
        raise ModeError(f"instance has several user types per location; use {alternative}")


def _taus(instance: Instance) -> list[float]:
    return [threshold(loc.types[0], instance.fine, instance.deter_prob) for loc in instance.locations]


def _fill_in_order(instance: Instance, order: list[int], caps: list[float], budget: float):
    """Give each location in ``order`` min(remaining, cap)."""
    sigma = [0.0] * len(instance.locations)
    steps = []
    remaining = budget
    for i in order:
        amount = min(remaining, caps[i])
        if amount <= 0:
            continue
        sigma[i] = amount
        remaining -= amount
        steps.append((instance.locations[i].id, amount))
    return sigma, tuple(steps)


def _result(instance, sigma, mode, branch, steps=(), budget=None) -> SolveResult:
    strategy = Strategy.from_values(instance, sigma)
    return SolveResult(
        strategy=strategy,
        objective_value=objective(instance, strategy, mode),
        branch=branch,
        diagnostics=steps,
        budget=instance.budget if budget is None else budget,
    )


def greedy_revenue(instance: Instance) -> SolveResult:
    _require_homogeneous(instance, "greedy_revenue_het")
    taus = _taus(instance)
    counts = [loc.types[0].count for loc in instance.locations]
    order = sorted(range(len(counts)), key=lambda i: -counts[i])
    sigma, steps = _fill_in_order(instance, order, taus, instance.budget)
    return _result(instance, sigma, REVENUE, Branch.GREEDY, steps)


def single_location_best(instance: Instance, mode: ObjectiveMode) -> SolveResult:
    """Best objective reachable by spending at one location only.

    Between consecutive thresholds every objective is linear and increasing,
    so only the thresholds themselves and the full affordable spend matter.
    """
    cap = min(instance.budget, 1.0)
    best_value, best_index, best_spend = 0.0, 0, 0.0
    for i, loc in enumerate(instance.locations):
        spends = [b for b in breakpoints(loc, instance.fine, instance.deter_prob) if b <= cap + TOL]
        spends.append(cap)
        for spend in spends:
            spend = min(spend, cap)
            value = location_value(loc, spend, instance.fine, instance.deter_prob, mode)
            if value > best_value + TOL:
                best_value, best_index, best_spend = value, i, spend
    sigma = [0.0] * len(instance.locations)
    sigma[best_index] = best_spend
    steps = ((instance.locations[best_index].id, best_spend),) if best_spend > 0 else ()
    return _result(instance, sigma, mode, Branch.SINGLE_LOCATION, steps)


def _better(greedy: SolveResult, single: SolveResult) -> SolveResult:
    return single if single.objective_value > greedy.objective_value + TOL else greedy


def _affordable_ratios(instance: Instance) -> tuple[list[float], list[float]]:
    taus = _taus(instance)
    ratios = []
    for loc, tau in zip(instance.locations, taus):
        t = min(instance.budget, tau)
        if t <= 0:
            ratios.append(0.0)
            continue
        # p if t reaches the threshold, otherwise the partial payoff at t
        p_hat = location_value(loc, t, instance.fine, instance.deter_prob, PAYOFF)
        ratios.append(p_hat / t)
    return taus, ratios


def greedy_payoff(instance: Instance) -> SolveResult:
    _require_homogeneous(instance, "greedy_payoff_het")
    taus, ratios = _affordable_ratios(instance)
    order = sorted(range(len(taus)), key=lambda i: -ratios[i])
    sigma, steps = _fill_in_order(instance, order, taus, instance.budget)
    greedy = _result(instance, sigma, PAYOFF, Branch.GREEDY, steps)
    return _better(greedy, single_location_best(instance, PAYOFF))


def greedy_payoff_naive(instance: Instance) -> SolveResult:
    """Payoff greedy ordered by p/tau, ignoring the budget cap on each location.

    Kept only as a counterexample target: it can fall below half the optimum.
    """
    _require_homogeneous(instance, "greedy_payoff_het")
    taus = _taus(instance)
    ratios = [loc.types[0].payoff / tau for loc, tau in zip(instance.locations, taus)]
    order = sorted(range(len(taus)), key=lambda i: -ratios[i])
    sigma, steps = _fill_in_order(instance, order, taus, instance.budget)
    greedy = _result(instance, sigma, PAYOFF, Branch.GREEDY, steps)
    return _better(greedy, single_location_best(instance, PAYOFF))


def _grid(tau: float, delta: float) -> list[float]:
    points = []
    j = 0
    while j * delta < tau - TOL:
        points.append(j * delta)
        j += 1
    points.append(tau)
    return points


def ptas_payoff(instance: Instance, m: int, delta: float) -> SolveResult:
    """Brute force over small fully-covered subsets plus one gridded location,
    each completed greedily by p/tau; runs with budget R + delta."""
    _require_homogeneous(instance, "greedy_payoff_het")
    if not isinstance(m, int) or m < 1:
        raise ParameterError("m must be a positive integer")
    if not delta > 0:
        raise ParameterError("delta must be positive")
    n = len(instance.locations)
    budget = instance.budget + delta
    taus = _taus(instance)
    bang = [loc.types[0].payoff / tau for loc, tau in zip(instance.locations, taus)]
    greedy_order = sorted(range(n), key=lambda i: -bang[i])
    grids = [_grid(tau, delta) for tau in taus]

    best_value = -1.0
    best_sigma: list[float] = [0.0] * n
    best_branch = Branch.BRUTE_FORCE_PAIR

    def consider(base: list[float], used: set[int], spent: float, branch: Branch) -> None:
        nonlocal best_value, best_sigma, best_branch
        sigma = list(base)
        remaining = budget - spent
        for i in greedy_order:
            if i in used:
                continue
            if taus[i] <= remaining + TOL:
                sigma[i] = taus[i]
                remaining -= taus[i]
        value = sum(
            location_value(loc, s, instance.fine, instance.deter_prob, PAYOFF)
            for loc, s in zip(instance.locations, sigma)
        )
        if value > best_value + TOL:
            best_value, best_sigma, best_branch = value, sigma, branch

    consider([0.0] * n, set(), 0.0, Branch.GREEDY)
    for size in range(0, min(m, n) + 1):
        for subset in itertools.combinations(range(n), size):
            spent = sum(taus[i] for i in subset)
            if spent > budget + TOL:
                continue
            for extra in range(n):
                if extra in subset:
                    continue
                for point in grids[extra]:
                    if spent + point > budget + TOL:
                        break
                    base = [0.0] * n
                    for i in subset:
                        base[i] = taus[i]
                    base[extra] = point
                    consider(base, set(subset) | {extra}, spent + point, Branch.BRUTE_FORCE_PAIR)
    steps = tuple((instance.locations[i].id, s) for i, s in enumerate(best_sigma) if s > 0)
    return _result(instance, best_sigma, PAYOFF, best_branch, steps, budget=budget)
