"""Parking-permit counterfactuals and a synthetic population generator.

In both counterfactuals a user type's ``benefit`` is read as the permit fee
and its ``payoff`` as the permit earnings when every such user buys.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .calibration import calibrate_exponential, discretize_exponential
from .heterogeneous import greedy_payoff_het
from .model import Instance, Location, Strategy, UserType, payoff

SYNTHETIC_LOCATIONS = 448
MEAN_COUNT = 80.0
MEAN_BENEFIT = 20.0


def synthetic_ipt(
    seed: int,
    n_locations: int = SYNTHETIC_LOCATIONS,
    fine: float = 100.0,
    budget: float = 10.0,
    payoff_exponent: float = 1.0,
    deter_prob: float = 1.0,
) -> Instance:
    """One-type locations with exponential counts and benefits (means 80 and 20)."""
    rng = np.random.default_rng(seed)
    counts = rng.exponential(MEAN_COUNT, n_locations)
    benefits = rng.exponential(MEAN_BENEFIT, n_locations)
    benefits = np.maximum(benefits, 1e-6)
    locations = tuple(
        Location(i, (UserType(float(c), float(d), float(c * d**payoff_exponent)),))
        for i, (c, d) in enumerate(zip(counts, benefits))
    )
    return Instance(fine, deter_prob, budget, locations)


def uniform_strategy(instance: Instance) -> Strategy:
    share = min(1.0, instance.budget / len(instance.locations))
    return Strategy({loc_id: share for loc_id in instance.ids})


def strategic_instance(instance: Instance) -> Instance:
    """All users strategic: buy iff sigma >= fee / fine."""
    return replace(instance, deter_prob=0.0)


@dataclass(frozen=True)
class ThresholdRow:
    strategic_frac: float
    greedy: float
    uniform: float
    no_enforcement: float
    total: float


def threshold_earnings(instance: Instance, strategy: Strategy, frac: float) -> float:
    """Non-strategic users always pay; strategic ones only when deterred."""
    strategic = strategic_instance(instance)
    total = sum(loc.total_payoff for loc in instance.locations)
    return (1.0 - frac) * total + frac * payoff(strategic, strategy)


def counterfactual_threshold(
    instance: Instance, fractions: Sequence[float]
) -> tuple[Strategy, list[ThresholdRow]]:
    # scaling every strategic type by the same fraction leaves the greedy's choice unchanged,
    # so one run on the all-strategic instance serves every fraction
    strategic = strategic_instance(instance)
    chosen = greedy_payoff_het(strategic).strategy
    uniform = uniform_strategy(instance)
    idle = Strategy.zero(instance)
    total = sum(loc.total_payoff for loc in instance.locations)
    rows = [
        ThresholdRow(
            f,
            threshold_earnings(instance, chosen, f),
            threshold_earnings(instance, uniform, f),
            threshold_earnings(instance, idle, f),
            total,
        )
        for f in fractions
    ]
    return chosen, rows


@dataclass(frozen=True)
class ExponentialRow:
    citation_multiplier: float
    greedy_exponential: float
    status_quo: float
    uniform: float
    greedy_threshold: float
    total: float


def exponential_instance(
    instance: Instance,
    status_quo: dict,
    citation_fracs: dict,
    multiplier: float,
    step: float = 0.01,
) -> Instance:
    """Replace each (location, permit type) by its discretised exponential population.

    Products multiplier * citation fraction above one are clipped to one.
    """
    locations = []
    for loc in instance.locations:
        fracs = citation_fracs[loc.id]
        types: list[UserType] = []
        for user, c in zip(loc.types, fracs):
            gamma = calibrate_exponential(status_quo[loc.id], min(1.0, multiplier * c))
            fee = user.payoff / user.count if user.count > 0 else 0.0
            types.extend(
                discretize_exponential(gamma, user.count, fee, step, fine=instance.fine, deter_prob=0.0)
            )
        locations.append(Location(loc.id, tuple(types)))
    return Instance(instance.fine, 0.0, instance.budget, tuple(locations))


def counterfactual_exponential(
    instance: Instance,
    status_quo: dict,
    citation_fracs: dict,
    multipliers: Sequence[float],
) -> list[ExponentialRow]:
    sq = Strategy({loc_id: float(status_quo[loc_id]) for loc_id in instance.ids})
    uniform = uniform_strategy(instance)
    c1 = greedy_payoff_het(strategic_instance(instance)).strategy
    rows = []
    for mu in multipliers:
        model = exponential_instance(instance, status_quo, citation_fracs, mu)
        c2 = greedy_payoff_het(model).strategy
        total = sum(loc.total_payoff for loc in model.locations)
        rows.append(
            ExponentialRow(mu, payoff(model, c2), payoff(model, sq), payoff(model, uniform), payoff(model, c1), total)
        )
    return rows


def synthetic_status_quo(instance: Instance, seed: int) -> tuple[dict, dict]:
    """Status-quo patrol probabilities summing to the budget, and citation fractions."""
    rng = np.random.default_rng(seed + 1)
    weights = rng.dirichlet(np.ones(len(instance.locations)))
    sigma = np.minimum(1.0, weights * instance.budget)
    status_quo = {loc_id: float(s) for loc_id, s in zip(instance.ids, sigma)}
    fracs = {loc.id: [float(rng.uniform(0.05, 0.5)) for _ in loc.types] for loc in instance.locations}
    return status_quo, fracs
