"""Contract game: the principal pays the administrator a share alpha of payoff."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ModeError, ParameterError
from .homogeneous import _taus, single_location_best
from .model import TOL, Contract, Instance, Strategy, contract_objective, payoff, revenue
from .oracles import MAX_LOCATIONS, contract_oracle_sweep
from .result import SolveResult


@dataclass(frozen=True)
class ContractOutcome:
    alpha: float
    strategy: Strategy
    admin_objective: float
    revenue: float
    payoff: float
    principal_objective: float


def outcome(instance: Instance, strategy: Strategy, alpha: float) -> ContractOutcome:
    tie = Contract(alpha)
    pay = payoff(instance, strategy, tie)
    return ContractOutcome(
        alpha=alpha,
        strategy=strategy,
        admin_objective=contract_objective(instance, strategy, alpha),
        revenue=revenue(instance, strategy, tie),
        payoff=pay,
        principal_objective=(1.0 - alpha) * pay,
    )


def _check(instance: Instance, alpha: float) -> None:
    if not instance.is_homogeneous:
        raise ModeError("contract greedy needs one user type per location")
    if instance.deter_prob != 1.0:
        raise ModeError("the contract game is defined for deter_prob = 1 only")
    if not (0.0 <= alpha <= 1.0):
        raise ParameterError("alpha must lie in [0, 1]")


def contract_greedy(instance: Instance, alpha: float, affordable: bool = True) -> ContractOutcome:
    """Greedy on z/t with z the administrator's value of spending t = min(R, tau).

    ``affordable=False`` scores every location as if its full threshold were
    reachable; this is only useful for comparison.
    """
    _check(instance, alpha)
    k, R = instance.fine, instance.budget
    taus = _taus(instance)
    ratios = []
    for loc, tau in zip(instance.locations, taus):
        u = loc.types[0]
        t = min(R, tau) if affordable else tau
        if t <= 0:
            ratios.append(0.0)
            continue
        if t >= tau - TOL:
            z = max(alpha * u.payoff, (k * u.count + alpha * u.payoff) * tau)
        else:
            z = t * (k * u.count + alpha * u.payoff)
        ratios.append(z / t)
    order = sorted(range(len(taus)), key=lambda i: -ratios[i])
    sigma = [0.0] * len(taus)
    remaining = R
    for i in order:
        amount = min(remaining, taus[i])
        if amount <= 0:
            continue
        sigma[i] = amount
        remaining -= amount
    greedy = Strategy.from_values(instance, sigma)
    single = single_location_best(instance, Contract(alpha)).strategy
    pick = greedy
    if contract_objective(instance, single, alpha) > contract_objective(instance, greedy, alpha) + TOL:
        pick = single
    return outcome(instance, pick, alpha)


def alpha_grid(step: float) -> list[float]:
    if not step > 0 or step > 1:
        raise ParameterError("step must lie in (0, 1]")
    grid = []
    j = 0
    while j * step < 1.0 - TOL:
        grid.append(j * step)
        j += 1
    grid.append(1.0)
    return grid


def _best(sweep: list[ContractOutcome]) -> ContractOutcome:
    best = sweep[0]
    for item in sweep[1:]:
        if item.principal_objective > best.principal_objective + TOL:
            best = item
    return best


def dense_sample(instance: Instance, step: float) -> tuple[ContractOutcome, list[ContractOutcome]]:
    sweep = [contract_greedy(instance, a) for a in alpha_grid(step)]
    return _best(sweep), sweep


def dense_sample_oracle(
    instance: Instance, step: float, max_locations: int = MAX_LOCATIONS
) -> tuple[ContractOutcome, list[ContractOutcome]]:
    alphas = alpha_grid(step)
    if instance.deter_prob != 1.0:
        raise ModeError("the contract game is defined for deter_prob = 1 only")
    results: list[SolveResult] = contract_oracle_sweep(instance, alphas, max_locations)
    sweep = [outcome(instance, r.strategy, a) for a, r in zip(alphas, results)]
    return _best(sweep), sweep
