"""Domain types, user best responses and exact objective evaluation.

Every solver in the package scores its output through the functions in this
module, so they are written for clarity rather than speed.  The oracles keep a
separate vectorised evaluator and the test-suite checks the two agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Hashable, Iterable, Literal, Mapping, Sequence

from .errors import CalibrationError, ParameterError, StructuralError

TOL = 1e-9

LocationId = Hashable


@dataclass(frozen=True)
class UserType:
    count: float
    benefit: float
    payoff: float

    def __post_init__(self) -> None:
        for name in ("count", "benefit", "payoff"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.count < 0:
            raise ParameterError(f"count must be nonnegative, got {self.count}")
        if self.benefit <= 0:
            raise ParameterError(f"benefit must be positive, got {self.benefit}")
        if self.payoff < 0:
            raise ParameterError(f"payoff must be nonnegative, got {self.payoff}")


@dataclass(frozen=True)
class Location:
    id: LocationId
    types: tuple[UserType, ...]

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.types, key=lambda t: t.benefit))
        object.__setattr__(self, "types", ordered)

    @property
    def is_homogeneous(self) -> bool:
        return len(self.types) == 1

    @property
    def total_payoff(self) -> float:
        return sum(t.payoff for t in self.types)


@dataclass(frozen=True)
class Instance:
    fine: float
    deter_prob: float
    budget: float
    locations: tuple[Location, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "locations", tuple(self.locations))
        if not (math.isfinite(self.fine) and self.fine > 0):
            raise ParameterError("fine must be positive")
        if not (0.0 <= self.deter_prob <= 1.0):
            raise ParameterError("deter_prob must lie in [0, 1]")
        if not (math.isfinite(self.budget) and self.budget >= 0):
            raise ParameterError("budget must be nonnegative")
        if not self.locations:
            raise StructuralError("instance needs at least one location")
        ids = [loc.id for loc in self.locations]
        if len(set(ids)) != len(ids):
            raise StructuralError("location ids must be unique")
        for loc in self.locations:
            if not loc.types:
                raise StructuralError(f"location {loc.id!r} has no user types")

    @property
    def ids(self) -> list[LocationId]:
        return [loc.id for loc in self.locations]

    @property
    def is_homogeneous(self) -> bool:
        return all(loc.is_homogeneous for loc in self.locations)

    def location(self, loc_id: LocationId) -> Location:
        for loc in self.locations:
            if loc.id == loc_id:
                return loc
        raise StructuralError(f"unknown location id {loc_id!r}")

    def with_budget(self, budget: float) -> "Instance":
        return replace(self, budget=budget)

    def with_fine(self, fine: float) -> "Instance":
        return replace(self, fine=fine)

    def subset(self, ids: Iterable[LocationId], budget: float) -> "Instance":
        wanted = set(ids)
        locs = tuple(loc for loc in self.locations if loc.id in wanted)
        return replace(self, budget=budget, locations=locs)


@dataclass(frozen=True)
class Strategy:
    alloc: Mapping[LocationId, float] = field(default_factory=dict)

    @classmethod
    def zero(cls, instance: Instance) -> "Strategy":
        return cls({loc_id: 0.0 for loc_id in instance.ids})

    @classmethod
    def from_values(cls, instance: Instance, values: Sequence[float]) -> "Strategy":
        if len(values) != len(instance.locations):
            raise StructuralError("one value per location expected")
        return cls({loc_id: float(v) for loc_id, v in zip(instance.ids, values)})

    def values(self, instance: Instance) -> list[float]:
        return [float(self.alloc[loc_id]) for loc_id in instance.ids]

    def total(self) -> float:
        return float(sum(self.alloc.values()))

    def __getitem__(self, loc_id: LocationId) -> float:
        return self.alloc[loc_id]


@dataclass(frozen=True)
class ObjectiveMode:
    kind: Literal["revenue", "payoff", "contract"]
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("revenue", "payoff", "contract"):
            raise ParameterError(f"unknown objective {self.kind!r}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ParameterError("contract alpha must lie in [0, 1]")
        if self.kind != "contract" and self.alpha != 0.0:
            raise ParameterError("alpha only applies to contract mode")

    def __str__(self) -> str:
        return f"contract({self.alpha:g})" if self.kind == "contract" else self.kind


REVENUE = ObjectiveMode("revenue")
PAYOFF = ObjectiveMode("payoff")


def Contract(alpha: float) -> ObjectiveMode:
    return ObjectiveMode("contract", float(alpha))


def threshold(user: UserType, fine: float, deter_prob: float) -> float:
    if fine <= 0:
        raise ParameterError("fine must be positive")
    return min(1.0, user.benefit / (deter_prob * user.benefit + fine))


def never_deterred(user: UserType, fine: float, deter_prob: float) -> bool:
    """True when the unclamped threshold exceeds one."""
    return deter_prob * user.benefit + fine < user.benefit


def best_response(
    user: UserType, sigma: float, fine: float, deter_prob: float, mode: ObjectiveMode
) -> int:
    if never_deterred(user, fine, deter_prob):
        return 1
    tau = threshold(user, fine, deter_prob)
    if sigma < tau - TOL:
        return 1
    if sigma > tau + TOL:
        return 0
    if mode.kind == "revenue":
        return 1
    if mode.kind == "payoff":
        return 0
    # defaulting at the threshold earns the fine plus the detected share of payoff
    engaged = (fine * user.count + mode.alpha * deter_prob * user.payoff) * tau
    return 0 if engaged <= mode.alpha * user.payoff + TOL else 1


def _revenue_term(user: UserType, sigma: float, y: int, fine: float) -> float:
    return sigma * y * fine * user.count


def _payoff_term(user: UserType, sigma: float, y: int, deter_prob: float) -> float:
    return deter_prob * sigma * user.payoff + (1.0 - deter_prob * sigma) * (1 - y) * user.payoff


def location_terms(
    location: Location, sigma: float, fine: float, deter_prob: float, mode: ObjectiveMode
) -> tuple[float, float]:
    """(revenue, payoff) at one location, both under ``mode``'s tie-breaking."""
    rev = pay = 0.0
    for user in location.types:
        y = best_response(user, sigma, fine, deter_prob, mode)
        rev += _revenue_term(user, sigma, y, fine)
        pay += _payoff_term(user, sigma, y, deter_prob)
    return rev, pay


def location_value(
    location: Location, sigma: float, fine: float, deter_prob: float, mode: ObjectiveMode
) -> float:
    rev, pay = location_terms(location, sigma, fine, deter_prob, mode)
    if mode.kind == "revenue":
        return rev
    if mode.kind == "payoff":
        return pay
    return rev + mode.alpha * pay


def _checked_sigmas(instance: Instance, strategy: Strategy) -> list[float]:
    unknown = set(strategy.alloc) - set(instance.ids)
    if unknown:
        raise StructuralError(f"strategy has unknown location ids {sorted(map(str, unknown))}")
    missing = [loc_id for loc_id in instance.ids if loc_id not in strategy.alloc]
    if missing:
        raise StructuralError(f"strategy is missing location ids {missing}")
    return strategy.values(instance)


def _total(instance: Instance, strategy: Strategy, mode: ObjectiveMode, part: str) -> float:
    total = 0.0
    for loc, sigma in zip(instance.locations, _checked_sigmas(instance, strategy)):
        rev, pay = location_terms(loc, sigma, instance.fine, instance.deter_prob, mode)
        total += {"revenue": rev, "payoff": pay, "both": rev + mode.alpha * pay}[part]
    return total


def revenue(instance: Instance, strategy: Strategy, tie: ObjectiveMode = REVENUE) -> float:
    return _total(instance, strategy, tie, "revenue")


def payoff(instance: Instance, strategy: Strategy, tie: ObjectiveMode = PAYOFF) -> float:
    return _total(instance, strategy, tie, "payoff")


def contract_objective(instance: Instance, strategy: Strategy, alpha: float) -> float:
    return _total(instance, strategy, Contract(alpha), "both")


def objective(instance: Instance, strategy: Strategy, mode: ObjectiveMode) -> float:
    if mode.kind == "revenue":
        return revenue(instance, strategy)
    if mode.kind == "payoff":
        return payoff(instance, strategy)
    return contract_objective(instance, strategy, mode.alpha)


def validate_strategy(
    instance: Instance, strategy: Strategy, budget: float | None = None
) -> list[str]:
    """Human-readable violations; an empty list means the strategy is valid."""
    limit = instance.budget if budget is None else budget
    problems: list[str] = []
    known = set(instance.ids)
    for loc_id, sigma in strategy.alloc.items():
        if loc_id not in known:
            problems.append(f"unknown location id {loc_id!r}")
            continue
        if not (isinstance(sigma, (int, float)) and math.isfinite(sigma)):
            problems.append(f"alloc not a finite number at {loc_id!r}")
        elif sigma < -TOL or sigma > 1 + TOL:
            problems.append(f"alloc out of range at {loc_id!r}: {sigma}")
    for loc_id in instance.ids:
        if loc_id not in strategy.alloc:
            problems.append(f"missing location id {loc_id!r}")
    finite = [v for v in strategy.alloc.values() if isinstance(v, (int, float)) and math.isfinite(v)]
    if sum(finite) > limit + TOL:
        problems.append(f"budget exceeded: {sum(finite)} > {limit}")
    return problems


BayesianLocation = tuple[LocationId, Sequence[Sequence[tuple[float, UserType]]]]


def flatten_bayesian(
    fine: float, deter_prob: float, budget: float, locations: Sequence[BayesianLocation]
) -> Instance:
    """Expand groups of (probability, realisation) pairs into plain user types.

    Each realisation becomes its own type with count and payoff scaled by its
    probability; objectives are linear in both, so expectations are preserved.
    """
    flat: list[Location] = []
    for loc_id, groups in locations:
        types: list[UserType] = []
        for g, group in enumerate(groups):
            probs = [q for q, _ in group]
            if any(q < 0 for q in probs) or abs(sum(probs) - 1.0) > TOL:
                raise CalibrationError(
                    f"location {loc_id!r} group {g}: probabilities must be nonnegative and sum to 1"
                )
            for q, user in group:
                types.append(UserType(q * user.count, user.benefit, q * user.payoff))
        flat.append(Location(loc_id, tuple(types)))
    return Instance(fine, deter_prob, budget, tuple(flat))


def breakpoints(location: Location, fine: float, deter_prob: float) -> list[float]:
    """Distinct thresholds of the types at a location, ascending, merged within TOL."""
    out: list[float] = []
    for user in location.types:
        if never_deterred(user, fine, deter_prob):
            continue
        tau = threshold(user, fine, deter_prob)
        if not out or tau > out[-1] + TOL:
            out.append(tau)
    return out


def max_threshold(location: Location, fine: float, deter_prob: float) -> float:
    return max(threshold(u, fine, deter_prob) for u in location.types)
