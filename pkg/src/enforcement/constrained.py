"""Allocation under nested (laminar) lower/upper quota constraints."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Hashable, Iterable, Literal, Sequence

from .errors import HierarchyError, InfeasibleError
from .heterogeneous import greedy_payoff_het, instance_segments, slope_order
from .homogeneous import _taus
from .mcua import Segment
from .model import PAYOFF, TOL, Instance, LocationId, Strategy, max_threshold, objective
from .result import Branch, SolveResult


@dataclass(frozen=True)
class QuotaSet:
    id: Hashable
    members: frozenset
    lower: float = 0.0
    upper: float = float("inf")
    # True for pass-through copies added while normalising layers
    synthetic: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.members:
            raise HierarchyError(f"constraint {self.id!r} has no members")
        if self.lower < 0 or self.upper < 0:
            raise HierarchyError(f"constraint {self.id!r} has a negative quota")
        if self.lower > self.upper + TOL:
            raise HierarchyError(f"constraint {self.id!r}: lower {self.lower} exceeds upper {self.upper}")


@dataclass(frozen=True)
class Hierarchy:
    sets: tuple[QuotaSet, ...]
    layers: tuple[tuple[QuotaSet, ...], ...]

    @property
    def depth(self) -> int:
        return len(self.layers)

    def normalized(self) -> list[QuotaSet]:
        return [s for layer in self.layers for s in layer]

    def enclosing(self, loc_id: LocationId) -> list[QuotaSet]:
        """The normalised set containing ``loc_id`` at each layer, bottom first."""
        return [s for layer in self.layers for s in layer if loc_id in s.members]

    def has_lower_bounds(self) -> bool:
        return any(s.lower > TOL for s in self.sets)


def find_intersecting_pair(sets: Sequence[QuotaSet]) -> tuple[QuotaSet, QuotaSet] | None:
    for a, b in itertools.combinations(sets, 2):
        common = a.members & b.members
        if common and not (a.members <= b.members or b.members <= a.members):
            return a, b
    return None


def validate_hierarchy(sets: Iterable[QuotaSet], instance: Instance) -> Hierarchy:
    sets = tuple(sets)
    known = set(instance.ids)
    for s in sets:
        unknown = s.members - known
        if unknown:
            raise HierarchyError(f"constraint {s.id!r} names unknown locations {sorted(map(str, unknown))}")
    pair = find_intersecting_pair(sets)
    if pair is not None:
        a, b = pair
        raise HierarchyError(
            f"not a hierarchy: constraints {a.id!r} and {b.id!r} intersect without nesting"
        )
    if not sets:
        return Hierarchy((), ())

    # height 1 = contains no other set; identical member sets nest in input order
    def contains(big: int, small: int) -> bool:
        a, b = sets[big].members, sets[small].members
        return b < a or (a == b and small < big)

    height = [0] * len(sets)
    for i in sorted(range(len(sets)), key=lambda j: (len(sets[j].members), j)):
        below = [height[j] for j in range(len(sets)) if j != i and contains(i, j)]
        height[i] = 1 + max(below, default=0)
    depth = max(height)

    layers: list[list[QuotaSet]] = [[] for _ in range(depth)]
    for i, s in enumerate(sets):
        layers[height[i] - 1].append(s)

    def tightest_upper(loc_id: LocationId) -> float:
        caps = [s.upper for s in sets if loc_id in s.members]
        return min(caps, default=instance.budget)

    for level in range(depth):
        covered = {loc for s in layers[level] for loc in s.members}
        for loc_id in instance.ids:
            if loc_id in covered:
                continue
            if level == 0:
                copy = QuotaSet(("pass", loc_id, 1), {loc_id}, 0.0, tightest_upper(loc_id), True)
            else:
                below = next(s for s in layers[level - 1] if loc_id in s.members)
                copy = QuotaSet(("pass", below.id, level + 1), below.members, 0.0, below.upper, True)
            layers[level].append(copy)
            covered |= copy.members
    order = {loc_id: i for i, loc_id in enumerate(instance.ids)}
    frozen = tuple(
        tuple(sorted(layer, key=lambda s: min(order[m] for m in s.members))) for layer in layers
    )
    return Hierarchy(sets, frozen)


class _Quotas:
    """Remaining upper quota of every normalised set, plus the budget."""

    def __init__(self, instance: Instance, hierarchy: Hierarchy, budget: float) -> None:
        self.budget = budget
        self.remaining = {id(s): s.upper for s in hierarchy.normalized()}
        self.chains = {loc_id: hierarchy.enclosing(loc_id) for loc_id in instance.ids}

    def room(self, loc_id: LocationId) -> float:
        caps = [self.remaining[id(s)] for s in self.chains[loc_id]]
        return max(0.0, min([self.budget, *caps]))

    def spend(self, loc_id: LocationId, amount: float) -> None:
        self.budget -= amount
        for s in self.chains[loc_id]:
            self.remaining[id(s)] -= amount


def _caps(instance: Instance, hierarchy: Hierarchy) -> list[float]:
    return [
        min([instance.budget, *(s.upper for s in hierarchy.enclosing(loc.id))])
        for loc in instance.locations
    ]


def _stage_one(
    instance: Instance, hierarchy: Hierarchy, sigma: list[float], quotas: _Quotas
) -> list[tuple[LocationId, float]]:
    per_location = instance_segments(instance, PAYOFF, _caps(instance, hierarchy))
    steps = []
    for i, seg in slope_order(per_location):
        if seg.slope <= TOL or quotas.budget <= TOL:
            continue
        loc_id = instance.locations[i].id
        fresh = _unused(seg, sigma[i])
        take = min(fresh, quotas.room(loc_id))
        if take <= TOL:
            continue
        sigma[i] += take
        quotas.spend(loc_id, take)
        steps.append((loc_id, take))
    return steps


def _unused(seg: Segment, sigma: float) -> float:
    return max(0.0, min(seg.width, seg.end_sigma - max(seg.start_sigma, sigma)))


def satisfy_lower_bounds(instance: Instance, hierarchy: Hierarchy) -> Strategy:
    """Smallest pre-allocation meeting every lower quota, cheapest slopes last."""
    sigma = [0.0] * len(instance.locations)
    if not hierarchy.has_lower_bounds():
        return Strategy.from_values(instance, sigma)
    need_total = max(sum(s.lower for s in layer) for layer in hierarchy.layers)
    if need_total > instance.budget + TOL:
        raise InfeasibleError(f"lower quotas need {need_total} resources but the budget is {instance.budget}")
    quotas = _Quotas(instance, hierarchy, instance.budget)
    index = {loc.id: i for i, loc in enumerate(instance.locations)}
    caps = _caps(instance, hierarchy)
    for layer in hierarchy.layers:
        for qset in layer:
            members = [loc for loc in instance.locations if loc.id in qset.members]
            have = sum(sigma[index[loc.id]] for loc in members)
            need = qset.lower - have
            if need <= TOL:
                continue
            sub = instance.subset(qset.members, instance.budget)
            segs = instance_segments(sub, PAYOFF, [caps[index[loc.id]] for loc in members])
            # beyond the relaxation's domain, spend at zero marginal value up to sigma = 1
            for j, loc in enumerate(members):
                end = segs[j][-1].end_sigma if segs[j] else 0.0
                if end < 1.0:
                    top = segs[j][-1].end_value if segs[j] else 0.0
                    segs[j].append(Segment(loc.id, 0.0, 1.0 - end, end, top))
            for j, seg in slope_order(segs):
                if need <= TOL:
                    break
                i = index[members[j].id]
                take = min(need, _unused(seg, sigma[i]), quotas.room(members[j].id))
                if take <= TOL:
                    continue
                sigma[i] += take
                quotas.spend(members[j].id, take)
                need -= take
            if need > TOL:
                raise InfeasibleError(f"cannot meet the lower quota of constraint {qset.id!r}")
    return Strategy.from_values(instance, sigma)


def constrained_greedy(instance: Instance, hierarchy: Hierarchy) -> SolveResult:
    if hierarchy.depth == 0:
        return greedy_payoff_het(instance)
    if hierarchy.has_lower_bounds():
        pre = satisfy_lower_bounds(instance, hierarchy)
        sigma = pre.values(instance)
        quotas = _Quotas(instance, hierarchy, instance.budget)
        for loc_id, amount in zip(instance.ids, sigma):
            quotas.spend(loc_id, amount)
        steps = [(loc_id, a) for loc_id, a in zip(instance.ids, sigma) if a > 0]
        steps += _stage_one(instance, hierarchy, sigma, quotas)
        strategy = Strategy.from_values(instance, sigma)
        return SolveResult(
            strategy, objective(instance, strategy, PAYOFF), Branch.GREEDY, tuple(steps), instance.budget
        )

    sigma = [0.0] * len(instance.locations)
    quotas = _Quotas(instance, hierarchy, instance.budget)
    _stage_one(instance, hierarchy, sigma, quotas)
    by_id = dict(zip(instance.ids, sigma))
    final = {loc_id: 0.0 for loc_id in instance.ids}
    steps: list[tuple[LocationId, float]] = []
    for qset in hierarchy.layers[0]:
        share = sum(by_id[m] for m in qset.members)
        sub = instance.subset(qset.members, min(share, qset.upper))
        if sub.budget <= TOL:
            continue
        part = greedy_payoff_het(sub)
        final.update(part.strategy.alloc)
        steps.extend(part.diagnostics)
    strategy = Strategy(final)
    return SolveResult(strategy, objective(instance, strategy, PAYOFF), Branch.GREEDY, tuple(steps), instance.budget)


def quota_violations(instance: Instance, strategy: Strategy, sets: Iterable[QuotaSet]) -> list[str]:
    problems = []
    for s in sets:
        used = sum(strategy.alloc[m] for m in s.members)
        if used > s.upper + TOL:
            problems.append(f"constraint {s.id!r} upper quota exceeded: {used} > {s.upper}")
        if used < s.lower - TOL:
            problems.append(f"constraint {s.id!r} lower quota missed: {used} < {s.lower}")
    return problems


def relax_quotas(hierarchy: Hierarchy, regime: Literal["L1", "L2"]) -> tuple[Hierarchy, float]:
    """Loosen upper quotas for the resource-augmentation comparisons.

    L1: every bottom-layer set gets one extra unit, ancestors absorb the units
    of the bottom sets they contain.  L2: every second-layer set and every
    bottom set gets one unit, and higher sets absorb one unit per second-layer
    descendant.  A single-layer family counts the budget as its second layer.
    """
    if regime not in ("L1", "L2"):
        raise ValueError("regime must be 'L1' or 'L2'")
    if hierarchy.depth == 0:
        return hierarchy, 0.0
    ones = hierarchy.layers[0]
    twos = hierarchy.layers[1] if hierarchy.depth >= 2 else ()

    def bump(s: QuotaSet, level: int) -> float:
        if regime == "L1":
            return float(sum(1 for c in ones if c.members <= s.members))
        if level == 0:
            return 1.0
        return float(sum(1 for c in twos if c.members <= s.members))

    relaxed_layers = []
    mapping: dict[int, QuotaSet] = {}
    for level, layer in enumerate(hierarchy.layers):
        new_layer = []
        for s in layer:
            fresh = replace(s, upper=s.upper + bump(s, level))
            mapping[id(s)] = fresh
            new_layer.append(fresh)
        relaxed_layers.append(tuple(new_layer))
    new_sets = tuple(mapping.get(id(s), s) for s in hierarchy.sets)
    extra = float(len(ones)) if regime == "L1" else float(len(twos) if twos else 1)
    return Hierarchy(new_sets, tuple(relaxed_layers)), extra


def quota_greedy_unstructured(instance: Instance, sets: Sequence[QuotaSet]) -> SolveResult:
    """Payoff greedy by p/tau that respects arbitrary (possibly overlapping) upper quotas.

    Reproduces the failure mode on non-laminar families; not a recommended solver.
    """
    taus = _taus(instance)
    ratios = [loc.types[0].payoff / t for loc, t in zip(instance.locations, taus)]
    order = sorted(range(len(taus)), key=lambda i: -ratios[i])
    left = {id(s): s.upper for s in sets}
    remaining = instance.budget
    sigma = [0.0] * len(taus)
    for i in order:
        loc_id = instance.locations[i].id
        room = min([remaining, taus[i], *(left[id(s)] for s in sets if loc_id in s.members)])
        if room <= TOL:
            continue
        sigma[i] = room
        remaining -= room
        for s in sets:
            if loc_id in s.members:
                left[id(s)] -= room
    strategy = Strategy.from_values(instance, sigma)
    return SolveResult(strategy, objective(instance, strategy, PAYOFF), Branch.GREEDY, (), instance.budget)


def location_caps(instance: Instance, hierarchy: Hierarchy) -> list[float]:
    """Largest useful allocation per location under the hierarchy."""
    return [
        min(c, max_threshold(loc, instance.fine, instance.deter_prob))
        for c, loc in zip(_caps(instance, hierarchy), instance.locations)
    ]
