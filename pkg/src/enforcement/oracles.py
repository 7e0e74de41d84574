"""Ground-truth solvers for small instances.

``structural_oracle`` is exact: an optimal strategy puts every location on one
of its thresholds (or 0) except for at most one location that takes the
leftover budget, so enumerating those candidates suffices.

``grid_oracle`` searches a per-location grid (plus all thresholds) and is the
only oracle that handles quota constraints.  Laminar families are solved by a
dynamic program over the constraint tree; anything else falls back to a
pruned depth-first enumeration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constrained import Hierarchy, QuotaSet, find_intersecting_pair, validate_hierarchy
from .errors import InfeasibleError, ModeError, ParameterError, SizeError
from .model import (
    PAYOFF,
    TOL,
    Contract,
    Instance,
    ObjectiveMode,
    Strategy,
    breakpoints,
    location_value,
    max_threshold,
    never_deterred,
    objective,
    threshold,
)
from .result import Branch, SolveResult

MAX_LOCATIONS = 6
MAX_TYPES = 3


@dataclass(frozen=True)
class _TypeRow:
    loc: int
    tau: float
    free: bool  # never deterred
    count: float
    payoff: float


def _type_rows(instance: Instance) -> list[_TypeRow]:
    k, beta = instance.fine, instance.deter_prob
    return [
        _TypeRow(i, threshold(u, k, beta), never_deterred(u, k, beta), u.count, u.payoff)
        for i, loc in enumerate(instance.locations)
        for u in loc.types
    ]


def evaluate_matrix(instance: Instance, sigma: np.ndarray, mode: ObjectiveMode) -> tuple[np.ndarray, np.ndarray]:
    """Objective and payoff (under ``mode``'s tie rule) for each row of ``sigma``."""
    k, beta = instance.fine, instance.deter_prob
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    value = np.zeros(sigma.shape[0])
    pay_total = np.zeros(sigma.shape[0])
    for row in _type_rows(instance):
        s = sigma[:, row.loc]
        if row.free:
            y = np.ones_like(s)
        else:
            below = s < row.tau - TOL
            tie = np.abs(s - row.tau) <= TOL
            if mode.kind == "revenue":
                tie_y = 1.0
            elif mode.kind == "payoff":
                tie_y = 0.0
            else:
                engaged = (k * row.count + mode.alpha * beta * row.payoff) * row.tau
                tie_y = 0.0 if engaged <= mode.alpha * row.payoff + TOL else 1.0
            y = np.where(below, 1.0, np.where(tie, tie_y, 0.0))
        rev = s * y * k * row.count
        pay = beta * s * row.payoff + (1 - beta * s) * (1 - y) * row.payoff
        pay_total += pay
        if mode.kind == "revenue":
            value += rev
        elif mode.kind == "payoff":
            value += pay
        else:
            value += rev + mode.alpha * pay
    return value, pay_total


def _check_size(instance: Instance, max_locations: int, max_types: int) -> None:
    if len(instance.locations) > max_locations:
        raise SizeError(f"structural oracle supports at most {max_locations} locations")
    if max(len(loc.types) for loc in instance.locations) > max_types:
        raise SizeError(f"structural oracle supports at most {max_types} user types per location")


def structural_candidates(instance: Instance) -> np.ndarray:
    """Lexicographically sorted candidate strategies (one per row)."""
    R = instance.budget
    k, beta = instance.fine, instance.deter_prob
    levels = []
    for loc in instance.locations:
        pts = [0.0] + [b for b in breakpoints(loc, k, beta) if b <= min(R, 1.0) + TOL]
        if any(never_deterred(u, k, beta) for u in loc.types) and R >= 1.0 - TOL and pts[-1] < 1.0 - TOL:
            pts.append(1.0)
        levels.append(pts)
    rows = []
    for combo in itertools.product(*levels):
        spent = sum(combo)
        if spent > R + TOL:
            continue
        rows.append(combo)
        left = R - spent
        if left <= TOL:
            continue
        for i, base in enumerate(combo):
            pts = levels[i]
            later = [p for p in pts if p > base + TOL]
            # a linear piece ends at the next threshold (or at sigma = 1)
            nxt = later[0] if later else 1.0
            if base + left < nxt - TOL:
                row = list(combo)
                row[i] = base + left
                rows.append(tuple(row))
    cands = np.array(rows, dtype=float)
    order = np.lexsort(cands.T[::-1])
    return cands[order]


def _pick(values: np.ndarray, payoffs: np.ndarray, mode: ObjectiveMode) -> int:
    best = values.max()
    near = np.flatnonzero(values >= best - TOL)
    if mode.kind == "contract" and len(near) > 1:
        # principal-favourable tie-break, then lexicographic
        top = payoffs[near].max()
        near = near[payoffs[near] >= top - TOL]
    return int(near[0])


def structural_oracle(
    instance: Instance,
    mode: ObjectiveMode,
    max_locations: int = MAX_LOCATIONS,
    max_types: int = MAX_TYPES,
) -> SolveResult:
    _check_size(instance, max_locations, max_types)
    cands = structural_candidates(instance)
    values, pays = evaluate_matrix(instance, cands, mode)
    idx = _pick(values, pays, mode)
    strategy = Strategy.from_values(instance, cands[idx].tolist())
    return SolveResult(
        strategy,
        objective(instance, strategy, mode),
        Branch.ORACLE,
        tuple((loc_id, s) for loc_id, s in zip(instance.ids, cands[idx]) if s > 0),
        instance.budget,
    )


def contract_oracle_sweep(
    instance: Instance, alphas: Sequence[float], max_locations: int = MAX_LOCATIONS
) -> list[SolveResult]:
    """structural_oracle in contract mode for many alphas, sharing the candidates."""
    _check_size(instance, max_locations, MAX_TYPES)
    cands = structural_candidates(instance)
    out = []
    for alpha in alphas:
        mode = Contract(alpha)
        values, pays = evaluate_matrix(instance, cands, mode)
        idx = _pick(values, pays, mode)
        strategy = Strategy.from_values(instance, cands[idx].tolist())
        out.append(SolveResult(strategy, float(values[idx]), Branch.ORACLE, (), instance.budget))
    return out


def knapsack_lp_bound(instance: Instance, affordable: bool = True) -> float:
    """Fractional knapsack with sizes t = min(R, tau).

    Item values are the payoff actually earned by spending t at the location.
    With ``affordable=False`` every item is worth its full payoff; that variant
    still bounds the optimum but can exceed twice the greedy value.
    """
    if not instance.is_homogeneous:
        raise ModeError("knapsack bound needs one user type per location")
    R = instance.budget
    items = []
    for loc in instance.locations:
        u = loc.types[0]
        tau = threshold(u, instance.fine, instance.deter_prob)
        size = min(R, tau)
        value = location_value(loc, size, instance.fine, instance.deter_prob, PAYOFF) if affordable else u.payoff
        items.append((size, value))
    total, room = 0.0, R
    for size, value in sorted(items, key=lambda it: -(it[1] / it[0]) if it[0] > 0 else 0.0):
        if size <= 0 or room <= 0:
            continue
        take = min(1.0, room / size)
        total += take * value
        room -= take * size
    return total


# ---------------------------------------------------------------- grid oracle


def _max_slope(instance: Instance, mode: ObjectiveMode, i: int) -> float:
    loc = instance.locations[i]
    rev = instance.fine * sum(u.count for u in loc.types)
    pay = instance.deter_prob * sum(u.payoff for u in loc.types)
    if mode.kind == "revenue":
        return rev
    if mode.kind == "payoff":
        return pay
    return rev + mode.alpha * pay


def _location_grid(instance: Instance, i: int, step: float, cap: float) -> np.ndarray:
    loc = instance.locations[i]
    n = int(np.floor(cap / step + TOL))
    pts = set(np.round(np.arange(n + 1) * step, 12).tolist())
    pts |= {b for b in breakpoints(loc, instance.fine, instance.deter_prob) if b <= cap + TOL}
    pts.add(cap)
    return np.array(sorted(p for p in pts if p <= cap + TOL))


class _Table:
    """usage -> best value, with back-pointers for reconstruction."""

    def __init__(self, usage, value, sources):
        self.usage = usage
        self.value = value
        self.sources = sources  # list of (child table, index array)


def _dedupe(usage, value, parts, prune: bool):
    key = np.round(usage * 1e9).astype(np.int64)
    order = np.lexsort((-value, key))
    key, usage, value = key[order], usage[order], value[order]
    parts = [p[order] for p in parts]
    first = np.ones(len(key), dtype=bool)
    first[1:] = key[1:] != key[:-1]
    usage, value = usage[first], value[first]
    parts = [p[first] for p in parts]
    if prune and len(value):
        best_before = np.maximum.accumulate(np.concatenate(([-np.inf], value[:-1])))
        keep = value > best_before + 1e-12
        usage, value = usage[keep], value[keep]
        parts = [p[keep] for p in parts]
    return usage, value, parts


def _combine(a: _Table, b: _Table, cap: float, prune: bool) -> _Table:
    ia, ib = np.meshgrid(np.arange(len(a.usage)), np.arange(len(b.usage)), indexing="ij")
    ia, ib = ia.ravel(), ib.ravel()
    usage = a.usage[ia] + b.usage[ib]
    ok = usage <= cap + TOL
    ia, ib, usage = ia[ok], ib[ok], usage[ok]
    value = a.value[ia] + b.value[ib]
    usage, value, (ia, ib) = _dedupe(usage, value, [ia, ib], prune)
    return _Table(usage, value, [(a, ia), (b, ib)])


def _restrict(t: _Table, lower: float, upper: float, prune: bool) -> _Table:
    ok = (t.usage >= lower - TOL) & (t.usage <= upper + TOL)
    idx = np.flatnonzero(ok)
    usage, value, (idx,) = _dedupe(t.usage[idx], t.value[idx], [idx], prune)
    return _Table(usage, value, [(t, idx)])


def _unwind(t: _Table, idx: int, sigma: list[float], leaves: dict[int, int]) -> None:
    if not t.sources:
        sigma[leaves[id(t)]] = float(t.usage[idx])
        return
    for child, pointer in t.sources:
        _unwind(child, int(pointer[idx]), sigma, leaves)


def _tree_search(instance, hierarchy: Hierarchy, grids, values, budget: float):
    n = len(instance.locations)
    index = {loc.id: i for i, loc in enumerate(instance.locations)}
    leaves = {}
    leaf_tables = []
    for i in range(n):
        t = _Table(grids[i], values[i], [])
        leaves[id(t)] = i
        leaf_tables.append(t)

    # strict ancestors with a lower bound forbid pruning dominated usage levels
    def lower_above(level: int, members: frozenset) -> bool:
        return any(
            s.lower > TOL and members <= s.members
            for layer in hierarchy.layers[level + 1:]
            for s in layer
        )

    current = {i: leaf_tables[i] for i in range(n)}  # location index -> table of its current group
    groups = {i: frozenset([instance.locations[i].id]) for i in range(n)}
    for level, layer in enumerate(hierarchy.layers):
        new_current, new_groups = {}, {}
        for qset in layer:
            keys = sorted({min(index[m] for m in groups[j]) for j in current if groups[j] <= qset.members})
            inner = qset.lower <= TOL and not lower_above(level, qset.members)
            cap = min(qset.upper, budget)
            table = current[keys[0]]
            for j in keys[1:]:
                table = _combine(table, current[j], cap, prune=inner)
            table = _restrict(table, qset.lower, cap, prune=not lower_above(level, qset.members))
            head = min(index[m] for m in qset.members)
            new_current[head] = table
            new_groups[head] = qset.members
        current, groups = new_current, new_groups
    tables = [current[j] for j in sorted(current)]
    root = tables[0]
    for t in tables[1:]:
        root = _combine(root, t, budget, prune=True)
    root = _restrict(root, 0.0, budget, prune=True)
    if len(root.value) == 0:
        return None
    best = int(np.argmax(root.value))
    sigma = [0.0] * n
    _unwind(root, best, sigma, leaves)
    return sigma


def _dfs_search(instance, sets: Sequence[QuotaSet], grids, values, budget: float):
    n = len(instance.locations)
    ids = instance.ids
    member = [[j for j, s in enumerate(sets) if ids[i] in s.members] for i in range(n)]
    last = {}
    for i in range(n):
        for j in member[i]:
            last[j] = i
    used = [0.0] * len(sets)
    best = [-np.inf, None]
    choice = [0.0] * n

    def go(i: int, spent: float, acc: float) -> None:
        if i == n:
            if acc > best[0] + TOL:
                best[0], best[1] = acc, list(choice)
            return
        for g, v in zip(grids[i], values[i]):
            if spent + g > budget + TOL:
                break
            if any(used[j] + g > sets[j].upper + TOL for j in member[i]):
                break
            # a set whose final member is i must now meet its lower quota
            if any(last[j] == i and used[j] + g < sets[j].lower - TOL for j in member[i]):
                continue
            for j in member[i]:
                used[j] += g
            choice[i] = float(g)
            go(i + 1, spent + g, acc + v)
            for j in member[i]:
                used[j] -= g

    go(0, 0.0, 0.0)
    return best[1]


def grid_oracle(
    instance: Instance,
    step: float,
    hierarchy: Hierarchy | Sequence[QuotaSet] | None = None,
    mode: ObjectiveMode = PAYOFF,
    max_locations: int = MAX_LOCATIONS,
) -> SolveResult:
    if not step > 0:
        raise ParameterError("step must be positive")
    if len(instance.locations) > max_locations:
        raise SizeError(f"grid oracle supports at most {max_locations} locations")
    if hierarchy is None:
        hierarchy = Hierarchy((), ())
    laminar = True
    if not isinstance(hierarchy, Hierarchy):
        raw = list(hierarchy)
        if find_intersecting_pair(raw) is None:
            hierarchy = validate_hierarchy(raw, instance)
        else:
            laminar = False
            sets = raw
    if laminar:
        sets = list(hierarchy.sets)
    has_lower = any(s.lower > TOL for s in sets)

    R = instance.budget
    k, beta = instance.fine, instance.deter_prob
    grids, values = [], []
    for i, loc in enumerate(instance.locations):
        free = any(never_deterred(u, k, beta) for u in loc.types)
        top = 1.0 if (has_lower or free) else max_threshold(loc, k, beta)
        cap = min(R, top, 1.0)
        g = _location_grid(instance, i, step, cap)
        sigma = np.zeros((len(g), len(instance.locations)))
        sigma[:, i] = g
        v, _ = evaluate_matrix(instance, sigma, mode)
        grids.append(g)
        values.append(v)

    if laminar:
        sigma = _tree_search(instance, hierarchy, grids, values, R)
    else:
        sigma = _dfs_search(instance, sets, grids, values, R)
    if sigma is None:
        raise InfeasibleError("no grid point satisfies the quota constraints")
    strategy = Strategy.from_values(instance, sigma)
    err = step * sum(_max_slope(instance, mode, i) for i in range(len(instance.locations)))
    return SolveResult(
        strategy,
        objective(instance, strategy, mode),
        Branch.ORACLE,
        tuple((loc_id, s) for loc_id, s in zip(instance.ids, sigma) if s > 0),
        R,
        error_bound=err,
    )

