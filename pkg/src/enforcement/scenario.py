"""Strict JSON scenario files.

Layout::

    {"fine": 45, "deter_prob": 1, "budget": 2.5,
     "locations": [{"id": "A", "types": [{"count": 3, "benefit": 1.2, "payoff": 4}]}],
     "constraints": [{"id": "S1", "members": ["A"], "lower": 0, "upper": 1}],
     "contract": {"step": 0.05},
     "experiment": {"counterfactual": "threshold", "strategic_frac": 0.5}}

Only ``fine``, ``deter_prob``, ``budget`` and ``locations`` are required.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

from .constrained import QuotaSet
from .errors import EnforcementError
from .model import Instance, Location, UserType


class ScenarioError(EnforcementError):
    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


@dataclass(frozen=True)
class StatusQuo:
    id: Any
    sigma: float
    citation_frac: tuple[float, ...]


@dataclass(frozen=True)
class ExperimentSpec:
    counterfactual: str | None = None
    strategic_frac: float | None = None
    citation_multiplier: float | None = None
    status_quo: tuple[StatusQuo, ...] = ()


@dataclass(frozen=True)
class Scenario:
    instance: Instance
    constraints: tuple[QuotaSet, ...] = ()
    contract_step: float | None = None
    experiment: ExperimentSpec | None = None


def _reject_constant(name: str):
    raise ScenarioError("", f"non-finite number {name} is not allowed")


def _object(value: Any, path: str, required: set[str], optional: set[str]) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(path, "expected an object")
    unknown = set(value) - required - optional
    if unknown:
        raise ScenarioError(path, f"unknown field(s) {sorted(unknown)}")
    missing = required - set(value)
    if missing:
        raise ScenarioError(path, f"missing field(s) {sorted(missing)}")
    return value


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, "expected a number")
    if not math.isfinite(value):
        raise ScenarioError(path, "number must be finite")
    return float(value)


def _ident(value: Any, path: str):
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ScenarioError(path, "id must be a string or an integer")
    return value


def _list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise ScenarioError(path, "expected a list")
    return value


def _user_type(raw: Any, path: str) -> UserType:
    obj = _object(raw, path, {"count", "benefit", "payoff"}, set())
    count = _number(obj["count"], f"{path}.count")
    benefit = _number(obj["benefit"], f"{path}.benefit")
    pay = _number(obj["payoff"], f"{path}.payoff")
    if count < 0:
        raise ScenarioError(f"{path}.count", "count must be nonnegative")
    if benefit <= 0:
        raise ScenarioError(f"{path}.benefit", "benefit must be positive")
    if pay < 0:
        raise ScenarioError(f"{path}.payoff", "payoff must be nonnegative")
    return UserType(count, benefit, pay)


def _location(raw: Any, path: str) -> Location:
    obj = _object(raw, path, {"id", "types"}, set())
    types = _list(obj["types"], f"{path}.types")
    if not types:
        raise ScenarioError(f"{path}.types", "at least one user type is required")
    return Location(
        _ident(obj["id"], f"{path}.id"),
        tuple(_user_type(t, f"{path}.types[{j}]") for j, t in enumerate(types)),
    )


def _constraint(raw: Any, path: str, ids: set) -> QuotaSet:
    obj = _object(raw, path, {"id", "members"}, {"lower", "upper"})
    members = _list(obj["members"], f"{path}.members")
    if not members:
        raise ScenarioError(f"{path}.members", "at least one member is required")
    for j, m in enumerate(members):
        if _ident(m, f"{path}.members[{j}]") not in ids:
            raise ScenarioError(f"{path}.members[{j}]", f"unknown location id {m!r}")
    lower = _number(obj.get("lower", 0.0), f"{path}.lower")
    upper = _number(obj["upper"], f"{path}.upper") if "upper" in obj else math.inf
    if lower < 0:
        raise ScenarioError(f"{path}.lower", "lower must be nonnegative")
    if upper < lower:
        raise ScenarioError(f"{path}.upper", "upper must be at least lower")
    return QuotaSet(_ident(obj["id"], f"{path}.id"), frozenset(members), lower, upper)


def _experiment(raw: Any, path: str, ids: set) -> ExperimentSpec:
    obj = _object(raw, path, set(), {"counterfactual", "strategic_frac", "citation_multiplier", "status_quo"})
    cf = obj.get("counterfactual")
    if cf is not None and cf not in ("threshold", "exponential"):
        raise ScenarioError(f"{path}.counterfactual", "expected 'threshold' or 'exponential'")
    frac = obj.get("strategic_frac")
    if frac is not None:
        frac = _number(frac, f"{path}.strategic_frac")
        if not 0 <= frac <= 1:
            raise ScenarioError(f"{path}.strategic_frac", "must lie in [0, 1]")
    mult = obj.get("citation_multiplier")
    if mult is not None:
        mult = _number(mult, f"{path}.citation_multiplier")
        if mult <= 0:
            raise ScenarioError(f"{path}.citation_multiplier", "must be positive")
    rows = []
    for j, item in enumerate(_list(obj.get("status_quo", []), f"{path}.status_quo")):
        p = f"{path}.status_quo[{j}]"
        sq = _object(item, p, {"id", "sigma", "citation_frac"}, set())
        loc_id = _ident(sq["id"], f"{p}.id")
        if loc_id not in ids:
            raise ScenarioError(f"{p}.id", f"unknown location id {loc_id!r}")
        sigma = _number(sq["sigma"], f"{p}.sigma")
        if not 0 <= sigma <= 1:
            raise ScenarioError(f"{p}.sigma", "must lie in [0, 1]")
        fracs = tuple(
            _number(c, f"{p}.citation_frac[{i}]") for i, c in enumerate(_list(sq["citation_frac"], f"{p}.citation_frac"))
        )
        rows.append(StatusQuo(loc_id, sigma, fracs))
    return ExperimentSpec(cf, frac, mult, tuple(rows))


def parse_scenario(text: str) -> Scenario:
    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    obj = _object(raw, "", {"fine", "deter_prob", "budget", "locations"}, {"constraints", "contract", "experiment"})
    fine = _number(obj["fine"], "fine")
    if fine <= 0:
        raise ScenarioError("fine", "fine must be positive")
    beta = _number(obj["deter_prob"], "deter_prob")
    if not 0 <= beta <= 1:
        raise ScenarioError("deter_prob", "deter_prob must lie in [0, 1]")
    budget = _number(obj["budget"], "budget")
    if budget < 0:
        raise ScenarioError("budget", "budget must be nonnegative")
    locs = _list(obj["locations"], "locations")
    if not locs:
        raise ScenarioError("locations", "at least one location is required")
    locations = tuple(_location(loc, f"locations[{i}]") for i, loc in enumerate(locs))
    ids = [loc.id for loc in locations]
    if len(set(ids)) != len(ids):
        raise ScenarioError("locations", "location ids must be unique")
    id_set = set(ids)
    constraints = tuple(
        _constraint(c, f"constraints[{i}]", id_set)
        for i, c in enumerate(_list(obj.get("constraints", []), "constraints"))
    )
    step = None
    if "contract" in obj:
        contract = _object(obj["contract"], "contract", {"step"}, set())
        step = _number(contract["step"], "contract.step")
        if not 0 < step <= 1:
            raise ScenarioError("contract.step", "step must lie in (0, 1]")
    experiment = _experiment(obj["experiment"], "experiment", id_set) if "experiment" in obj else None
    return Scenario(Instance(fine, beta, budget, locations), constraints, step, experiment)


def scenario_to_dict(s: Scenario) -> dict:
    inst = s.instance
    order = {loc_id: i for i, loc_id in enumerate(inst.ids)}
    out: dict[str, Any] = {
        "fine": inst.fine,
        "deter_prob": inst.deter_prob,
        "budget": inst.budget,
        "locations": [
            {"id": loc.id, "types": [{"count": t.count, "benefit": t.benefit, "payoff": t.payoff} for t in loc.types]}
            for loc in inst.locations
        ],
    }
    if s.constraints:
        rows = []
        for c in s.constraints:
            row: dict[str, Any] = {"id": c.id, "members": sorted(c.members, key=order.__getitem__), "lower": c.lower}
            if math.isfinite(c.upper):
                row["upper"] = c.upper
            rows.append(row)
        out["constraints"] = rows
    if s.contract_step is not None:
        out["contract"] = {"step": s.contract_step}
    if s.experiment is not None:
        e = s.experiment
        exp: dict[str, Any] = {}
        if e.counterfactual is not None:
            exp["counterfactual"] = e.counterfactual
        if e.strategic_frac is not None:
            exp["strategic_frac"] = e.strategic_frac
        if e.citation_multiplier is not None:
            exp["citation_multiplier"] = e.citation_multiplier
        if e.status_quo:
            exp["status_quo"] = [
                {"id": r.id, "sigma": r.sigma, "citation_frac": list(r.citation_frac)} for r in e.status_quo
            ]
        out["experiment"] = exp
    return out


def serialize_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2)


def load_scenario(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
