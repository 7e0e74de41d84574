"""Monotone concave upper approximation (MCUA) of per-location value functions.

A location's revenue or payoff, as a function of the resources it receives, is
piecewise linear with jumps at the user thresholds.  The MCUA is the smallest
nondecreasing concave function above it; we represent it as a list of linear
segments, each with a slope and a width.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError, StructuralError
from .model import (
    TOL,
    Location,
    LocationId,
    ObjectiveMode,
    breakpoints,
    location_value,
    never_deterred,
    threshold,
)


@dataclass(frozen=True)
class Breakpoint:
    sigma: float
    value_left_limit: float
    value_at: float


@dataclass(frozen=True)
class ValueFunction:
    location: Location
    fine: float
    deter_prob: float
    mode: ObjectiveMode
    domain_max: float
    breakpoints: tuple[Breakpoint, ...]

    def __call__(self, sigma: float) -> float:
        return location_value(self.location, sigma, self.fine, self.deter_prob, self.mode)


@dataclass(frozen=True)
class Segment:
    location: LocationId
    slope: float
    width: float
    start_sigma: float
    start_value: float

    @property
    def end_sigma(self) -> float:
        return self.start_sigma + self.width

    @property
    def end_value(self) -> float:
        return self.start_value + self.slope * self.width


def _left_limit(location: Location, sigma: float, fine: float, deter_prob: float, mode: ObjectiveMode) -> float:
    # every type whose threshold is at or above sigma is still engaging just below it
    rev = pay = 0.0
    for user in location.types:
        engaged = never_deterred(user, fine, deter_prob) or threshold(user, fine, deter_prob) >= sigma - TOL
        y = 1 if engaged else 0
        rev += sigma * y * fine * user.count
        pay += deter_prob * sigma * user.payoff + (1 - deter_prob * sigma) * (1 - y) * user.payoff
    if mode.kind == "revenue":
        return rev
    if mode.kind == "payoff":
        return pay
    return rev + mode.alpha * pay


def location_value_function(
    location: Location, fine: float, deter_prob: float, mode: ObjectiveMode, domain_max: float
) -> ValueFunction:
    if not location.types:
        raise StructuralError(f"location {location.id!r} has no user types")
    if not (0 < domain_max <= 1 + TOL):
        raise ParameterError("domain_max must lie in (0, 1]")
    domain_max = min(domain_max, 1.0)
    points = [0.0]
    points += [b for b in breakpoints(location, fine, deter_prob) if TOL < b < domain_max - TOL]
    points.append(domain_max)
    bps = tuple(
        Breakpoint(
            s,
            _left_limit(location, s, fine, deter_prob, mode),
            location_value(location, s, fine, deter_prob, mode),
        )
        for s in points
    )
    return ValueFunction(location, fine, deter_prob, mode, domain_max, bps)


def build_mcua(vf: ValueFunction) -> list[Segment]:
    xs = [bp.sigma for bp in vf.breakpoints]
    ys = []
    running = float("-inf")
    for bp in vf.breakpoints:
        running = max(running, bp.value_at)
        ys.append(running)

    hull: list[int] = []
    for i in range(len(xs)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a])
            if cross >= 0:  # b lies on or below the chord a -> i
                hull.pop()
            else:
                break
        hull.append(i)

    segments = []
    for a, b in zip(hull, hull[1:]):
        width = xs[b] - xs[a]
        if width <= 0:
            continue
        slope = max(0.0, (ys[b] - ys[a]) / width)
        segments.append(Segment(vf.location.id, slope, width, xs[a], ys[a]))
    return segments


def location_mcua(
    location: Location, fine: float, deter_prob: float, mode: ObjectiveMode, domain_max: float
) -> list[Segment]:
    if domain_max <= 0:
        return []
    return build_mcua(location_value_function(location, fine, deter_prob, mode, domain_max))


def eval_mcua(segments: list[Segment], sigma: float) -> float:
    if sigma < 0:
        raise ParameterError("sigma must be nonnegative")
    if not segments:
        return 0.0
    value = segments[0].start_value
    for seg in segments:
        if sigma <= seg.start_sigma:
            break
        value = seg.start_value + seg.slope * min(sigma - seg.start_sigma, seg.width)
    return value
