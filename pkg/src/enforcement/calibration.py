"""Exponential permit-purchase model used by the second parking counterfactual.

The probability that a user skips the permit when the lot is patrolled with
probability sigma is modelled as exp(-gamma * sigma).
"""

from __future__ import annotations

import math

from .errors import CalibrationError, ParameterError
from .model import UserType


def calibrate_exponential(sigma_sq: float, citation_frac: float) -> float:
    """Rate gamma making the curve pass through (sigma_sq, citation_frac)."""
    if not 0 < citation_frac <= 1:
        raise CalibrationError("citation_frac must lie in (0, 1]")
    if citation_frac == 1:
        return 0.0
    if sigma_sq <= 0:
        raise CalibrationError("sigma_sq must be positive to fit a decaying curve")
    return -math.log(citation_frac) / sigma_sq


def discretize_exponential(
    gamma: float,
    lot_count: float,
    permit_fee: float,
    step: float = 0.01,
    *,
    fine: float = 45.0,
    deter_prob: float = 0.0,
) -> list[UserType]:
    """Bin the threshold distribution into user types with midpoint thresholds.

    Mass beyond sigma = 1 becomes one type that is never deterred.
    Zero-mass bins are dropped.
    """
    if not step > 0:
        raise ParameterError("step must be positive")
    if gamma < 0:
        raise ParameterError("gamma must be nonnegative")
    bins = int(round(1.0 / step))
    types = []
    for j in range(bins):
        lo, hi = j * step, min((j + 1) * step, 1.0)
        mass = lot_count * (math.exp(-gamma * lo) - math.exp(-gamma * hi))
        if mass <= 0:
            continue
        tau = (lo + hi) / 2
        benefit = tau * fine / (1.0 - deter_prob * tau)
        types.append(UserType(mass, benefit, mass * permit_fee))
    tail = lot_count * math.exp(-gamma)
    if tail > 0 or not types:
        if deter_prob >= 1:
            raise ParameterError("with deter_prob = 1 every user can be deterred; no type fits the tail mass")
        # any benefit above fine / (1 - deter_prob) keeps the threshold above one
        benefit = 2.0 * fine / (1.0 - deter_prob)
        types.append(UserType(tail, benefit, tail * permit_fee))
    return types
