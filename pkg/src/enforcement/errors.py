"""Exception hierarchy shared by every solver module."""


class EnforcementError(ValueError):
    """Base class for all domain errors raised by this package."""


class StructuralError(EnforcementError):
    """Strategy or scenario does not match the instance (ids, shapes)."""


class ModeError(EnforcementError):
    """Solver called on an instance it does not support."""


class ParameterError(EnforcementError):
    """Invalid numeric parameter (step, delta, m, sigma...)."""


class SizeError(EnforcementError):
    """Instance exceeds the enumeration limits of an oracle."""


class InfeasibleError(EnforcementError):
    """Quota constraints cannot be met."""


class CalibrationError(EnforcementError):
    """Counterfactual calibration or Bayesian flattening failed."""


class HierarchyError(EnforcementError):
    """Constraint family is not laminar or references unknown locations."""
