"""Certified rates of asymptotic regularity for compositions of averaged maps."""

from .errors import (AsymregError, ConsistencyError, InstanceError, InvalidInput, NumericFailure,
                     ParseError, UnsupportedRepresentation, ValidationError)
from .rates import (BoundFn, Constant, InversePower, RateValue, StepTable, b_bound, omega, phi, psi,
                    sigma, star, star_many, theta, varphi)

__version__ = "0.1.0"

__all__ = [
    "AsymregError", "ConsistencyError", "InstanceError", "InvalidInput", "NumericFailure", "ParseError",
    "UnsupportedRepresentation", "ValidationError",
    "BoundFn", "Constant", "InversePower", "RateValue", "StepTable",
    "b_bound", "omega", "phi", "psi", "sigma", "star", "star_many", "theta", "varphi",
]
