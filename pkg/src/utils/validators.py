"""
Argument validation utilities for the Rotating Wave Toolkit.
"""

import math
from typing import Any, Dict, Iterable, List, Optional

from .logger import get_logger

logger = get_logger()


class ValidationError(Exception):
    """Custom exception for validation errors."""
    pass


class DomainError(ValidationError):
    """Argument lies outside the mathematical domain of an operation."""
    pass


class RangeError(ValidationError):
    """Argument lies outside the validated numeric range."""
    pass


class ConfigurationError(ValidationError):
    """A truncation or cutoff choice leaves nothing to work with."""
    pass


class NumericError(Exception):
    """An iteration or quadrature failed to converge.

    ``state`` carries whatever diagnostic the failing routine had at hand
    (bracket, last iterate, residual).
    """

    def __init__(self, message: str, state: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.state = dict(state or {})

    def __str__(self):
        base = super().__str__()
        if not self.state:
            return base
        details = ", ".join(f"{key}={value}" for key, value in self.state.items())
        return f"{base} [{details}]"


class Validator:
    """Consolidated range checks shared by all numerical kernels."""

    MAX_ORDER = 5.0e3
    MAX_INDEX = 10_000
    MAX_ARGUMENT = 1.0e5

    @staticmethod
    def validate_finite(name: str, value: float) -> float:
        """Reject NaN and infinities."""
        value = float(value)
        if not math.isfinite(value):
            logger.error(f"Non-finite value for {name}: {value}")
            raise RangeError(f"{name} must be finite, got {value}")
        return value

    @staticmethod
    def validate_order(nu: float) -> float:
        """Bessel order: 0 <= nu <= MAX_ORDER."""
        nu = Validator.validate_finite("order", nu)
        if nu < 0:
            raise DomainError(f"Bessel order must be nonnegative, got {nu}")
        if nu > Validator.MAX_ORDER:
            raise RangeError(f"Bessel order {nu} exceeds the validated range {Validator.MAX_ORDER:g}")
        return nu

    @staticmethod
    def validate_index(k: int) -> int:
        """Zero index: 1 <= k <= MAX_INDEX."""
        if isinstance(k, bool) or int(k) != k:
            raise DomainError(f"Zero index must be an integer, got {k!r}")
        k = int(k)
        if k < 1:
            raise DomainError(f"Zero index must be >= 1, got {k}")
        if k > Validator.MAX_INDEX:
            raise RangeError(f"Zero index {k} exceeds the validated range {Validator.MAX_INDEX}")
        return k

    @staticmethod
    def validate_argument(x: float) -> float:
        """Bessel argument: 0 <= x <= MAX_ARGUMENT."""
        x = Validator.validate_finite("argument", x)
        if x < 0:
            raise DomainError(f"Bessel argument must be nonnegative, got {x}")
        if x > Validator.MAX_ARGUMENT:
            raise RangeError(f"Bessel argument {x} exceeds the validated range {Validator.MAX_ARGUMENT:g}")
        return x

    @staticmethod
    def validate_positive(name: str, value: float, strict: bool = True) -> float:
        value = Validator.validate_finite(name, value)
        if value < 0 or (strict and value == 0):
            bound = "> 0" if strict else ">= 0"
            raise DomainError(f"{name} must be {bound}, got {value}")
        return value

    @staticmethod
    def validate_exponent(p: float, subcritical: bool = True) -> float:
        """Nonlinearity exponent: p in (2, 4) for the disk problem, p > 2 otherwise."""
        p = Validator.validate_finite("p", p)
        if p <= 2:
            raise DomainError(f"Exponent p must exceed 2, got {p}")
        if subcritical and p >= 4:
            raise DomainError(f"Exponent p must lie in (2, 4), got {p}")
        return p

    @staticmethod
    def validate_velocity(alpha: float) -> float:
        alpha = Validator.validate_finite("alpha", alpha)
        if alpha < 0:
            raise DomainError(f"Velocity alpha must be nonnegative, got {alpha}")
        return alpha

    @staticmethod
    def validate_cutoffs(ell_max: int, k_max: int) -> None:
        """Rectangular cutoffs must stay inside the zero engine's range."""
        if int(ell_max) != ell_max or ell_max < 0:
            raise DomainError(f"ell_max must be a nonnegative integer, got {ell_max!r}")
        if ell_max > Validator.MAX_ORDER:
            raise RangeError(f"ell_max {ell_max} exceeds the validated order range {Validator.MAX_ORDER:g}")
        Validator.validate_index(k_max)

    @staticmethod
    def validate_index_range(start: int, stop: int) -> List[int]:
        """Inclusive index range, both ends validated."""
        start = Validator.validate_index(start)
        stop = Validator.validate_index(stop)
        if stop < start:
            raise ValidationError(f"Empty index range {start}..{stop}")
        return list(range(start, stop + 1))

    @staticmethod
    def validate_all(check, values: Iterable[Any]) -> list:
        """Apply one validator to every value, collecting all failures in one error."""
        results = []
        errors = []
        for value in values:
            try:
                results.append(check(value))
            except ValidationError as e:
                errors.append(str(e))
        if errors:
            logger.error(f"Validation failed for {len(errors)} value(s)")
            for error in errors:
                logger.error(f"   - {error}")
            raise ValidationError("; ".join(errors))
        return results
