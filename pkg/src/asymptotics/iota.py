"""
Asymptotic zero function for the Rotating Wave Toolkit.

iota(x) is the limit of j_{xk,k} / k as k grows. It is available three ways:
pointwise from the angle equation, through the explicit inverse of
f(x) = iota(x) / x, and as the solution of the first-order ODE
d iota / dx = G(iota, x) started at iota(0) = pi.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize, special

from ..specfun.bessel import bessel_j_zero
from ..utils.logger import get_logger
from ..utils.validators import DomainError, NumericError, Validator

logger = get_logger()

ANGLE_XTOL = 1.0e-15
ANGLE_EDGE = 1.0e-12
RESIDUAL_TOLERANCE = 1.0e-12


@dataclass(frozen=True)
class IotaPoint:
    """(x, phi(x), iota(x)) solving the angle equation."""
    x: float
    phi: float
    iota: float

    @property
    def residual(self) -> float:
        if self.x == 0:
            return 0.0
        return abs(_angle_lhs(self.phi) - self.x / math.pi)

    @property
    def quotient(self) -> float:
        """f(x) = iota(x) / x; +inf at x = 0, the limit from the right."""
        if self.x == 0:
            return math.inf
        return self.iota / self.x


def _angle_lhs(phi: float) -> float:
    # the denominator stays positive on (-pi/2, pi/2)
    return math.sin(phi) / (math.cos(phi) - (0.5 * math.pi - phi) * math.sin(phi))


def iota(x: float) -> IotaPoint:
    """Solve sin(phi) / (cos(phi) - (pi/2 - phi) sin(phi)) = x / pi and return iota = x / sin(phi)."""
    x = Validator.validate_finite("x", x)
    if x <= -1:
        raise DomainError(f"iota is defined for x > -1, got {x}")
    if x == 0:
        return IotaPoint(x=0.0, phi=0.0, iota=math.pi)

    target = x / math.pi
    # left side increases from -1/pi at -pi/2 to +inf at pi/2
    phi = optimize.brentq(
        lambda t: _angle_lhs(t) - target,
        -0.5 * math.pi, 0.5 * math.pi - ANGLE_EDGE,
        xtol=ANGLE_XTOL, rtol=4.0 * np.finfo(float).eps, maxiter=200,
    )
    point = IotaPoint(x=x, phi=phi, iota=x / math.sin(phi))
    if point.residual > RESIDUAL_TOLERANCE * max(1.0, abs(target)):
        raise NumericError("Angle equation residual too large", {'x': x, 'phi': phi, 'residual': point.residual})
    return point


def f_inverse(y: float) -> float:
    """Inverse of f(x) = iota(x) / x on (1, inf)."""
    y = Validator.validate_finite("y", y)
    if y <= 1:
        raise DomainError(f"f only takes values above 1, got {y}")
    return math.pi / (math.sqrt(y * y - 1.0) - math.acos(1.0 / y))


def G_closed(y: float, x: float) -> float:
    """arccos(x/y) / sqrt(1 - (x/y)^2), the right-hand side of the iota ODE."""
    if y <= 0:
        raise DomainError(f"G requires y > 0, got {y}")
    r = x / y
    if abs(r) >= 1:
        raise DomainError(f"G requires |x/y| < 1, got {r}")
    s = math.sqrt((1.0 - r) * (1.0 + r))
    return math.atan2(s, r) / s


def G_watson(y: float, x: float) -> float:
    """2y \\int_0^inf K0(2yt) exp(-2xt) dt by quadrature; equals G_closed for |x/y| < 1."""
    if y <= 0 or abs(x / y) >= 1:
        raise DomainError(f"Watson form of G needs y > 0 and |x/y| < 1, got y={y}, x={x}")

    # k0e(z) = e^z K0(z); the combined exponent -2(y + x)t decays since y + x > 0
    def integrand(t):
        return special.k0e(2.0 * y * t) * math.exp(-2.0 * (y + x) * t)

    head, err_head = integrate.quad(integrand, 0.0, 1.0, epsabs=1.0e-14, epsrel=1.0e-12, limit=200)
    tail, err_tail = integrate.quad(integrand, 1.0, np.inf, epsabs=1.0e-14, epsrel=1.0e-12, limit=200)
    if 2.0 * y * (err_head + err_tail) > 1.0e-9:
        raise NumericError("Watson quadrature for G did not converge", {'y': y, 'x': x})
    return 2.0 * y * (head + tail)


def g_ratio(t: float) -> float:
    """g(t) = arccos(1/t) / sqrt(1 - 1/t^2) = G(t, 1)."""
    return G_closed(t, 1.0)


def g_slope(t: float) -> float:
    """Closed-form g'(t) = (s - arctan s) / s^3 with s = sqrt(t^2 - 1)."""
    if t <= 1:
        raise DomainError(f"g is defined for t > 1, got {t}")
    s = math.sqrt((t - 1.0) * (t + 1.0))
    if s < 1.0e-3:
        s2 = s * s
        return 1.0 / 3.0 - s2 / 5.0 + s2 * s2 / 7.0
    return (s - math.atan(s)) / s ** 3


@dataclass
class IotaTable:
    """Dense solution of the iota ODE on [0, x_max]."""
    x: np.ndarray
    values: np.ndarray
    x_max: float
    rtol: float
    steps: int
    _solution: Optional[object] = field(default=None, repr=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < 0) | (x > self.x_max)):
            raise DomainError(f"Table covers [0, {self.x_max}] only")
        return self._solution(x)[0]


def iota_via_ode(x_max: float, rtol: float = 1.0e-10, atol: float = 1.0e-12) -> IotaTable:
    """Integrate d iota / dx = G(iota, x), iota(0) = pi with DOP853."""
    x_max = Validator.validate_positive("x_max", x_max)

    result = integrate.solve_ivp(
        lambda x, y: [G_closed(y[0], x)],
        (0.0, x_max), [math.pi],
        method='DOP853', rtol=rtol, atol=atol, dense_output=True,
    )
    if not result.success:
        raise NumericError(
            "iota ODE integration failed",
            {'message': result.message, 'x_reached': float(result.t[-1])},
        )

    logger.debug(f"iota ODE on [0, {x_max}] took {len(result.t) - 1} steps")
    return IotaTable(
        x=result.t,
        values=result.y[0],
        x_max=x_max,
        rtol=rtol,
        steps=len(result.t) - 1,
        _solution=result.sol,
    )


def iota_k(x: float, k: int) -> float:
    """iota_k(x) = j_{xk,k} / k, the finite-index approximant of iota(x)."""
    x = Validator.validate_positive("x", x)
    return bessel_j_zero(x * k, k).value / k
