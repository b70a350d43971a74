"""
Special-function kernel for the Rotating Wave Toolkit.

Bessel functions of the first kind and their positive zeros, negative zeros of
the Airy function and the modified Bessel functions K0/K1. Every zero comes with
the classical enclosures it must satisfy, and the engine refuses to return a
value that falls outside them.

Zero counting uses the continuous Bessel phase theta(x) = arg(J_nu + i Y_nu).
theta increases monotonically (its derivative is 2 / (pi x (J^2 + Y^2)) by the
Wronskian) and the k-th positive zero of J_nu is the point where it crosses
(k - 1/2) pi. The enclosures alone may hold several zeros at large index, the
phase count fixes which one is the k-th.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import integrate, special

from ..utils.logger import get_logger
from ..utils.validators import DomainError, NumericError, Validator

logger = get_logger()

# Phase grid spacing; theta' stays below ~1.07 for x >= max(nu, 1)
GRID_STEP = 1.0
MAX_ITERATIONS = 60
XTOL = 1.0e-13
EPS = np.finfo(float).eps

# K0(45) ~ 1e-20, the Watson integrand is negligible past 2 j sinh(t) = 45
K0_CUTOFF = 45.0
QUAD_TOLERANCE = 1.0e-9

CBRT2 = 2.0 ** (1.0 / 3.0)


@dataclass(frozen=True)
class AiryZero:
    """The k-th negative zero a_k of Ai, stored by magnitude."""
    index: int
    magnitude: float

    @property
    def lower(self) -> float:
        return ((3.0 * math.pi / 8.0) * (4 * self.index - 1.4)) ** (2.0 / 3.0)

    @property
    def upper(self) -> float:
        return ((3.0 * math.pi / 8.0) * (4 * self.index - 0.965)) ** (2.0 / 3.0)


@dataclass(frozen=True)
class BesselZero:
    """A certified zero j_{nu,k} of J_nu with its enclosure."""
    order: float
    index: int
    value: float
    lower: float
    upper: float

    def contains(self, x: float) -> bool:
        # the nu = 0 upper bound is attained with equality in the limit statement
        if self.order == 0:
            return self.lower < x <= self.upper
        return self.lower < x < self.upper

    def to_dict(self) -> dict:
        return {
            'nu': self.order,
            'k': self.index,
            'value': self.value,
            'lower': self.lower,
            'upper': self.upper,
        }


# ----------------------------------------------------------------------------
# Evaluation kernels
# ----------------------------------------------------------------------------

def bessel_j(nu: float, x: float) -> float:
    """J_nu(x) for real nonnegative order and argument inside the validated range."""
    nu = Validator.validate_order(nu)
    x = Validator.validate_argument(x)
    return float(special.jv(nu, x))


def mod_bessel_k(order: int, x: float) -> float:
    """Modified Bessel function of the second kind, order 0 or 1."""
    if order not in (0, 1):
        raise DomainError(f"Only K0 and K1 are provided, got order {order}")
    x = Validator.validate_positive("x", x)
    return float(special.k0(x) if order == 0 else special.k1(x))


@lru_cache(maxsize=32)
def _airy_table(size: int) -> np.ndarray:
    """Magnitudes |a_1| .. |a_size|, polished by two Newton steps on Ai."""
    a = special.ai_zeros(size)[0]
    for _ in range(2):
        ai, aip, _, _ = special.airy(a)
        a = a - ai / aip
    table = -a
    table.setflags(write=False)
    return table


def _airy_magnitudes(k_max: int) -> np.ndarray:
    size = max(64, 1 << (int(k_max) - 1).bit_length())
    return _airy_table(size)[:k_max]


def airy_zero(k: int) -> AiryZero:
    """The k-th negative zero of the Airy function, by magnitude."""
    k = Validator.validate_index(k)
    zero = AiryZero(index=k, magnitude=float(_airy_magnitudes(k)[k - 1]))
    if not zero.lower < zero.magnitude < zero.upper:
        raise NumericError(
            "Airy zero outside its enclosure",
            {'k': k, 'value': zero.magnitude, 'bracket': (zero.lower, zero.upper)},
        )
    return zero


# ----------------------------------------------------------------------------
# Enclosures
# ----------------------------------------------------------------------------

def _order_zero_bracket(k) -> Tuple:
    lower = math.pi * k - math.pi / 4.0
    return lower, lower + 1.0 / (8.0 * math.pi * (k - 0.25))


def zero_bracket(nu: float, k: int) -> Tuple[float, float]:
    """Airy-based enclosure of j_{nu,k} (nu > 0), or the dedicated nu = 0 bracket."""
    nu = Validator.validate_order(nu)
    k = Validator.validate_index(k)
    if nu == 0:
        return _order_zero_bracket(k)
    a = float(_airy_magnitudes(k)[k - 1])
    lower = nu + a / CBRT2 * nu ** (1.0 / 3.0)
    upper = lower + 0.15 * a * a * CBRT2 / nu ** (1.0 / 3.0)
    return lower, upper


def zero_enclosure(nu: float, k: int) -> Tuple[float, float]:
    """Closed-form enclosure of j_{nu,k} using the explicit Airy zero bounds."""
    nu = Validator.validate_order(nu)
    k = Validator.validate_index(k)
    if nu == 0:
        return _order_zero_bracket(k)
    lower, upper = enclosure_arrays(nu, k)
    return float(lower), float(upper)


def enclosure_arrays(nu, k) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised closed-form enclosure; nu > 0 and k >= 1 are assumed."""
    nu = np.asarray(nu, dtype=float)
    k = np.asarray(k, dtype=float)
    cube = np.cbrt(nu)
    low_a = ((3.0 * np.pi / 8.0) * (4.0 * k - 2.0)) ** (2.0 / 3.0)
    high_a = (1.5 * np.pi * k) ** (2.0 / 3.0)
    lower = nu + low_a / CBRT2 * cube
    with np.errstate(divide='ignore'):
        upper = nu + high_a / CBRT2 * cube + 0.15 * high_a ** 2 * CBRT2 / cube
    return lower, upper


def _row_upper_bound(nu: float, count: int) -> float:
    """An upper bound for j_{nu,count}, used to size the phase grid."""
    if nu == 0:
        return _order_zero_bracket(count)[1]
    bound = min(zero_bracket(nu, count)[1], float(enclosure_arrays(nu, count)[1]))
    if nu <= 0.5:
        # zeros increase with the order and j_{1/2,k} = k pi
        bound = min(bound, math.pi * count)
    return bound


# ----------------------------------------------------------------------------
# Zero engine
# ----------------------------------------------------------------------------

def _phase_grid(nu: float, x_end: float) -> Tuple[np.ndarray, np.ndarray]:
    """Unwrapped Bessel phase on an equispaced grid starting below the first zero."""
    x0 = max(nu, 1.0)
    n = max(2, int(math.ceil((x_end - x0) / GRID_STEP)) + 1)
    x = x0 + GRID_STEP * np.arange(n)
    # J_nu(x0) > 0, so the principal branch at x0 is the true phase
    theta = np.unwrap(np.arctan2(special.yv(nu, x), special.jv(nu, x)))
    return x, theta


def _refine(nu: float, lo: np.ndarray, hi: np.ndarray, guess: np.ndarray) -> np.ndarray:
    """Safeguarded Newton on J_nu inside sign-change brackets, bisection fallback."""
    a = lo.copy()
    b = hi.copy()
    fa = special.jv(nu, a)
    x = np.clip(guess, a, b)

    for _ in range(MAX_ITERATIONS):
        f = special.jv(nu, x)
        df = special.jvp(nu, x)
        exact = f == 0.0
        same = np.sign(f) == np.sign(fa)
        a = np.where(same & ~exact, x, a)
        fa = np.where(same & ~exact, f, fa)
        b = np.where(same | exact, b, x)

        with np.errstate(divide='ignore', invalid='ignore'):
            x_new = x - f / df
        outside = ~np.isfinite(x_new) | (x_new <= a) | (x_new >= b)
        x_new = np.where(outside, 0.5 * (a + b), x_new)
        x_new = np.where(exact, x, x_new)

        converged = np.abs(x_new - x) <= XTOL + 4.0 * EPS * np.abs(x_new)
        x = x_new
        if converged.all():
            return x

    worst = int(np.argmax(b - a))
    raise NumericError(
        f"Zero refinement for order {nu} did not converge",
        {'bracket': (float(a[worst]), float(b[worst])), 'iterate': float(x[worst])},
    )


def _zeros_on_grid(nu: float, x: np.ndarray, theta: np.ndarray, ks: np.ndarray) -> np.ndarray:
    targets = (ks - 0.5) * np.pi
    idx = np.searchsorted(theta, targets, side='left')
    if idx.size and idx.max() >= len(x):
        raise NumericError(
            f"Phase grid for order {nu} ends before zero {int(ks.max())}",
            {'x_end': float(x[-1]), 'phase_end': float(theta[-1])},
        )
    lo = x[idx - 1]
    hi = x[idx]
    t_lo = theta[idx - 1]
    t_hi = theta[idx]
    guess = lo + (targets - t_lo) / (t_hi - t_lo) * (hi - lo)
    return _refine(nu, lo, hi, guess)


@lru_cache(maxsize=8192)
def _zero_row(nu: float, count: int) -> np.ndarray:
    x, theta = _phase_grid(nu, _row_upper_bound(nu, count) + GRID_STEP)
    values = _zeros_on_grid(nu, x, theta, np.arange(1, count + 1))
    values.setflags(write=False)
    return values


def bessel_j_zeros(nu: float, k_max: int) -> np.ndarray:
    """First ``k_max`` positive zeros of J_nu (read-only array, cached per order)."""
    nu = Validator.validate_order(nu)
    k_max = Validator.validate_index(k_max)
    count = min(Validator.MAX_INDEX, max(32, 1 << (k_max - 1).bit_length()))
    return _zero_row(nu, count)[:k_max]


def bessel_j_zeros_below(nu: float, x_max: float) -> np.ndarray:
    """All positive zeros of J_nu not exceeding ``x_max``."""
    nu = Validator.validate_order(nu)
    x_max = Validator.validate_argument(x_max)
    if x_max < max(nu, 1.0):
        return np.empty(0)
    x, theta = _phase_grid(nu, x_max)
    x = np.append(x[x < x_max], x_max)
    theta_end = np.unwrap(np.arctan2(special.yv(nu, x), special.jv(nu, x)))[-1]
    count = int(math.floor(theta_end / math.pi + 0.5))
    if count < 1:
        return np.empty(0)
    zeros = bessel_j_zeros(nu, min(count, Validator.MAX_INDEX))
    return zeros[zeros <= x_max]


@lru_cache(maxsize=65536)
def bessel_j_zero(nu: float, k: int) -> BesselZero:
    """The k-th positive zero of J_nu with its enclosure."""
    nu = Validator.validate_order(nu)
    k = Validator.validate_index(k)
    value = float(bessel_j_zeros(nu, k)[k - 1])
    lower, upper = zero_bracket(nu, k)
    zero = BesselZero(order=nu, index=k, value=value, lower=lower, upper=upper)
    if not zero.contains(value):
        raise NumericError(
            f"Zero j({nu}, {k}) left its enclosure",
            {'value': value, 'bracket': (lower, upper)},
        )
    return zero


# ----------------------------------------------------------------------------
# Watson integrals
# ----------------------------------------------------------------------------

def bessel_zero_derivative(nu: float, k: int) -> float:
    """d j_{nu,k} / d nu = 2 j \\int_0^inf K0(2 j sinh t) exp(-2 nu t) dt."""
    nu = Validator.validate_positive("nu", nu)
    j = bessel_j_zero(nu, k).value
    t_max = math.asinh(K0_CUTOFF / (2.0 * j))

    value, error = integrate.quad(
        lambda t: special.k0(2.0 * j * math.sinh(t)) * math.exp(-2.0 * nu * t),
        0.0, t_max, epsabs=1.0e-15, epsrel=1.0e-12, limit=200,
    )
    if 2.0 * j * error > QUAD_TOLERANCE:
        raise NumericError(
            f"Watson integral for j({nu}, {k}) did not converge",
            {'estimate': 2.0 * j * value, 'error': 2.0 * j * error},
        )
    return 2.0 * j * value


def watson_k1_moment() -> float:
    """\\int_0^inf K1(t) t dt, equal to Gamma(1/2) Gamma(3/2) = pi / 2."""
    # K1(t) t < 1e-18 beyond the cutoff
    total, error = 0.0, 0.0
    for lower, upper in ((0.0, 1.0), (1.0, K0_CUTOFF)):
        value, estimate = integrate.quad(lambda t: special.k1(t) * t, lower, upper, epsabs=1.0e-14, limit=200)
        total += value
        error += estimate
    if error > QUAD_TOLERANCE:
        raise NumericError("K1 moment quadrature did not converge", {'error': error})
    return total
