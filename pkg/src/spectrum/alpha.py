"""
Admissible rotation velocities for the Rotating Wave Toolkit.

alpha_n = iota(1/n) * n is the unique root of
    pi n = sqrt(alpha^2 - 1) - (pi/2 - arcsin(1/alpha)),
the velocities for which the spectrum of L_alpha keeps a gap proportional to j.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional

import numpy as np
from scipy import optimize

from ..asymptotics.iota import f_inverse, iota
from ..asymptotics.sandwich import admissible_sigma_condition
from ..utils.logger import get_logger
from ..utils.validators import NumericError, Validator

logger = get_logger()

RESIDUAL_TOLERANCE = 1.0e-12
ADMISSIBLE_MATCH = 1.0e-9


@dataclass
class AdmissibleAlpha:
    """alpha_n together with its proof diagnostics."""
    n: int
    sigma: Fraction
    alpha: float
    kappa: float
    residual: float
    c_empirical: Optional[float] = None
    gap_argmin: Optional[tuple] = None
    gap_cutoffs: Optional[tuple] = None

    @property
    def exceeds_n(self) -> bool:
        return self.alpha > self.n

    @property
    def rearranged_residual(self) -> float:
        """alpha^2 - 1 - (pi n + pi/2 - arcsin(1/alpha))^2."""
        shift = math.pi * self.n + 0.5 * math.pi - math.asin(1.0 / self.alpha)
        return self.alpha ** 2 - 1.0 - shift ** 2

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'sigma': str(self.sigma),
            'alpha': self.alpha,
            'residual': self.residual,
            'kappa': self.kappa,
            'alpha_gt_n': self.exceeds_n,
            'c_empirical': self.c_empirical,
        }


def velocity_residual(alpha: float, n: float) -> float:
    """pi n - (sqrt(alpha^2 - 1) - (pi/2 - arcsin(1/alpha)))."""
    return math.pi * n - (math.sqrt(alpha * alpha - 1.0) - math.acos(1.0 / alpha))


@lru_cache(maxsize=1024)
def _solve_alpha(n: int) -> float:
    # the right side increases in alpha; pi n undershoots and pi n + pi/2 + 1 overshoots
    return optimize.brentq(
        lambda a: velocity_residual(a, n),
        math.pi * n, math.pi * n + 0.5 * math.pi + 1.0,
        xtol=1.0e-15, rtol=4.0 * np.finfo(float).eps, maxiter=200,
    )


def alpha_n(n: int) -> AdmissibleAlpha:
    """The n-th admissible velocity with its kappa_n diagnostic."""
    n = Validator.validate_index(n)
    alpha = _solve_alpha(n)
    residual = abs(velocity_residual(alpha, n))
    if residual > RESIDUAL_TOLERANCE * max(1.0, math.pi * n):
        raise NumericError("alpha_n residual too large", {'n': n, 'alpha': alpha, 'residual': residual})
    return AdmissibleAlpha(
        n=n,
        sigma=Fraction(1, n),
        alpha=alpha,
        kappa=kappa_n(n, alpha),
        residual=residual,
    )


def kappa_n(n: int, alpha: Optional[float] = None) -> float:
    """kappa_n = -(pi/4) exp(1/(3n)) + (alpha_n - pi/2) / n."""
    n = Validator.validate_index(n)
    if alpha is None:
        alpha = _solve_alpha(n)
    return -0.25 * math.pi * math.exp(1.0 / (3.0 * n)) + (alpha - 0.5 * math.pi) / n


def kappa_lower_estimate(n: int) -> float:
    """1 - pi (1/(2n) + exp(1/(3n))/4), the bound once alpha_n > n; tends to 1 - pi/4."""
    return 1.0 - math.pi * (1.0 / (2.0 * n) + 0.25 * math.exp(1.0 / (3.0 * n)))


def alpha_n_approx(n: int) -> float:
    """sqrt(1 + (pi n + pi/2)^2), accurate up to O(1/n)."""
    n = Validator.validate_index(n)
    return math.sqrt(1.0 + (math.pi * n + 0.5 * math.pi) ** 2)


def validity_threshold(n_max: int = 100) -> Optional[int]:
    """Smallest n such that kappa_m > 0 and alpha_m > m for every m in [n, n_max]."""
    threshold = None
    for n in range(n_max, 0, -1):
        alpha = alpha_n(n)
        if alpha.kappa > 0 and alpha.exceeds_n:
            threshold = n
        else:
            break
    return threshold


def alpha_sequence(n_values: List[int]) -> List[AdmissibleAlpha]:
    return [alpha_n(n) for n in n_values]


def is_admissible(alpha: float) -> Optional[int]:
    """Return n if alpha coincides with alpha_n, otherwise None."""
    if alpha <= 1:
        return None
    n = round((math.sqrt(alpha * alpha - 1.0) - math.acos(1.0 / alpha)) / math.pi)
    if n < 1 or n > Validator.MAX_INDEX:
        return None
    if abs(_solve_alpha(n) - alpha) <= ADMISSIBLE_MATCH * alpha:
        return n
    return None


@dataclass
class RationalVelocity:
    """Velocity attached to a rational sigma = m/n (exploratory extension)."""
    m: int
    n: int
    alpha: float
    condition: float

    @property
    def sigma(self) -> Fraction:
        return Fraction(self.m, self.n)

    @property
    def condition_holds(self) -> bool:
        return self.condition > 0


def alpha_sigma(m: int, n: int) -> RationalVelocity:
    """alpha = iota(sigma) / sigma for sigma = m/n, flagged by the sigma condition."""
    m = Validator.validate_index(m)
    n = Validator.validate_index(n)
    sigma = m / n
    alpha = iota(sigma).iota / sigma
    condition = admissible_sigma_condition(m, n)
    if condition <= 0:
        logger.warning(f"sigma = {m}/{n} fails the extension condition ({condition:.3g}); no gap guarantee")
    return RationalVelocity(m=m, n=n, alpha=alpha, condition=condition)


def mixed_type_radius(alpha: float) -> Optional[float]:
    """Radius 1/alpha where L_alpha turns from elliptic to hyperbolic; None if alpha <= 1."""
    alpha = Validator.validate_velocity(alpha)
    if alpha <= 1:
        return None
    return 1.0 / alpha


def operator_type(alpha: float, r: float) -> str:
    """Type of L_alpha at radius r: elliptic inside 1/alpha, parabolic on it, hyperbolic outside."""
    radius = mixed_type_radius(alpha)
    if radius is None or r < radius:
        return "elliptic"
    if r == radius:
        return "parabolic"
    return "hyperbolic"


def sigma_from_alpha(alpha: float) -> float:
    """f^{-1}(alpha): the ratio sigma with iota(sigma)/sigma = alpha."""
    return f_inverse(alpha)
