"""
Two-sided finite-index estimate for the Rotating Wave Toolkit.

For fixed x > 0 and eps in (0, 1) the gap iota_k(x) - iota(x) eventually sits
between -exp((1/3 + eps) x) pi / (4k) and -(1 - eps) pi / (4k). The scan here
evaluates both sides on a window of k and reports from which k onwards the
estimate holds throughout the window.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import pandas as pd

from ..utils.logger import get_logger
from ..utils.validators import ValidationError, Validator
from .iota import iota, iota_k

logger = get_logger()


@dataclass
class SandwichMargin:
    k: int
    ratio_minus_iota: float
    lower_bound: float
    upper_bound: float

    @property
    def ok(self) -> bool:
        return self.lower_bound <= self.ratio_minus_iota <= self.upper_bound


@dataclass
class SandwichReport:
    """Result of a finite-index scan of the two-sided estimate."""
    x: float
    epsilon: float
    k_min: int
    k_max: int
    iota_value: float
    observed_k0: Optional[int] = None
    margins: List[SandwichMargin] = None
    strictly_below: bool = True
    improved_bound_holds: bool = False

    def __post_init__(self):
        if self.margins is None:
            self.margins = []

    @property
    def found(self) -> bool:
        return self.observed_k0 is not None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    'k': margin.k,
                    'ratio_minus_iota': margin.ratio_minus_iota,
                    'lower_bound': margin.lower_bound,
                    'upper_bound': margin.upper_bound,
                    'ok': margin.ok,
                }
                for margin in self.margins
            ],
            columns=['k', 'ratio_minus_iota', 'lower_bound', 'upper_bound', 'ok'],
        )

    def summary(self) -> dict:
        return {
            'x': self.x,
            'epsilon': self.epsilon,
            'k_min': self.k_min,
            'k_max': self.k_max,
            'iota': self.iota_value,
            'observed_k0': self.observed_k0 if self.found else "not found",
            'strictly_below': self.strictly_below,
            'improved_bound_holds': self.improved_bound_holds,
        }


def sandwich_bounds(x: float, epsilon: float, k: int):
    """(lower, upper) for iota_k(x) - iota(x) at index k."""
    lower = -math.exp((1.0 / 3.0 + epsilon) * x) * math.pi / (4.0 * k)
    upper = -(1.0 - epsilon) * math.pi / (4.0 * k)
    return lower, upper


def verify_sandwich(x: float, epsilon: float, k_min: int, k_max: int,
                    workers: Optional[int] = None) -> SandwichReport:
    """Scan k in [k_min, k_max] and locate the smallest k0 after which both bounds hold."""
    x = Validator.validate_positive("x", x)
    if not 0 < epsilon < 1:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    ks = Validator.validate_index_range(k_min, k_max)

    limit = iota(x).iota
    logger.info(f"Sandwich scan: x={x}, eps={epsilon}, k in [{k_min}, {k_max}], iota={limit:.15g}")

    # orders x*k are used as they are, without rounding
    with ThreadPoolExecutor(max_workers=workers) as pool:
        ratios = list(pool.map(lambda k: iota_k(x, k), ks))

    report = SandwichReport(x=x, epsilon=epsilon, k_min=k_min, k_max=k_max, iota_value=limit)
    for k, ratio in zip(ks, ratios):
        lower, upper = sandwich_bounds(x, epsilon, k)
        report.margins.append(SandwichMargin(k, ratio - limit, lower, upper))

    report.strictly_below = all(margin.ratio_minus_iota < 0 for margin in report.margins)

    k0 = None
    for margin in reversed(report.margins):
        if not margin.ok:
            break
        k0 = margin.k
    report.observed_k0 = k0

    if k0 is not None:
        # j_{xk,k} < k iota(x) - (1 - eps) pi / 4 on the tail
        report.improved_bound_holds = all(
            k * (limit + margin.ratio_minus_iota) < k * limit - (1.0 - epsilon) * math.pi / 4.0
            for k, margin in zip(ks, report.margins) if k >= k0
        )

    logger.info("="*70)
    logger.info("SANDWICH SCAN SUMMARY")
    logger.info("="*70)
    if k0 is None:
        logger.warning(f"No k0 found in [{k_min}, {k_max}]")
    else:
        logger.info(f"Observed k0: {k0}")
    failures = sum(1 for margin in report.margins if not margin.ok)
    logger.info(f"Indices outside the bounds: {failures}")
    if not report.strictly_below:
        logger.warning("iota_k(x) >= iota(x) somewhere in the window")
    logger.info("="*70)

    return report


def admissible_sigma_condition(m: int, n: int) -> float:
    """sqrt(1/n^2 + pi^2/m^2) - pi (1/(2n) + exp(m/(3n))/4); positive when sigma = m/n qualifies."""
    m = Validator.validate_index(m)
    n = Validator.validate_index(n)
    return math.sqrt(1.0 / n ** 2 + math.pi ** 2 / m ** 2) - math.pi * (
        1.0 / (2.0 * n) + math.exp(m / (3.0 * n)) / 4.0
    )
