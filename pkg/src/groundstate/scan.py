"""
Nonradiality scan for the Rotating Wave Toolkit.

Compares the ground state level c_{alpha,m} (or its eigenvalue upper bound)
with the radial level beta_m^rad along a grid of masses. The bound grows
like m^{p/(2(p-2))}, the radial level like m^{2/(p-2)}, so for p < 4 the
ground state stops being radial once m is large.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import pandas as pd

from ..utils.logger import get_logger
from ..utils.validators import NumericError, ValidationError, Validator
from .nehari import DEFAULT_J_CUT, NehariResult, ground_state, upper_bound_c
from .radial import radial_ground_state

logger = get_logger()

COLUMNS = ['m', 'upper_bound', 'lambda_min', 'beta_rad', 'ground_energy', 'nonradial_fraction', 'crossover']


@dataclass
class ScanRow:
    m: float
    upper_bound: float
    lambda_min: float
    argmin: tuple
    beta_rad: float
    ground_energy: Optional[float] = None
    nonradial_fraction: Optional[float] = None

    @property
    def level(self) -> float:
        """Best available estimate of c_{alpha,m}."""
        return self.ground_energy if self.ground_energy is not None else self.upper_bound

    @property
    def crossover(self) -> bool:
        return self.level < self.beta_rad


@dataclass
class ScanReport:
    alpha: float
    p: float
    rows: List[ScanRow] = None
    crossover_m: Optional[float] = None
    crossover_state: Optional[NehariResult] = None

    def __post_init__(self):
        if self.rows is None:
            self.rows = []

    @property
    def predicted_exponents(self) -> dict:
        return {
            'upper_bound': self.p / (2.0 * (self.p - 2.0)),
            'radial': 2.0 / (self.p - 2.0),
        }

    def fitted_exponent(self, column: str) -> Optional[float]:
        """Least-squares log-log slope of a column against m over the positive masses."""
        frame = self.to_frame()
        frame = frame[(frame['m'] > 0) & frame[column].notna()]
        if len(frame) < 2:
            return None
        slope, _ = np.polyfit(np.log(frame['m'].astype(float)), np.log(frame[column].astype(float)), 1)
        return float(slope)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    'm': row.m,
                    'upper_bound': row.upper_bound,
                    'lambda_min': row.lambda_min,
                    'beta_rad': row.beta_rad,
                    'ground_energy': row.ground_energy,
                    'nonradial_fraction': row.nonradial_fraction,
                    'crossover': row.crossover,
                }
                for row in self.rows
            ],
            columns=COLUMNS,
        )

    def summary(self) -> dict:
        return {
            'alpha': self.alpha,
            'p': self.p,
            'crossover_m': self.crossover_m,
            'nonradial_energy_fraction': (
                self.crossover_state.nonradial_energy_fraction if self.crossover_state is not None else None
            ),
            'fitted_exponents': {
                'upper_bound': self.fitted_exponent('upper_bound'),
                'radial': self.fitted_exponent('beta_rad'),
            },
            'predicted_exponents': self.predicted_exponents,
        }


def nonradiality_scan(alpha: float, p: float, m_grid: List[float], solve: bool = False,
                      solve_crossover: bool = True, j_cut: float = DEFAULT_J_CUT,
                      starts: int = 10) -> ScanReport:
    """Radial level against c_{alpha,m} (or its bound) for every m of the grid."""
    p = Validator.validate_exponent(p)
    masses = sorted(Validator.validate_all(lambda m: Validator.validate_positive("m", m, strict=False), m_grid))
    if not masses:
        raise ValidationError("Mass grid is empty")

    logger.info(f"Nonradiality scan: alpha={alpha}, p={p}, m in {masses}, ground states {'on' if solve else 'off'}")
    report = ScanReport(alpha=alpha, p=p)

    for m in masses:
        bound = upper_bound_c(alpha, m, p)
        radial = radial_ground_state(m, p)
        row = ScanRow(
            m=m,
            upper_bound=bound.value,
            lambda_min=bound.lam_min,
            argmin=(bound.ell, bound.k),
            beta_rad=radial.beta_rad,
        )
        if solve:
            state = ground_state(alpha, m, p, j_cut=j_cut, starts=starts)
            row.ground_energy = state.energy
            row.nonradial_fraction = state.nonradial_energy_fraction
            if report.crossover_m is None and row.crossover:
                report.crossover_state = state
        logger.debug(f"m={m}: bound={row.upper_bound:.6g}, beta_rad={row.beta_rad:.6g}, level={row.level:.6g}")
        report.rows.append(row)
        if report.crossover_m is None and row.crossover:
            report.crossover_m = m

    if report.crossover_m is not None and report.crossover_state is None and solve_crossover:
        try:
            report.crossover_state = ground_state(alpha, report.crossover_m, p, j_cut=j_cut, starts=starts)
        except NumericError as e:
            logger.error(f"Ground state at the crossover failed: {str(e)}")

    logger.info("="*70)
    logger.info("NONRADIALITY SCAN SUMMARY")
    logger.info("="*70)
    for row in report.rows:
        marker = "  <- c below beta_rad" if row.crossover else ""
        logger.info(f"m={row.m:<10g} level={row.level:<16.8g} beta_rad={row.beta_rad:<16.8g}{marker}")
    if report.crossover_m is None:
        logger.warning("No crossover within the grid")
    else:
        logger.info(f"Crossover at m={report.crossover_m}")
        if report.crossover_state is not None:
            logger.info(f"Nonradial energy fraction there: {report.crossover_state.nonradial_energy_fraction:.4f}")
    predicted = report.predicted_exponents
    logger.info(f"Predicted growth exponents: bound {predicted['upper_bound']:.4f}, radial {predicted['radial']:.4f}")
    logger.info("="*70)
    return report
