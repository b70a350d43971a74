"""
Eigenvalue enumeration for the Rotating Wave Toolkit.

Dirichlet eigenvalues of L_{alpha,m} = -Laplace + alpha^2 d_theta^2 + m on the
unit disk are lambda = j_{l,k}^2 - alpha^2 l^2 + m. This module enumerates
them on rectangular or windowed cutoffs, classifies them by sign and measures
how far the non-kernel part stays from zero relative to j.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..specfun.bessel import bessel_j_zero, bessel_j_zeros, enclosure_arrays
from ..utils.logger import get_logger
from ..utils.validators import ConfigurationError, ValidationError, Validator
from .alpha import alpha_n, is_admissible

logger = get_logger()

KERNEL_TOL = 1.0e-9

POSITIVE = "positive"
KERNEL = "kernel"
NEGATIVE = "negative"
CLASSES = [POSITIVE, KERNEL, NEGATIVE]

COLUMNS = ['ell', 'k', 'j', 'lambda', 'class']


@dataclass(frozen=True)
class SpectralPoint:
    ell: int
    k: int
    lam: float
    j_value: float
    sign_class: str
    branch: str = ""

    @property
    def multiplicity(self) -> int:
        # cos/sin pair for l >= 1; the shifted operator splits the pair into branches
        if self.branch or self.ell == 0:
            return 1
        return 2


@dataclass
class SpectrumWindow:
    """Enumerated eigenvalues sorted by lambda, with gap statistics."""
    alpha: float
    m: float
    ell_max: int
    k_max: int
    kernel_tol: float
    frame: pd.DataFrame
    mu: Optional[float] = None
    admissible_n: Optional[int] = None
    min_abs_nonkernel: float = math.nan
    min_gap_ratio: float = math.nan
    argmin: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        nonkernel = self.frame[self.frame['class'] != KERNEL]
        if len(nonkernel):
            abs_lam = nonkernel['lambda'].abs().to_numpy()
            ratios = abs_lam / nonkernel['j'].to_numpy()
            pos = int(np.argmin(ratios))
            self.min_abs_nonkernel = float(abs_lam.min())
            self.min_gap_ratio = float(ratios[pos])
            self.argmin = (int(nonkernel['ell'].iloc[pos]), int(nonkernel['k'].iloc[pos]))

    def __len__(self):
        return len(self.frame)

    def points(self) -> Iterator[SpectralPoint]:
        branches = self.frame['branch'] if 'branch' in self.frame else [""] * len(self.frame)
        for (ell, k, j, lam, cls), branch in zip(
            self.frame[COLUMNS].itertuples(index=False, name=None), branches
        ):
            yield SpectralPoint(int(ell), int(k), float(lam), float(j), str(cls), str(branch))

    def count(self, sign_class: str) -> int:
        return int((self.frame['class'] == sign_class).sum())

    @property
    def total_multiplicity(self) -> int:
        """Number of real eigenfunctions represented by the window."""
        if 'branch' in self.frame:
            return len(self.frame)
        return int(np.where(self.frame['ell'].to_numpy() == 0, 1, 2).sum())

    @property
    def lambda_range(self) -> Tuple[float, float]:
        if not len(self.frame):
            return (math.nan, math.nan)
        return float(self.frame['lambda'].iloc[0]), float(self.frame['lambda'].iloc[-1])

    def summary(self) -> dict:
        return {
            'alpha': self.alpha,
            'm': self.m,
            'mu': self.mu,
            'cutoffs': {'ell_max': self.ell_max, 'k_max': self.k_max},
            'kernel_tol': self.kernel_tol,
            'admissible_n': self.admissible_n,
            'points': len(self.frame),
            'positive': self.count(POSITIVE),
            'kernel': self.count(KERNEL),
            'negative': self.count(NEGATIVE),
            'min_abs_nonkernel': self.min_abs_nonkernel,
            'min_gap_ratio': self.min_gap_ratio,
            'argmin': list(self.argmin) if self.argmin else None,
        }


def classify(lam: np.ndarray, j: np.ndarray, kernel_tol: float = KERNEL_TOL) -> np.ndarray:
    """Sign class per eigenvalue; kernel iff |lambda| <= kernel_tol * j."""
    lam = np.asarray(lam, dtype=float)
    j = np.asarray(j, dtype=float)
    return np.where(np.abs(lam) <= kernel_tol * j, KERNEL, np.where(lam > 0, POSITIVE, NEGATIVE))


def _check_alpha(alpha: float) -> Optional[int]:
    alpha = Validator.validate_velocity(alpha)
    n = is_admissible(alpha)
    if n is None:
        logger.warning(f"alpha={alpha} is not an admissible velocity alpha_n: no gap guarantee")
    return n


def _rows(ell_max: int, k_max: int, workers: Optional[int]) -> List[np.ndarray]:
    # merged in l order regardless of completion order
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ell: bessel_j_zeros(ell, k_max), range(ell_max + 1)))


def _build_frame(ell, k, j, lam, kernel_tol, branch=None) -> pd.DataFrame:
    data = {
        'ell': ell.astype(int),
        'k': k.astype(int),
        'j': j,
        'lambda': lam,
        'class': pd.Categorical(classify(lam, j, kernel_tol), categories=CLASSES),
    }
    if branch is not None:
        data['branch'] = branch
    frame = pd.DataFrame(data)
    order = np.argsort(lam, kind='stable')
    return frame.iloc[order].reset_index(drop=True)


def enumerate_spectrum(alpha: float, m: float, ell_max: int, k_max: int,
                       kernel_tol: float = KERNEL_TOL,
                       workers: Optional[int] = None) -> SpectrumWindow:
    """All lambda = j_{l,k}^2 - alpha^2 l^2 + m for l <= ell_max, k <= k_max."""
    Validator.validate_cutoffs(ell_max, k_max)
    admissible = _check_alpha(alpha)
    logger.info(f"Enumerating spectrum: alpha={alpha}, m={m}, cutoffs {ell_max}x{k_max}")

    rows = _rows(ell_max, k_max, workers)
    j = np.concatenate(rows)
    ell = np.repeat(np.arange(ell_max + 1), k_max)
    k = np.tile(np.arange(1, k_max + 1), ell_max + 1)
    lam = j * j - (alpha * ell) ** 2 + m

    window = SpectrumWindow(
        alpha=alpha, m=m, ell_max=ell_max, k_max=k_max, kernel_tol=kernel_tol,
        frame=_build_frame(ell, k, j, lam, kernel_tol), admissible_n=admissible,
    )
    logger.debug(
        f"Spectrum window: {len(window)} points, min |lambda|={window.min_abs_nonkernel:.6g}, "
        f"min |lambda|/j={window.min_gap_ratio:.6g} at {window.argmin}"
    )
    return window


@dataclass
class GapEstimate:
    """Empirical gap constant with its provenance; not a proven bound."""
    alpha: float
    m: float
    ell_max: int
    k_max: int
    c_estimate: float
    argmin: Tuple[int, int]
    admissible_n: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            'alpha': self.alpha,
            'm': self.m,
            'ell_max': self.ell_max,
            'k_max': self.k_max,
            'c_estimate': self.c_estimate,
            'argmin': list(self.argmin),
            'admissible_n': self.admissible_n,
        }


def gap_constant(alpha: float, m: float, ell_max: int, k_max: int,
                 kernel_tol: float = KERNEL_TOL,
                 workers: Optional[int] = None) -> GapEstimate:
    """min over non-kernel (l, k) of |lambda| / j_{l,k}."""
    window = enumerate_spectrum(alpha, m, ell_max, k_max, kernel_tol, workers)
    if window.argmin is None:
        raise ConfigurationError(f"No non-kernel eigenvalue within cutoffs {ell_max}x{k_max}")
    return GapEstimate(
        alpha=alpha, m=m, ell_max=ell_max, k_max=k_max,
        c_estimate=window.min_gap_ratio, argmin=window.argmin,
        admissible_n=window.admissible_n,
    )


def linear_gap(window: SpectrumWindow) -> Tuple[float, Tuple[int, int]]:
    """min |j_{l,k} - alpha l| over the non-kernel points of a window."""
    frame = window.frame[window.frame['class'] != KERNEL]
    if not len(frame):
        raise ConfigurationError("Window has no non-kernel points")
    gaps = np.abs(frame['j'].to_numpy() - window.alpha * frame['ell'].to_numpy())
    pos = int(np.argmin(gaps))
    return float(gaps[pos]), (int(frame['ell'].iloc[pos]), int(frame['k'].iloc[pos]))


def mu_n(n: int, ell_max: int, k_max: int, workers: Optional[int] = None) -> float:
    """mu_n = (1 + alpha_n) / 2 * c_n with c_n the empirical linear gap at m = 0."""
    alpha = alpha_n(n).alpha
    window = enumerate_spectrum(alpha, 0.0, ell_max, k_max, workers=workers)
    c, argmin = linear_gap(window)
    logger.debug(f"Linear gap for n={n}: {c:.6g} at {argmin}")
    return 0.5 * (1.0 + alpha) * c


def shifted_spectrum(alpha: float, m: float, mu: float, ell_max: int, k_max: int,
                     kernel_tol: float = KERNEL_TOL,
                     workers: Optional[int] = None) -> SpectrumWindow:
    """Eigenvalues j^2 - alpha^2 l^2 +- 2 mu l + (m - mu^2) of the shifted operator."""
    Validator.validate_cutoffs(ell_max, k_max)
    admissible = _check_alpha(alpha)
    logger.info(f"Enumerating shifted spectrum: alpha={alpha}, m={m}, mu={mu}, cutoffs {ell_max}x{k_max}")

    rows = _rows(ell_max, k_max, workers)
    base_j = np.concatenate(rows)
    base_ell = np.repeat(np.arange(ell_max + 1), k_max)
    base_k = np.tile(np.arange(1, k_max + 1), ell_max + 1)

    # l = 0 carries a single eigenfunction, l >= 1 one per branch
    upper = base_ell > 0
    ell = np.concatenate([base_ell, base_ell[upper]])
    k = np.concatenate([base_k, base_k[upper]])
    j = np.concatenate([base_j, base_j[upper]])
    sign = np.concatenate([np.where(upper, 1.0, 0.0), -np.ones(int(upper.sum()))])
    branch = np.where(sign > 0, "+", np.where(sign < 0, "-", "0"))

    lam = j * j - (alpha * ell) ** 2 + sign * 2.0 * mu * ell + (m - mu * mu)
    return SpectrumWindow(
        alpha=alpha, m=m, ell_max=ell_max, k_max=k_max, kernel_tol=kernel_tol,
        frame=_build_frame(ell, k, j, lam, kernel_tol, branch=branch),
        mu=mu, admissible_n=admissible,
    )


@dataclass(frozen=True)
class RatioBound:
    lower: float
    value: float
    upper: float

    @property
    def holds(self) -> bool:
        return self.lower < self.value < self.upper


def ratio_bound_check(alpha: float, ell: int, k: int) -> RatioBound:
    """Closed-form bracket around j_{l,k}/l - alpha together with the computed value."""
    if int(ell) != ell or ell < 1:
        raise ValidationError(f"ell must be a positive integer, got {ell}")
    lower, upper = enclosure_arrays(float(ell), k)
    value = bessel_j_zero(float(ell), k).value / ell - alpha
    return RatioBound(float(lower) / ell - alpha, value, float(upper) / ell - alpha)


def spectrum_in_window(alpha: float, m: float, lam_lo: float, lam_hi: float,
                       ell_max: int, k_max: int,
                       kernel_tol: float = KERNEL_TOL) -> SpectrumWindow:
    """Eigenvalues in [lam_lo, lam_hi]; rows and indices that provably miss the window are skipped."""
    Validator.validate_cutoffs(ell_max, k_max)
    if lam_hi < lam_lo:
        raise ValidationError(f"Empty window [{lam_lo}, {lam_hi}]")
    admissible = _check_alpha(alpha)

    ks = np.arange(1, k_max + 1)
    parts = []
    skipped = 0
    for ell in range(ell_max + 1):
        if ell == 0:
            j_lo = np.pi * ks - np.pi / 4.0
            j_hi = j_lo + 1.0 / (8.0 * np.pi * (ks - 0.25))
        else:
            j_lo, j_hi = enclosure_arrays(float(ell), ks)
        shift = m - (alpha * ell) ** 2
        candidate = (j_hi ** 2 + shift >= lam_lo) & (j_lo ** 2 + shift <= lam_hi)
        if not candidate.any():
            skipped += 1
            continue
        last = int(ks[candidate].max())
        j = np.asarray(bessel_j_zeros(ell, last))
        lam = j * j + shift
        inside = (lam >= lam_lo) & (lam <= lam_hi)
        if inside.any():
            parts.append((np.full(int(inside.sum()), ell), ks[:last][inside], j[inside], lam[inside]))

    logger.debug(f"Window query skipped {skipped} of {ell_max + 1} rows")
    if parts:
        ell, k, j, lam = (np.concatenate(column) for column in zip(*parts))
    else:
        ell = k = np.empty(0, dtype=int)
        j = lam = np.empty(0)
    return SpectrumWindow(
        alpha=alpha, m=m, ell_max=ell_max, k_max=k_max, kernel_tol=kernel_tol,
        frame=_build_frame(ell, k, j, lam, kernel_tol), admissible_n=admissible,
    )
