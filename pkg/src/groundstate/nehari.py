"""
Generalized Nehari ground states for the Rotating Wave Toolkit.

Phi(u) = 1/2 (||u+||^2 - ||u-||^2) - 1/p \\int_B |u|^p is strongly indefinite:
its quadratic part is negative on F = E^0 + E^-. The ground state level is
computed as a minimax, an inner maximum over R+ u + F followed by an outer
minimum over directions u on the unit sphere of E^+.

Coordinates are scaled so the quadratic part is the identity: a coefficient
c_i is stored as y_i / sqrt(|lambda_i|) (y_i itself on the kernel).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import optimize

from ..specfun.bessel import bessel_j_zeros, bessel_j_zeros_below
from ..spectrum.window import KERNEL_TOL, NEGATIVE, POSITIVE, classify
from ..utils.logger import get_logger
from ..utils.validators import ConfigurationError, NumericError, ValidationError, Validator
from .basis import DiskQuadrature, GalerkinBasis, assemble_basis

logger = get_logger()

DEFAULT_J_CUT = 60.0
INNER_GTOL = 1.0e-8
INNER_MAX_ITERATIONS = 500
KKT_TOLERANCE = 1.0e-6
DOUBLING_TOLERANCE = 1.0e-6
MAX_REFINEMENTS = 2
DEFAULT_STARTS = 10
SCREEN_ITERATIONS = 20
OUTER_MAX_ITERATIONS = 300
OUTER_FTOL = 1.0e-13
OUTER_GTOL = 1.0e-9


def level_prefactor(p: float) -> float:
    return 0.5 - 1.0 / p


@dataclass
class InnerMaximum:
    """Maximiser of Phi on R+ u + F for one E+ direction u."""
    t: float
    coefficients: np.ndarray
    value: float
    gradient_norm: float
    iterations: int
    coercivity_radius: float
    scaled: np.ndarray = field(default=None, repr=False)


@dataclass
class NehariResult:
    """Computed ground state on a truncated basis."""
    alpha: float
    m: float
    p: float
    j_cut: float
    coefficients: np.ndarray
    energy: float
    kkt_residual: float
    nonradial_energy_fraction: float
    converged: bool
    stationarity: float = float('nan')
    upper_bound: float = float('nan')
    quadrature_discrepancy: float = 0.0
    iterations: int = 0
    start_energies: List[float] = None
    error_message: str = ""
    basis: Optional[GalerkinBasis] = field(default=None, repr=False)

    def __post_init__(self):
        if self.start_energies is None:
            self.start_energies = []

    @property
    def plus_norm(self) -> float:
        """||u+||, nonzero for any point of the Nehari set."""
        plus = self.basis.plus
        return math.sqrt(float(np.dot(self.basis.weights[plus], self.coefficients[plus] ** 2)))

    def to_dict(self) -> dict:
        return {
            'alpha': self.alpha,
            'm': self.m,
            'p': self.p,
            'j_cut': self.j_cut,
            'energy': self.energy,
            'kkt_residual': self.kkt_residual,
            'stationarity': self.stationarity,
            'nonradial_energy_fraction': self.nonradial_energy_fraction,
            'upper_bound': self.upper_bound,
            'converged': self.converged,
            'coefficients': self.basis.coefficient_table(self.coefficients) if self.basis is not None else [],
        }


def nonradial_energy_fraction(basis: GalerkinBasis, coeffs: np.ndarray) -> float:
    """Share of ||u||^2_{alpha,m} carried by the l >= 1 entries."""
    weighted = basis.weights * coeffs * coeffs
    total = float(weighted.sum())
    if total == 0:
        return 0.0
    return float(weighted[basis.ell >= 1].sum()) / total


class NehariFunctional:
    """Phi on a Galerkin basis with its inner maximum and reduced energy."""

    def __init__(self, basis: GalerkinBasis, p: float, quadrature: Optional[DiskQuadrature] = None):
        self.basis = basis
        self.p = Validator.validate_exponent(p)
        self.quadrature = quadrature or DiskQuadrature(basis)
        self.plus = basis.plus
        self.f_space = basis.f_space
        self.scale = 1.0 / np.sqrt(basis.weights)
        self.curvature = basis.quadratic_signs * basis.weights
        self.negative = (basis.sign_class[self.f_space] == NEGATIVE).astype(float)

    # ------------------------------------------------------------------
    # Phi and its derivative
    # ------------------------------------------------------------------

    def nonlinear_projection(self, coeffs: np.ndarray) -> np.ndarray:
        """(\\int_B |u|^{p-2} u phi_i)_i."""
        values = self.quadrature.evaluate(coeffs)
        return self.quadrature.project(np.abs(values) ** (self.p - 2.0) * values)

    def energy(self, coeffs: np.ndarray) -> float:
        quadratic = 0.5 * float(np.dot(self.curvature, coeffs * coeffs))
        return quadratic - self.quadrature.lp_power(coeffs, self.p) / self.p

    def derivative(self, coeffs: np.ndarray) -> np.ndarray:
        """Phi'(u) phi_i for every basis entry."""
        return self.curvature * coeffs - self.nonlinear_projection(coeffs)

    def kkt_residual(self, coeffs: np.ndarray) -> float:
        """max(|Phi'(u)u| / ||u||^2, sup over F entries of |Phi'(u)v| / (||v|| ||u||))."""
        norm_sq = self.basis.e_norm_squared(coeffs)
        if norm_sq == 0:
            return float('inf')
        gradient = self.derivative(coeffs)
        nehari = abs(float(np.dot(gradient, coeffs))) / norm_sq
        if not self.f_space.size:
            return nehari
        directional = np.abs(gradient[self.f_space]) * self.scale[self.f_space]
        return max(nehari, float(directional.max()) / math.sqrt(norm_sq))

    def stationarity(self, coeffs: np.ndarray) -> float:
        """sup over all entries of |Phi'(u)v| / (||v|| ||u||)."""
        norm_sq = self.basis.e_norm_squared(coeffs)
        gradient = self.derivative(coeffs) * self.scale
        return float(np.abs(gradient).max()) / math.sqrt(norm_sq)

    # ------------------------------------------------------------------
    # inner maximum over R+ u + F
    # ------------------------------------------------------------------

    def _unit_direction(self, direction: np.ndarray) -> np.ndarray:
        direction = np.asarray(direction, dtype=float)
        if direction.shape != (self.plus.size,):
            raise ValidationError(f"Direction must have {self.plus.size} E+ components, got shape {direction.shape}")
        norm = float(np.linalg.norm(direction))
        if norm == 0 or not math.isfinite(norm):
            raise ValidationError("Direction must be a nonzero finite vector")
        return direction / norm

    def _coefficients(self, direction: np.ndarray, x: np.ndarray) -> np.ndarray:
        coeffs = np.zeros(len(self.basis))
        coeffs[self.plus] = self.scale[self.plus] * direction * x[0]
        coeffs[self.f_space] = self.scale[self.f_space] * x[1:]
        return coeffs

    def coercivity_radius(self, direction: np.ndarray) -> float:
        """R with Phi(tu + w) <= 0 once t >= R (Hoelder on the disk, u orthogonal to F in L^2)."""
        direction = self._unit_direction(direction)
        l2_sq = float(np.sum((self.scale[self.plus] * direction) ** 2))
        p = self.p
        return (0.5 * p * math.pi ** (0.5 * p - 1.0) / l2_sq ** (0.5 * p)) ** (1.0 / (p - 2.0))

    def inner_maximize(self, direction: np.ndarray, start: Optional[np.ndarray] = None) -> InnerMaximum:
        """The unique maximiser of Phi on {tu + w : t >= 0, w in F}."""
        direction = self._unit_direction(direction)
        p = self.p
        radius = self.coercivity_radius(direction)
        pure = self._coefficients(direction, np.concatenate([[1.0], np.zeros(self.f_space.size)]))
        t0 = (1.0 / self.quadrature.lp_power(pure, p)) ** (1.0 / (p - 2.0))

        if not self.f_space.size:
            return InnerMaximum(
                t=t0, coefficients=t0 * pure, value=level_prefactor(p) * t0 * t0,
                gradient_norm=0.0, iterations=0, coercivity_radius=radius, scaled=np.array([t0]),
            )

        plus_scale = self.scale[self.plus] * direction
        f_scale = self.scale[self.f_space]
        negative = self.negative
        quadrature = self.quadrature
        cache = {}

        def nodal(x):
            key = x.tobytes()
            if cache.get('key') != key:
                values = quadrature.evaluate(self._coefficients(direction, x))
                magnitude = np.abs(values)
                cache.update(key=key, values=values, power=magnitude ** (p - 2.0),
                             lp=quadrature.integrate(magnitude ** p))
            return cache

        def objective(x):
            state = nodal(x)
            projection = quadrature.project(state['power'] * state['values'])
            t, y = x[0], x[1:]
            value = -0.5 * t * t + 0.5 * float(np.dot(negative * y, y)) + state['lp'] / p
            gradient = np.concatenate((
                [-t + float(np.dot(plus_scale, projection[self.plus]))],
                negative * y + f_scale * projection[self.f_space],
            ))
            return value, gradient

        def hessp(x, v):
            state = nodal(x)
            change = quadrature.evaluate(self._coefficients(direction, v))
            curvature = (p - 1.0) * quadrature.project(state['power'] * change)
            return np.concatenate((
                [-v[0] + float(np.dot(plus_scale, curvature[self.plus]))],
                negative * v[1:] + f_scale * curvature[self.f_space],
            ))

        x0 = np.concatenate([[t0], np.zeros(self.f_space.size)]) if start is None else np.array(start, dtype=float)
        gtol = INNER_GTOL * max(1.0, t0)
        result = optimize.minimize(
            objective, x0, method='trust-krylov', jac=True, hessp=hessp,
            options={
                'gtol': gtol,
                'maxiter': INNER_MAX_ITERATIONS,
                'initial_trust_radius': max(1.0, 0.25 * t0),
                'max_trust_radius': 10.0 * max(radius, t0),
            },
        )
        x = result.x if result.x[0] >= 0 else -result.x
        value, gradient = objective(x)
        gradient_norm = float(np.linalg.norm(gradient))
        value = -value

        if x[0] <= 0 or value <= 0 or gradient_norm > 10.0 * gtol:
            raise NumericError(
                "Inner maximum on R+u + F not found",
                {
                    't': float(x[0]),
                    'value': value,
                    'gradient_norm': gradient_norm,
                    'coercivity_radius': radius,
                    'iterations': int(result.nit),
                },
            )
        return InnerMaximum(
            t=float(x[0]),
            coefficients=self._coefficients(direction, x),
            value=value,
            gradient_norm=gradient_norm,
            iterations=int(result.nit),
            coercivity_radius=radius,
            scaled=x,
        )

    def inner_multistart(self, direction: np.ndarray, starts: int = 5, seed: int = 0) -> List[InnerMaximum]:
        """Inner maxima from random points of the coercivity ball."""
        direction = self._unit_direction(direction)
        radius = self.coercivity_radius(direction)
        rng = np.random.default_rng(seed)
        results = []
        for _ in range(starts):
            y = rng.standard_normal(self.f_space.size)
            if y.size:
                y *= rng.uniform(0.0, 0.5) * radius / np.linalg.norm(y)
            start = np.concatenate([[rng.uniform(0.2, 0.9) * radius], y])
            results.append(self.inner_maximize(direction, start=start))
        return results

    # ------------------------------------------------------------------
    # outer minimum over the E+ sphere
    # ------------------------------------------------------------------

    def reduced_energy(self, s: np.ndarray, state: dict):
        """Psi(s) = max Phi on R+ s + F with its gradient on the sphere; warm-started from ``state``."""
        norm = float(np.linalg.norm(s))
        direction = self._unit_direction(s)
        try:
            inner = self.inner_maximize(direction, start=state.get('x'))
        except NumericError:
            if state.get('x') is None:
                raise
            inner = self.inner_maximize(direction)
        state['x'] = inner.scaled
        state['inner'] = inner
        pulled = self.scale[self.plus] * self.nonlinear_projection(inner.coefficients)[self.plus]
        gradient = (inner.t / norm) * (direction * float(np.dot(direction, pulled)) - pulled)
        return inner.value, gradient

    def descend(self, start: np.ndarray, iterations: int) -> dict:
        """L-BFGS on the normalised reduced energy from one E+ direction."""
        state = {}
        reference = self.reduced_energy(start, state)[0]

        def objective(s):
            value, gradient = self.reduced_energy(s, state)
            return value / reference, gradient / reference

        result = optimize.minimize(
            objective, np.array(start, dtype=float), method='L-BFGS-B', jac=True,
            options={'maxiter': iterations, 'ftol': OUTER_FTOL, 'gtol': OUTER_GTOL},
        )
        value, _ = self.reduced_energy(result.x, state)
        return {
            'value': value,
            's': result.x / np.linalg.norm(result.x),
            'inner': state['inner'],
            'success': bool(result.success),
            'iterations': int(result.nit),
            'message': str(result.message),
        }


def energy(basis: GalerkinBasis, coeffs: np.ndarray, p: float,
           quadrature: Optional[DiskQuadrature] = None, verify: bool = False) -> float:
    """Phi(u); with ``verify`` the L^p term is checked against a doubled quadrature."""
    functional = NehariFunctional(basis, p, quadrature)
    coeffs = np.asarray(coeffs, dtype=float)
    if not verify:
        return functional.energy(coeffs)

    quadrature = functional.quadrature
    for _ in range(MAX_REFINEMENTS):
        finer = quadrature.refined(2)
        coarse_value = quadrature.lp_power(coeffs, p)
        fine_value = finer.lp_power(coeffs, p)
        discrepancy = abs(fine_value - coarse_value) / max(abs(fine_value), np.finfo(float).tiny)
        if discrepancy <= DOUBLING_TOLERANCE:
            return NehariFunctional(basis, p, finer).energy(coeffs)
        logger.warning(f"Quadrature under-resolved (node-doubling discrepancy {discrepancy:.2e}); refining")
        quadrature = finer
    raise NumericError("Quadrature still under-resolved after refinement", {'discrepancy': discrepancy})


def quadrature_discrepancy(functional: NehariFunctional, coeffs: np.ndarray) -> float:
    coarse = functional.quadrature.lp_power(coeffs, functional.p)
    fine = functional.quadrature.refined(2).lp_power(coeffs, functional.p)
    return abs(fine - coarse) / max(abs(fine), np.finfo(float).tiny)


def inner_maximize(basis: GalerkinBasis, direction: np.ndarray, p: float,
                   quadrature: Optional[DiskQuadrature] = None) -> InnerMaximum:
    return NehariFunctional(basis, p, quadrature).inner_maximize(direction)


def basis_upper_bound(basis: GalerkinBasis, p: float) -> float:
    """(1/2 - 1/p) pi (min lambda over the basis' E+)^{p/(p-2)}."""
    lam = float(basis.lam[basis.plus].min())
    return level_prefactor(p) * math.pi * lam ** (p / (p - 2.0))


def ground_state(alpha: float, m: float, p: float, j_cut: float = DEFAULT_J_CUT,
                 kernel_tol: float = KERNEL_TOL, starts: int = DEFAULT_STARTS,
                 screen_iterations: int = SCREEN_ITERATIONS,
                 max_iterations: int = OUTER_MAX_ITERATIONS,
                 tolerance: float = KKT_TOLERANCE, ell_max: Optional[int] = None,
                 workers: Optional[int] = None) -> NehariResult:
    """Minimise the reduced energy over the E+ sphere from the lowest positive modes."""
    p = Validator.validate_exponent(p)
    basis = assemble_basis(alpha, m, j_cut, kernel_tol, ell_max=ell_max)
    functional = NehariFunctional(basis, p)

    logger.info(
        f"Ground state: alpha={alpha}, m={m}, p={p}, j_cut={j_cut}, basis={len(basis)} "
        f"(E+ {basis.plus.size}, F {functional.f_space.size}), quadrature "
        f"{functional.quadrature.n_r}x{functional.quadrature.n_theta}"
    )

    order = np.argsort(basis.lam[basis.plus], kind='stable')[:max(1, starts)]
    seeds = [np.eye(basis.plus.size)[i] for i in order]

    def screen(seed):
        try:
            return functional.descend(seed, screen_iterations)
        except NumericError as e:
            logger.warning(f"Start discarded: {str(e)}")
            return None

    with ThreadPoolExecutor(max_workers=workers) as pool:
        screened = list(pool.map(screen, seeds))
    candidates = [run for run in screened if run is not None]
    if not candidates:
        raise NumericError("Every start of the outer minimisation failed", {'starts': len(seeds)})
    for index, run in zip(order, screened):
        if run is not None:
            logger.debug(f"Start at E+ mode {int(index)}: Psi = {run['value']:.12g} after {run['iterations']} steps")

    best = min(candidates, key=lambda run: run['value'])
    final = functional.descend(best['s'], max_iterations)
    if final['value'] > best['value']:
        final = best

    for refinement in range(MAX_REFINEMENTS + 1):
        discrepancy = quadrature_discrepancy(functional, final['inner'].coefficients)
        if discrepancy <= DOUBLING_TOLERANCE:
            break
        if refinement == MAX_REFINEMENTS:
            raise NumericError(
                "Quadrature still under-resolved after refinement",
                {'discrepancy': discrepancy, 'n_r': functional.quadrature.n_r,
                 'n_theta': functional.quadrature.n_theta},
            )
        logger.warning(f"Node-doubling discrepancy {discrepancy:.2e} exceeds {DOUBLING_TOLERANCE}; refining quadrature")
        functional = NehariFunctional(basis, p, functional.quadrature.refined(2))
        final = functional.descend(final['s'], max_iterations)

    coeffs = final['inner'].coefficients
    kkt = functional.kkt_residual(coeffs)
    result = NehariResult(
        alpha=basis.alpha, m=m, p=p, j_cut=basis.j_cut,
        coefficients=coeffs,
        energy=final['value'],
        kkt_residual=kkt,
        nonradial_energy_fraction=nonradial_energy_fraction(basis, coeffs),
        converged=kkt <= tolerance and final['success'] and discrepancy <= DOUBLING_TOLERANCE,
        stationarity=functional.stationarity(coeffs),
        upper_bound=basis_upper_bound(basis, p),
        quadrature_discrepancy=discrepancy,
        iterations=final['iterations'],
        start_energies=[run['value'] for run in candidates],
        error_message="" if final['success'] else final['message'],
        basis=basis,
    )

    logger.info("="*70)
    logger.info("GROUND STATE SUMMARY")
    logger.info("="*70)
    logger.info(f"Energy: {result.energy:.12g} (upper bound {result.upper_bound:.12g})")
    logger.info(f"KKT residual: {result.kkt_residual:.3e}, stationarity: {result.stationarity:.3e}")
    logger.info(f"Nonradial energy fraction: {result.nonradial_energy_fraction:.4f}")
    logger.info(
        f"Quadrature {functional.quadrature.n_r}x{functional.quadrature.n_theta}, "
        f"node-doubling discrepancy {result.quadrature_discrepancy:.2e}"
    )
    if not result.converged:
        logger.warning(f"Ground state not converged: {result.error_message or 'KKT residual above tolerance'}")
    logger.info("="*70)
    return result


@dataclass
class UpperBound:
    """Level bound from the lowest positive eigenvalue."""
    alpha: float
    m: float
    p: float
    value: float
    lam_min: float
    ell: int
    k: int
    ell_max: int

    def to_dict(self) -> dict:
        return {
            'alpha': self.alpha,
            'm': self.m,
            'p': self.p,
            'upper_bound': self.value,
            'lambda_min': self.lam_min,
            'argmin': [self.ell, self.k],
            'ell_max': self.ell_max,
        }


def default_ell_max(alpha: float, m: float) -> int:
    """Rows past sqrt(m) / sqrt(alpha^2 - 1) cannot lower the positive minimum much."""
    spread = math.sqrt(max(alpha * alpha - 1.0, 1.0))
    return int(math.ceil(2.0 * math.sqrt(abs(m) + 1.0) / spread)) + 20


def min_positive_eigenvalue(alpha: float, m: float, ell_max: Optional[int] = None,
                            kernel_tol: float = KERNEL_TOL):
    """(lambda, l, k) of the smallest eigenvalue in I+ with l <= ell_max."""
    alpha = Validator.validate_velocity(alpha)
    ell_max = default_ell_max(alpha, m) if ell_max is None else ell_max
    Validator.validate_cutoffs(ell_max, 1)

    best = None
    for ell in range(ell_max + 1):
        threshold = (alpha * ell) ** 2 - m
        below = bessel_j_zeros_below(ell, math.sqrt(threshold)).size if threshold > 0 else 0
        zeros = bessel_j_zeros(ell, below + 2)[below:]
        lam = zeros ** 2 - threshold
        positive = np.flatnonzero(classify(lam, zeros, kernel_tol) == POSITIVE)
        if not positive.size:
            continue
        i = int(positive[0])
        if best is None or lam[i] < best[0]:
            best = (float(lam[i]), ell, below + i + 1)
    if best is None:
        raise ConfigurationError(f"I+ is empty for alpha={alpha}, m={m}, ell_max={ell_max}")
    return best


def upper_bound_c(alpha: float, m: float, p: float, ell_max: Optional[int] = None,
                  kernel_tol: float = KERNEL_TOL) -> UpperBound:
    """(1/2 - 1/p) pi (inf over I+ of lambda)^{p/(p-2)}."""
    p = Validator.validate_exponent(p)
    ell_max = default_ell_max(alpha, m) if ell_max is None else ell_max
    lam, ell, k = min_positive_eigenvalue(alpha, m, ell_max, kernel_tol)
    value = level_prefactor(p) * math.pi * lam ** (p / (p - 2.0))
    logger.debug(f"Upper bound at alpha={alpha}, m={m}: lambda_min={lam:.12g} at ({ell}, {k}), c <= {value:.12g}")
    return UpperBound(alpha=alpha, m=m, p=p, value=value, lam_min=lam, ell=ell, k=k, ell_max=ell_max)
