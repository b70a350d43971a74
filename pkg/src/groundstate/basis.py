"""
Galerkin basis and disk quadrature for the Rotating Wave Toolkit.

The basis consists of the L^2-normalised Dirichlet eigenfunctions
    A cos(l theta) J_l(j_{l,k} r),   A sin(l theta) J_l(j_{l,k} r)
with j_{l,k} <= j_cut. They diagonalise L_{alpha,m}, so quadratic forms are
computed from eigenvalues alone; only the nonlinearity needs quadrature.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import special

from ..specfun.bessel import bessel_j_zeros_below
from ..spectrum.alpha import is_admissible
from ..spectrum.window import KERNEL, KERNEL_TOL, NEGATIVE, POSITIVE, classify
from ..utils.logger import get_logger
from ..utils.validators import ConfigurationError, DomainError, ValidationError, Validator

logger = get_logger()

COS = 0
SIN = 1
PARITY_NAMES = {COS: "cos", SIN: "sin"}

FIRST_ZERO = 2.404825557695773


@dataclass
class GalerkinBasis:
    """Truncated eigenbasis of L_{alpha,m}, entries grouped by angular mode."""
    alpha: float
    m: float
    j_cut: float
    kernel_tol: float
    ell: np.ndarray
    k: np.ndarray
    parity: np.ndarray
    j: np.ndarray
    lam: np.ndarray
    norm: np.ndarray
    sign_class: np.ndarray
    modes: List[Tuple[int, int]]
    mode_of: np.ndarray
    block_starts: np.ndarray
    admissible_n: Optional[int] = None
    partition: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.partition = {
            'plus': np.flatnonzero(self.sign_class == POSITIVE),
            'zero': np.flatnonzero(self.sign_class == KERNEL),
            'minus': np.flatnonzero(self.sign_class == NEGATIVE),
        }

    def __len__(self):
        return len(self.j)

    @property
    def ell_max(self) -> int:
        return int(self.ell.max())

    @property
    def plus(self) -> np.ndarray:
        return self.partition['plus']

    @property
    def f_space(self) -> np.ndarray:
        """Indices spanning F = E^0 + E^-, in basis order."""
        return np.sort(np.concatenate([self.partition['zero'], self.partition['minus']]))

    @property
    def weights(self) -> np.ndarray:
        """Diagonal of the E_{alpha,m} scalar product: |lambda| off the kernel, 1 on it."""
        return np.where(self.sign_class == KERNEL, 1.0, np.abs(self.lam))

    @property
    def quadratic_signs(self) -> np.ndarray:
        """+1 on E^+, -1 on E^-, 0 on E^0."""
        return np.where(self.sign_class == POSITIVE, 1.0, np.where(self.sign_class == NEGATIVE, -1.0, 0.0))

    def e_norm_squared(self, coeffs: np.ndarray) -> float:
        return float(np.dot(self.weights, coeffs * coeffs))

    def quadratic_form(self, coeffs: np.ndarray) -> float:
        """||u+||^2 - ||u-||^2 = sum lambda_i c_i^2."""
        return float(np.dot(self.lam, coeffs * coeffs))

    def index_of(self, ell: int, k: int, parity: int = COS) -> int:
        hits = np.flatnonzero((self.ell == ell) & (self.k == k) & (self.parity == parity))
        if not hits.size:
            raise KeyError(f"({ell}, {k}, {PARITY_NAMES.get(parity, parity)}) is not in the basis")
        return int(hits[0])

    def radial_values(self, r: np.ndarray) -> np.ndarray:
        """A_i J_{l_i}(j_i r) for every entry, shape (len(r), len(basis))."""
        r = np.asarray(r, dtype=float)
        return self.norm * special.jv(self.ell, np.outer(r, self.j))

    def angular_values(self, theta: np.ndarray) -> np.ndarray:
        """cos(l theta) / sin(l theta) per angular mode, shape (n_modes, len(theta))."""
        theta = np.asarray(theta, dtype=float)
        rows = []
        for ell, parity in self.modes:
            rows.append(np.cos(ell * theta) if parity == COS else np.sin(ell * theta))
        return np.array(rows)

    def evaluate(self, coeffs: np.ndarray, r: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """u on the tensor grid r x theta."""
        radial = np.add.reduceat(self.radial_values(r) * coeffs, self.block_starts, axis=1)
        return radial @ self.angular_values(theta)

    def coefficient_table(self, coeffs: np.ndarray) -> list:
        return [
            [int(ell), int(k), PARITY_NAMES[int(parity)], float(value)]
            for ell, k, parity, value in zip(self.ell, self.k, self.parity, coeffs)
        ]

    def summary(self) -> dict:
        return {
            'alpha': self.alpha,
            'm': self.m,
            'j_cut': self.j_cut,
            'size': len(self),
            'ell_max': self.ell_max,
            'plus': int(self.partition['plus'].size),
            'zero': int(self.partition['zero'].size),
            'minus': int(self.partition['minus'].size),
            'admissible_n': self.admissible_n,
        }


def assemble_basis(alpha: float, m: float, j_cut: float,
                   kernel_tol: float = KERNEL_TOL,
                   ell_max: Optional[int] = None) -> GalerkinBasis:
    """Every (l, k, parity) with j_{l,k} <= j_cut, optionally restricted to l <= ell_max."""
    alpha = Validator.validate_velocity(alpha)
    j_cut = Validator.validate_argument(j_cut)
    if j_cut <= FIRST_ZERO:
        raise ConfigurationError(f"j_cut={j_cut} must exceed the first zero j_(0,1) = {FIRST_ZERO}")
    admissible = is_admissible(alpha)
    if admissible is None:
        logger.warning(f"alpha={alpha} is not an admissible velocity alpha_n: no gap guarantee")

    ell_list, k_list, parity_list, j_list = [], [], [], []
    modes, block_starts = [], []
    ell = 0
    while ell_max is None or ell <= ell_max:
        zeros = bessel_j_zeros_below(ell, j_cut)
        if not zeros.size:
            break
        for parity in ((COS,) if ell == 0 else (COS, SIN)):
            block_starts.append(len(j_list))
            modes.append((ell, parity))
            ell_list.extend([ell] * zeros.size)
            k_list.extend(range(1, zeros.size + 1))
            parity_list.extend([parity] * zeros.size)
            j_list.extend(zeros.tolist())
        ell += 1

    ell_arr = np.array(ell_list, dtype=int)
    j_arr = np.array(j_list)
    lam = j_arr ** 2 - (alpha * ell_arr) ** 2 + m
    # ||A J_l(j r) cos(l theta)||_2 = 1 via int_0^1 J_l(j r)^2 r dr = J_{l+1}(j)^2 / 2
    jnext = np.abs(special.jv(ell_arr + 1, j_arr))
    norm = np.where(ell_arr == 0, 1.0 / (math.sqrt(math.pi) * jnext), math.sqrt(2.0 / math.pi) / jnext)

    mode_of = np.repeat(np.arange(len(modes)), np.diff(np.append(block_starts, len(j_arr))))

    basis = GalerkinBasis(
        alpha=alpha, m=m, j_cut=j_cut, kernel_tol=kernel_tol,
        ell=ell_arr, k=np.array(k_list, dtype=int), parity=np.array(parity_list, dtype=int),
        j=j_arr, lam=lam, norm=norm, sign_class=classify(lam, j_arr, kernel_tol),
        modes=modes, mode_of=mode_of, block_starts=np.array(block_starts, dtype=int),
        admissible_n=admissible,
    )
    if not basis.plus.size:
        raise ConfigurationError(f"E+ is empty for alpha={alpha}, m={m}, j_cut={j_cut}")

    logger.debug(
        f"Galerkin basis: {len(basis)} entries, l <= {basis.ell_max}, "
        f"|E+|={basis.plus.size}, |E0|={basis.partition['zero'].size}, |E-|={basis.partition['minus'].size}"
    )
    return basis


def radial_normalization_residual(basis: GalerkinBasis, nodes: Optional[int] = None) -> float:
    """max |int_0^1 J_l(j r)^2 r dr - J_{l+1}(j)^2 / 2| by Gauss-Legendre."""
    nodes = nodes or int(math.ceil(2.0 * basis.j_cut)) + 20
    x, w = np.polynomial.legendre.leggauss(nodes)
    r = 0.5 * (x + 1.0)
    wr = 0.5 * w * r
    values = special.jv(basis.ell, np.outer(r, basis.j))
    integrals = wr @ (values * values)
    return float(np.max(np.abs(integrals - 0.5 * special.jv(basis.ell + 1, basis.j) ** 2)))


class DiskQuadrature:
    """Gauss-Legendre in r (weight r) times the trapezoid rule in theta, with cached basis tables."""

    def __init__(self, basis: GalerkinBasis, n_r: Optional[int] = None,
                 n_theta: Optional[int] = None, refine: int = 1):
        self.basis = basis
        self.n_r = (n_r or int(math.ceil(1.5 * basis.j_cut))) * refine
        self.n_theta = (n_theta or 4 * basis.ell_max + 16) * refine

        x, w = np.polynomial.legendre.leggauss(self.n_r)
        self.r = 0.5 * (x + 1.0)
        self.w_r = 0.5 * w * self.r
        self.theta = -math.pi + 2.0 * math.pi * np.arange(self.n_theta) / self.n_theta
        self.w_theta = 2.0 * math.pi / self.n_theta
        self.weights = np.outer(self.w_r, np.full(self.n_theta, self.w_theta))

        self.radial = basis.radial_values(self.r)
        self.angular = basis.angular_values(self.theta)
        for table in (self.r, self.w_r, self.theta, self.weights, self.radial, self.angular):
            table.setflags(write=False)

    def refined(self, factor: int = 2) -> "DiskQuadrature":
        return DiskQuadrature(self.basis, self.n_r, self.n_theta, refine=factor)

    def evaluate(self, coeffs: np.ndarray) -> np.ndarray:
        """Nodal values of u, shape (n_r, n_theta)."""
        radial = np.add.reduceat(self.radial * coeffs, self.basis.block_starts, axis=1)
        return radial @ self.angular

    def project(self, values: np.ndarray) -> np.ndarray:
        """(int_B f phi_i dx)_i for nodal values f."""
        per_mode = (values * self.weights) @ self.angular.T
        return np.einsum('ri,ri->i', self.radial, per_mode[:, self.basis.mode_of])

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values * self.weights))

    def area(self) -> float:
        return self.integrate(np.ones((self.n_r, self.n_theta)))

    def lp_power(self, coeffs: np.ndarray, p: float) -> float:
        """int_B |u|^p dx."""
        return self.integrate(np.abs(self.evaluate(coeffs)) ** p)

    def gram(self) -> np.ndarray:
        """Quadrature Gram matrix of the basis."""
        radial_gram = (self.radial.T * self.w_r) @ self.radial
        angular_gram = (self.angular * self.w_theta) @ self.angular.T
        mode = self.basis.mode_of
        return radial_gram * angular_gram[np.ix_(mode, mode)]

    def orthonormality_error(self) -> float:
        return float(np.max(np.abs(self.gram() - np.eye(len(self.basis)))))


def spectral_sobolev_norm(basis: GalerkinBasis, coeffs: np.ndarray, s: float) -> float:
    """||u||_{H^s} with j^{2s} weights on the orthonormal eigenbasis."""
    if s < 0:
        raise DomainError(f"Sobolev index must be nonnegative, got {s}")
    return float(math.sqrt(np.dot(basis.j ** (2.0 * s), coeffs * coeffs)))


@dataclass
class EmbeddingCheck:
    """Largest observed c ||u - u0||_{H^1/2}^2 / ||u - u0||_{alpha,m}^2 over random samples."""
    c_empirical: float
    samples: int
    worst_ratio: float

    @property
    def holds(self) -> bool:
        return self.worst_ratio <= 1.0 + 1.0e-12


def embedding_check(basis: GalerkinBasis, c_empirical: Optional[float] = None,
                    samples: int = 100, seed: int = 0) -> EmbeddingCheck:
    """Check ||u - u0||_{H^1/2}^2 <= ||u - u0||_{alpha,m}^2 / c on random truncated u."""
    nonkernel = basis.sign_class != KERNEL
    if c_empirical is None:
        c_empirical = float(np.min(np.abs(basis.lam[nonkernel]) / basis.j[nonkernel]))
    c_empirical = Validator.validate_positive("c_empirical", c_empirical)

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        coeffs = rng.standard_normal(len(basis)) * nonkernel
        half = spectral_sobolev_norm(basis, coeffs, 0.5) ** 2
        worst = max(worst, c_empirical * half / basis.e_norm_squared(coeffs))
    return EmbeddingCheck(c_empirical=c_empirical, samples=samples, worst_ratio=worst)


def rotating_wave(basis: GalerkinBasis, coeffs: np.ndarray, alpha: float, t: float,
                  n_r: int = 65, n_theta: int = 128) -> pd.DataFrame:
    """v(t, x) = u(R_{alpha t} x) sampled on a polar grid, columns r, theta, value."""
    if n_r < 2 or n_theta < 1:
        raise ValidationError(f"Polar grid needs n_r >= 2 and n_theta >= 1, got {n_r} x {n_theta}")
    r = np.linspace(0.0, 1.0, n_r)
    theta = -math.pi + 2.0 * math.pi * np.arange(n_theta) / n_theta
    values = basis.evaluate(np.asarray(coeffs, dtype=float), r, theta + alpha * t)
    rr, tt = np.meshgrid(r, theta, indexing='ij')
    return pd.DataFrame({'r': rr.ravel(), 'theta': tt.ravel(), 'value': values.ravel()})
