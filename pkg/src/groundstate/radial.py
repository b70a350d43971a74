"""
Single-mode profile solvers for the Rotating Wave Toolkit.

Both the radial ground state and the V_k minimiser reduce to a profile
problem on (0, 1):
    -(r w')' / r + k^2 w / r^2 + M w = |w|^{p-2} w,   w(1) = 0,
with angular index k and mass shift M (M = m for radial functions,
M = m - alpha^2 k^2 on V_k). It is discretised with P1 elements on a
mesh graded towards the origin and solved by Petviashvili iteration.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import sparse, special
from scipy.sparse import linalg as sparse_linalg

from ..specfun.bessel import bessel_j_zero
from ..utils.logger import get_logger
from ..utils.validators import DomainError, NumericError, Validator

logger = get_logger()

FIRST_ZERO_SQ = 2.404825557695773 ** 2


@dataclass
class ProfileMesh:
    """P1 element data on 0 = r_0 < ... < r_N = 1 with weight 2 pi r."""
    r: np.ndarray
    stiffness: sparse.csc_matrix
    lumped: np.ndarray

    @classmethod
    def graded(cls, nodes: int, width: float) -> "ProfileMesh":
        s = np.linspace(0.0, 1.0, nodes)
        r = width * np.sinh(s * math.asinh(1.0 / width))
        r[-1] = 1.0
        h = np.diff(r)
        a, b = r[:-1], r[1:]

        coupling = 2.0 * math.pi * 0.5 * (a + b) / h
        diagonal = np.zeros(nodes)
        diagonal[:-1] += coupling
        diagonal[1:] += coupling
        stiffness = sparse.diags([-coupling, diagonal, -coupling], [-1, 0, 1], format='csc')

        lumped = np.zeros(nodes)
        lumped[:-1] += 2.0 * math.pi * h * (2.0 * a + b) / 6.0
        lumped[1:] += 2.0 * math.pi * h * (a + 2.0 * b) / 6.0
        return cls(r=r, stiffness=stiffness, lumped=lumped)


@dataclass
class ProfileSolution:
    r: np.ndarray
    profile: np.ndarray
    operator_form: float
    lp_power: float
    residual: float
    iterations: int


class ProfileSolver:
    """Positive solution of the single-mode profile equation."""

    MESH_NODES = 2000
    MAX_ITERATIONS = 1000
    RESIDUAL_TOLERANCE = 1.0e-10
    STAGNATION_TOLERANCE = 1.0e-8
    STAGNATION_WINDOW = 20

    def __init__(self, shift: float, angular: int, p: float, nodes: int = MESH_NODES):
        self.shift = shift
        self.angular = angular
        self.p = p
        width = min(0.5, 3.0 / math.sqrt(abs(shift) + 1.0))
        self.mesh = ProfileMesh.graded(nodes, width)

        r = self.mesh.r
        # w(1) = 0 always, w(0) = 0 once the angular index is nonzero
        self.free = np.arange(1 if angular else 0, len(r) - 1)
        lumped = self.mesh.lumped[self.free]
        potential = shift * lumped
        if angular:
            potential = potential + angular * angular * lumped / r[self.free] ** 2
        self.weights = lumped
        self.operator = (
            self.mesh.stiffness[self.free][:, self.free] + sparse.diags(potential, format='csc')
        ).tocsc()
        self._factor = sparse_linalg.splu(self.operator)

    def nonlinearity(self, w: np.ndarray) -> np.ndarray:
        return self.weights * np.abs(w) ** (self.p - 2.0) * w

    def residual(self, w: np.ndarray) -> float:
        forcing = self.nonlinearity(w)
        return float(np.max(np.abs(self.operator @ w - forcing)) / np.max(np.abs(forcing)))

    def initial_guess(self) -> np.ndarray:
        j = bessel_j_zero(self.angular, 1).value
        return special.jv(self.angular, j * self.mesh.r[self.free])

    def solve(self) -> ProfileSolution:
        exponent = (self.p - 1.0) / (self.p - 2.0)
        w = self.initial_guess()
        residual = float('inf')
        history = []
        for iteration in range(1, self.MAX_ITERATIONS + 1):
            forcing = self.nonlinearity(w)
            stabiliser = float(np.dot(w, self.operator @ w)) / float(np.dot(w, forcing))
            w = stabiliser ** exponent * self._factor.solve(forcing)
            residual = self.residual(w)
            history.append(residual)
            if iteration % 50 == 0:
                logger.debug(f"Profile iteration {iteration}: residual {residual:.3e}, stabiliser {stabiliser:.12g}")
            if residual <= self.RESIDUAL_TOLERANCE:
                break
            # rounding floor of the discrete operator: no halving over the window
            if (residual <= self.STAGNATION_TOLERANCE and len(history) > self.STAGNATION_WINDOW
                    and residual > 0.5 * history[-1 - self.STAGNATION_WINDOW]):
                logger.debug(f"Profile iteration stalled at residual {residual:.3e} after {iteration} iterations")
                break
        else:
            raise NumericError(
                "Profile iteration did not converge",
                {'iterations': self.MAX_ITERATIONS, 'residual': residual, 'shift': self.shift, 'k': self.angular},
            )

        if w.min() < 0 or w.max() <= 0:
            raise NumericError("Profile lost positivity", {'min': float(w.min()), 'iterations': iteration})

        profile = np.zeros(len(self.mesh.r))
        profile[self.free] = w
        return ProfileSolution(
            r=self.mesh.r,
            profile=profile,
            operator_form=float(np.dot(w, self.operator @ w)),
            lp_power=float(np.dot(self.weights, np.abs(w) ** self.p)),
            residual=residual,
            iterations=iteration,
        )


@dataclass
class RadialResult:
    """Positive radial solution and the radial level beta_m^rad."""
    r: np.ndarray
    profile: np.ndarray
    beta_rad: float
    m: float
    p: float
    residual: float = 0.0
    iterations: int = 0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'r': self.r, 'value': self.profile})

    def to_dict(self) -> dict:
        return {
            'm': self.m,
            'p': self.p,
            'beta_rad': self.beta_rad,
            'residual': self.residual,
            'iterations': self.iterations,
            'profile_max': float(self.profile.max()),
        }


def rayleigh_level(operator_form: float, lp_power: float, p: float) -> float:
    """(1/2 - 1/p) (a(w, w) / ||w||_p^2)^{p/(p-2)}."""
    quotient = operator_form / lp_power ** (2.0 / p)
    return (0.5 - 1.0 / p) * quotient ** (p / (p - 2.0))


def radial_ground_state(m: float, p: float, nodes: int = ProfileSolver.MESH_NODES) -> RadialResult:
    """beta_m^rad and the unique positive radial solution on the unit disk."""
    m = Validator.validate_positive("m", m, strict=False)
    p = Validator.validate_exponent(p, subcritical=False)

    solution = ProfileSolver(m, 0, p, nodes).solve()
    result = RadialResult(
        r=solution.r,
        profile=solution.profile,
        beta_rad=rayleigh_level(solution.operator_form, solution.lp_power, p),
        m=m,
        p=p,
        residual=solution.residual,
        iterations=solution.iterations,
    )
    logger.info(f"Radial level m={m}, p={p}: beta_rad={result.beta_rad:.12g} ({result.iterations} iterations)")
    return result


@dataclass
class VkResult:
    """Minimiser of J over V_k = {u : d_theta u = i k u} with ||u||_p = 1."""
    alpha: float
    m: float
    k: int
    p: float
    shift: float
    r: np.ndarray
    profile: np.ndarray
    multiplier: float
    solution: np.ndarray
    weak_residual: float
    angular_variance: float
    iterations: int = 0
    scaling_mismatch: float = field(default=0.0)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'r': self.r, 'value': self.solution})

    def to_dict(self) -> dict:
        return {
            'alpha': self.alpha,
            'm': self.m,
            'k': self.k,
            'p': self.p,
            'shift': self.shift,
            'K0': self.multiplier,
            'weak_residual': self.weak_residual,
            'angular_variance': self.angular_variance,
            'iterations': self.iterations,
        }


def modulus_variance(r: np.ndarray, profile: np.ndarray, k: int, samples: int = 64) -> float:
    """Largest variance over theta of |w(r) e^{ik theta}| across the radii."""
    theta = 2.0 * math.pi * np.arange(samples) / samples
    field_values = np.outer(profile, np.exp(1j * k * theta))
    return float(np.max(np.var(np.abs(field_values), axis=1)))


def complex_vk_minimizer(alpha: float, m: float, k: int, p: float,
                         nodes: int = ProfileSolver.MESH_NODES) -> VkResult:
    """Constrained minimiser on V_k, its multiplier K0 and the rescaled solution K0^{1/(p-2)} u0."""
    alpha = Validator.validate_velocity(alpha)
    m = Validator.validate_finite("m", m)
    k = Validator.validate_index(k)
    p = Validator.validate_exponent(p, subcritical=False)
    shift = m - alpha * alpha * k * k
    if shift <= -FIRST_ZERO_SQ:
        raise DomainError(
            f"V_k minimiser needs m - alpha^2 k^2 > -j_(0,1)^2 = {-FIRST_ZERO_SQ:.6f}, got {shift:.6f}"
        )

    solver = ProfileSolver(shift, k, p, nodes)
    solution = solver.solve()

    lp_norm = solution.lp_power ** (1.0 / p)
    profile = solution.profile / lp_norm
    multiplier = solution.operator_form / lp_norm ** 2
    if multiplier <= 0:
        raise NumericError("Multiplier K0 is not positive", {'K0': multiplier, 'shift': shift})
    rescaled = multiplier ** (1.0 / (p - 2.0)) * profile

    result = VkResult(
        alpha=alpha, m=m, k=k, p=p, shift=shift,
        r=solution.r,
        profile=profile,
        multiplier=multiplier,
        solution=rescaled,
        weak_residual=solver.residual(rescaled[solver.free]),
        angular_variance=modulus_variance(solution.r, rescaled, k),
        iterations=solution.iterations,
        scaling_mismatch=float(np.max(np.abs(rescaled - solution.profile)) / np.max(solution.profile)),
    )
    logger.info(
        f"V_k minimiser alpha={alpha}, m={m}, k={k}, p={p}: K0={multiplier:.12g}, "
        f"weak residual {result.weak_residual:.2e}"
    )
    return result
