"""
Tests for the Galerkin ground state, the profile solvers and the nonradiality scan.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, special

# Add src to path for testing
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from src.groundstate.basis import (
    COS,
    SIN,
    DiskQuadrature,
    assemble_basis,
    embedding_check,
    radial_normalization_residual,
    rotating_wave,
    spectral_sobolev_norm,
)
from src.groundstate.nehari import (
    NehariFunctional,
    basis_upper_bound,
    energy,
    ground_state,
    inner_maximize,
    level_prefactor,
    nonradial_energy_fraction,
    upper_bound_c,
)
from src.groundstate import nehari
from src.groundstate.radial import ProfileSolver, complex_vk_minimizer, radial_ground_state, rayleigh_level
from src.groundstate.scan import COLUMNS, nonradiality_scan
from src.spectrum.alpha import alpha_n
from src.spectrum.window import POSITIVE, classify, enumerate_spectrum
from src.utils.validators import ConfigurationError, DomainError, NumericError, ValidationError


@pytest.fixture(scope="module")
def alpha3():
    return alpha_n(3).alpha


@pytest.fixture(scope="module")
def small_basis(alpha3):
    return assemble_basis(alpha3, 50.0, 15.0)


@pytest.fixture(scope="module")
def small_ground_state(alpha3):
    return ground_state(alpha3, 50.0, 3.0, j_cut=15.0, starts=3, workers=2)


class TestGalerkinBasis:
    """Test cases for basis assembly and disk quadrature."""

    def test_lowest_radial_entry(self, small_basis):
        """Test the (0, 1) entry carries lambda = j_{0,1}^2 + m."""
        i = small_basis.index_of(0, 1)
        assert small_basis.lam[i] == pytest.approx(2.404825557695773 ** 2 + 50.0, rel=1e-14)
        with pytest.raises(KeyError):
            small_basis.index_of(0, 1, SIN)

    def test_contents_match_enumeration(self, alpha3, small_basis):
        """Test that every j_{l,k} <= j_cut appears once per parity."""
        frame = enumerate_spectrum(alpha3, 50.0, 12, 10).frame
        inside = frame[frame['j'] <= 15.0]
        expected = int(np.where(inside['ell'] == 0, 1, 2).sum())
        assert len(small_basis) == expected
        assert small_basis.ell_max == int(inside['ell'].max())

    def test_partition(self, small_basis):
        """Test the E+/E0/E- partition against classify."""
        classes = classify(small_basis.lam, small_basis.j, small_basis.kernel_tol)
        assert np.array_equal(small_basis.plus, np.flatnonzero(classes == POSITIVE))
        sizes = sum(part.size for part in small_basis.partition.values())
        assert sizes == len(small_basis)
        assert small_basis.partition['minus'].size > 0
        summary = small_basis.summary()
        assert summary['plus'] + summary['zero'] + summary['minus'] == summary['size']

    def test_mode_blocks(self, small_basis):
        """Test that entries are grouped by angular mode."""
        for mode, start in enumerate(small_basis.block_starts):
            ell, parity = small_basis.modes[mode]
            assert small_basis.ell[start] == ell
            assert small_basis.parity[start] == parity
            assert small_basis.k[start] == 1
        assert small_basis.modes[0] == (0, COS)

    def test_normalization_identity(self, small_basis):
        """Test int_0^1 J_l(j r)^2 r dr = J_{l+1}(j)^2 / 2."""
        assert radial_normalization_residual(small_basis) <= 1e-12

    def test_orthonormality(self, small_basis):
        """Test the quadrature Gram matrix."""
        quadrature = DiskQuadrature(small_basis)
        assert quadrature.orthonormality_error() <= 1e-10
        assert quadrature.area() == pytest.approx(math.pi, rel=1e-13)

    def test_project_inverts_evaluate(self, small_basis):
        """Test projection of nodal values recovers the coefficients."""
        quadrature = DiskQuadrature(small_basis)
        coeffs = np.random.default_rng(1).standard_normal(len(small_basis))
        assert np.allclose(quadrature.project(quadrature.evaluate(coeffs)), coeffs, atol=1e-8)

    def test_evaluate_matches_direct_sum(self, small_basis):
        """Test the blocked evaluation against a direct mode sum."""
        coeffs = np.random.default_rng(2).standard_normal(len(small_basis))
        r = np.array([0.1, 0.5, 0.9])
        theta = np.array([-1.0, 0.3, 2.0])
        direct = np.zeros((3, 3))
        for i in range(len(small_basis)):
            ell = small_basis.ell[i]
            angular = np.cos(ell * theta) if small_basis.parity[i] == COS else np.sin(ell * theta)
            radial = small_basis.norm[i] * special.jv(ell, small_basis.j[i] * r)
            direct += coeffs[i] * np.outer(radial, angular)
        assert np.allclose(small_basis.evaluate(coeffs, r, theta), direct, atol=1e-12)

    def test_empty_plus_space(self, alpha3):
        """Test that an empty E+ is a configuration error."""
        with pytest.raises(ConfigurationError):
            assemble_basis(alpha3, -1.0e4, 10.0)

    def test_cut_below_first_zero(self, alpha3):
        """Test j_cut <= j_{0,1}."""
        with pytest.raises(ConfigurationError):
            assemble_basis(alpha3, 0.0, 2.0)

    def test_sobolev_norm(self, small_basis):
        """Test H^0 is the coefficient norm and negative indices are rejected."""
        coeffs = np.random.default_rng(3).standard_normal(len(small_basis))
        assert spectral_sobolev_norm(small_basis, coeffs, 0.0) == pytest.approx(np.linalg.norm(coeffs))
        with pytest.raises(DomainError):
            spectral_sobolev_norm(small_basis, coeffs, -0.5)

    def test_embedding(self, small_basis):
        """Test the H^1/2 embedding with the empirical gap constant."""
        check = embedding_check(small_basis, samples=50)
        assert check.c_empirical > 0
        assert check.holds

    def test_rotating_wave(self, small_basis, alpha3):
        """Test the sampled rotating wave and its period 2 pi / alpha."""
        coeffs = np.random.default_rng(4).standard_normal(len(small_basis))
        wave = rotating_wave(small_basis, coeffs, alpha3, 0.0, n_r=11, n_theta=16)
        assert list(wave.columns) == ['r', 'theta', 'value']
        assert len(wave) == 11 * 16
        assert np.allclose(wave[wave['r'] == 1.0]['value'], 0.0, atol=1e-12)
        later = rotating_wave(small_basis, coeffs, alpha3, 2 * math.pi / alpha3, n_r=11, n_theta=16)
        assert np.allclose(later['value'], wave['value'], atol=1e-10)
        with pytest.raises(ValidationError):
            rotating_wave(small_basis, coeffs, alpha3, 0.0, n_r=1)


class TestEnergy:
    """Test cases for Phi and its derivative."""

    def test_zero(self, small_basis):
        """Test Phi(0) = 0."""
        assert energy(small_basis, np.zeros(len(small_basis)), 3.0) == 0.0

    def test_lowest_mode_lp_norm(self, small_basis):
        """Test the L^3 norm of the lowest radial mode against quad."""
        i = small_basis.index_of(0, 1)
        coeffs = np.zeros(len(small_basis))
        coeffs[i] = 1.0
        a, j = small_basis.norm[i], small_basis.j[i]
        exact, _ = integrate.quad(lambda r: 2 * math.pi * (a * special.j0(j * r)) ** 3 * r, 0, 1, epsabs=1e-14)
        assert DiskQuadrature(small_basis).lp_power(coeffs, 3.0) == pytest.approx(exact, rel=1e-10)

    def test_single_mode_maximum(self, small_basis):
        """Test max_t Phi(t phi_{0,1}) against the one-dimensional closed form."""
        p = 3.0
        i = small_basis.index_of(0, 1)
        unit = np.zeros(len(small_basis))
        unit[i] = 1.0
        lam = small_basis.lam[i]
        lp = DiskQuadrature(small_basis).lp_power(unit, p)
        closed = level_prefactor(p) * (lam / lp ** (2 / p)) ** (p / (p - 2))
        t_star = (lam / lp) ** (1 / (p - 2))
        assert energy(small_basis, t_star * unit, p) == pytest.approx(closed, rel=1e-12)
        for t in (0.5 * t_star, 0.9 * t_star, 1.1 * t_star, 2.0 * t_star):
            assert energy(small_basis, t * unit, p) < closed

    def test_quadratic_part_negative_on_minus(self, small_basis):
        """Test that a pure E- element has negative quadratic part."""
        coeffs = np.zeros(len(small_basis))
        coeffs[small_basis.partition['minus'][0]] = 1.0
        assert small_basis.quadratic_form(coeffs) < 0

    def test_verified_energy(self, small_basis):
        """Test the node-doubling check on a smooth element."""
        coeffs = np.zeros(len(small_basis))
        coeffs[small_basis.index_of(0, 1)] = 3.0
        coeffs[small_basis.index_of(1, 1, SIN)] = -1.0
        assert energy(small_basis, coeffs, 3.0, verify=True) == pytest.approx(
            energy(small_basis, coeffs, 3.0), rel=1e-6
        )

    def test_derivative_matches_difference(self, small_basis):
        """Test Phi'(u)v against a central difference."""
        functional = NehariFunctional(small_basis, 2.5)
        rng = np.random.default_rng(5)
        u = rng.standard_normal(len(small_basis)) * 0.1
        v = rng.standard_normal(len(small_basis))
        h = 1e-6
        difference = (functional.energy(u + h * v) - functional.energy(u - h * v)) / (2 * h)
        assert float(np.dot(functional.derivative(u), v)) == pytest.approx(difference, rel=1e-6, abs=1e-8)

    def test_exponent_validated(self, small_basis):
        """Test p outside (2, 4)."""
        with pytest.raises(DomainError):
            NehariFunctional(small_basis, 4.0)


class TestInnerMaximum:
    """Test cases for the maximum over R+ u + F."""

    def test_trivial_complement(self):
        """Test the closed form when F is empty."""
        basis = assemble_basis(0.5, 0.0, 10.0)
        assert basis.f_space.size == 0
        direction = np.zeros(basis.plus.size)
        direction[0] = 1.0
        result = inner_maximize(basis, direction, 3.0)
        unit = np.zeros(len(basis))
        unit[basis.plus[0]] = 1.0 / math.sqrt(basis.lam[basis.plus[0]])
        lp = DiskQuadrature(basis).lp_power(unit, 3.0)
        assert result.t == pytest.approx(1.0 / lp, rel=1e-12)
        assert result.value == pytest.approx(level_prefactor(3.0) * result.t ** 2, rel=1e-12)
        assert energy(basis, result.coefficients, 3.0) == pytest.approx(result.value, rel=1e-10)

    def test_positive_maximum(self, small_basis):
        """Test t > 0, value > 0 and a vanishing gradient on the subspace."""
        functional = NehariFunctional(small_basis, 3.0)
        direction = np.random.default_rng(6).standard_normal(small_basis.plus.size)
        result = functional.inner_maximize(direction)
        assert result.t > 0
        assert result.value > 0
        assert result.value < result.coercivity_radius ** 2
        assert functional.kkt_residual(result.coefficients) <= 1e-6

    def test_multistart_agreement(self, small_basis):
        """Test that random starts in the coercivity ball reach the same maximiser."""
        functional = NehariFunctional(small_basis, 3.0)
        direction = np.zeros(small_basis.plus.size)
        direction[0] = 1.0
        reference = functional.inner_maximize(direction)
        scale = max(1.0, float(np.max(np.abs(reference.scaled))))
        for result in functional.inner_multistart(direction, starts=5, seed=7):
            assert result.value == pytest.approx(reference.value, rel=1e-8)
            assert np.max(np.abs(result.scaled - reference.scaled)) <= 1e-6 * scale

    def test_bad_direction(self, small_basis):
        """Test a zero or misshapen direction."""
        functional = NehariFunctional(small_basis, 3.0)
        with pytest.raises(ValidationError):
            functional.inner_maximize(np.zeros(small_basis.plus.size))
        with pytest.raises(ValidationError):
            functional.inner_maximize(np.ones(small_basis.plus.size + 1))


class TestGroundState:
    """Test cases for the outer minimisation."""

    def test_level(self, small_ground_state):
        """Test KKT residual, positivity and the eigenvalue bound."""
        result = small_ground_state
        assert result.kkt_residual <= 1e-6
        assert result.energy > 0
        assert result.energy <= result.upper_bound
        assert result.plus_norm > 0
        assert 1 <= len(result.start_energies) <= 3
        assert result.energy <= min(result.start_energies) + 1e-12
        assert result.quadrature_discrepancy <= 1e-6

    def test_minimax_ordering(self, small_basis, small_ground_state):
        """Test Psi(w) >= c for E+ directions w."""
        functional = NehariFunctional(small_basis, 3.0)
        rng = np.random.default_rng(8)
        for _ in range(4):
            direction = rng.standard_normal(small_basis.plus.size)
            assert functional.inner_maximize(direction).value >= small_ground_state.energy - 1e-8

    def test_upper_bounds(self, alpha3, small_basis, small_ground_state):
        """Test the basis bound dominates both the level and the bound over all of I+."""
        bound = upper_bound_c(alpha3, 50.0, 3.0)
        basis_bound = basis_upper_bound(small_basis, 3.0)
        assert small_ground_state.energy <= basis_bound
        assert small_ground_state.upper_bound == basis_bound
        assert bound.value <= basis_bound * (1 + 1e-12)

    def test_to_dict(self, small_ground_state):
        """Test the exported document."""
        document = small_ground_state.to_dict()
        assert document['energy'] == small_ground_state.energy
        assert len(document['coefficients']) == len(small_ground_state.basis)
        assert document['coefficients'][0][:3] == [0, 1, "cos"]

    def test_nonradial_fraction(self, small_basis):
        """Test the share carried by l >= 1."""
        radial = np.zeros(len(small_basis))
        radial[small_basis.index_of(0, 2)] = 1.0
        assert nonradial_energy_fraction(small_basis, radial) == 0.0
        angular = np.zeros(len(small_basis))
        angular[small_basis.index_of(2, 1, COS)] = 1.0
        assert nonradial_energy_fraction(small_basis, angular) == 1.0
        assert nonradial_energy_fraction(small_basis, np.zeros(len(small_basis))) == 0.0

    def test_radial_restriction_matches_profile_solver(self, alpha3):
        """Test the l = 0 Galerkin level against the radial profile solver."""
        galerkin = ground_state(alpha3, 10.0, 3.0, j_cut=40.0, starts=3, ell_max=0)
        radial = radial_ground_state(10.0, 3.0)
        assert galerkin.nonradial_energy_fraction == 0.0
        assert galerkin.energy == pytest.approx(radial.beta_rad, rel=1e-3)

    def test_unresolved_quadrature_raises(self, alpha3, monkeypatch):
        """Test that a discrepancy surviving two node doublings is an error."""
        monkeypatch.setattr(nehari, 'DOUBLING_TOLERANCE', -1.0)
        with pytest.raises(NumericError):
            ground_state(alpha3, 50.0, 3.0, j_cut=15.0, starts=1, max_iterations=5)

    @pytest.mark.slow
    def test_desk_scale(self, alpha3):
        """Test the ground state at j_cut 60 and its stability from j_cut 40."""
        coarse = ground_state(alpha3, 50.0, 3.0, j_cut=40.0)
        fine = ground_state(alpha3, 50.0, 3.0, j_cut=60.0)
        assert fine.kkt_residual <= 1e-6
        assert 0 < fine.energy <= fine.upper_bound
        assert fine.quadrature_discrepancy <= 1e-6
        assert abs(fine.energy - coarse.energy) <= 0.01 * fine.energy


class TestUpperBound:
    """Test cases for upper_bound_c."""

    def test_matches_exhaustive_search(self, alpha3):
        """Test the per-row minimum against a full enumeration."""
        bound = upper_bound_c(alpha3, 50.0, 3.0)
        frame = enumerate_spectrum(alpha3, 50.0, bound.ell_max, 120).frame
        positive = frame[frame['class'] == POSITIVE]
        best = positive.iloc[int(np.argmin(positive['lambda'].to_numpy()))]
        assert bound.lam_min == pytest.approx(float(best['lambda']), rel=1e-9)
        assert (bound.ell, bound.k) == (int(best['ell']), int(best['k']))
        assert bound.value == pytest.approx(math.pi / 6 * bound.lam_min ** 3, rel=1e-12)

    def test_to_dict(self, alpha3):
        """Test the exported bound."""
        document = upper_bound_c(alpha3, 0.0, 3.0).to_dict()
        assert document['upper_bound'] > 0
        assert len(document['argmin']) == 2


class TestProfileSolvers:
    """Test cases for the radial and V_k profile solvers."""

    def test_radial_profile(self):
        """Test positivity, the boundary value and the level."""
        result = radial_ground_state(0.0, 3.0, nodes=800)
        assert result.beta_rad > 0
        assert result.profile[-1] == 0.0
        assert np.all(result.profile[:-1] > 0)
        assert result.residual <= ProfileSolver.STAGNATION_TOLERANCE
        frame = result.to_frame()
        assert list(frame.columns) == ['r', 'value']

    def test_radial_level_increases_with_mass(self):
        """Test beta_rad grows with m."""
        levels = [radial_ground_state(m, 3.0, nodes=800).beta_rad for m in (0.0, 10.0, 100.0)]
        assert levels[0] < levels[1] < levels[2]

    def test_rayleigh_level(self):
        """Test the level of a Nehari point, a(w, w) = |w|_p^p."""
        assert rayleigh_level(6.0, 6.0, 3.0) == pytest.approx(1.0, rel=1e-14)

    def test_radial_domain(self):
        """Test m < 0 and p <= 2."""
        with pytest.raises(DomainError):
            radial_ground_state(-1.0, 3.0)
        with pytest.raises(DomainError):
            radial_ground_state(1.0, 2.0)

    @pytest.mark.parametrize("p", [2.5, 3.0, 3.5])
    @pytest.mark.parametrize("m", [0.0, 10.0])
    def test_radial_default_mesh_small_mass(self, m, p):
        """Test the radial solver on the default mesh where rounding limits the residual."""
        result = radial_ground_state(m, p)
        assert len(result.r) == ProfileSolver.MESH_NODES
        assert result.residual <= ProfileSolver.STAGNATION_TOLERANCE
        assert result.iterations < ProfileSolver.MAX_ITERATIONS
        assert result.beta_rad > 0
        assert np.all(result.profile[:-1] > 0)

    @pytest.mark.slow
    @pytest.mark.parametrize("p", [2.5, 3.0, 3.5])
    def test_radial_growth(self, p):
        """Test the log-log slope of beta_rad against 2/(p - 2)."""
        masses = [100.0, 1000.0, 10000.0]
        levels = [radial_ground_state(m, p).beta_rad for m in masses]
        slope, _ = np.polyfit(np.log(masses), np.log(levels), 1)
        expected = 2.0 / (p - 2.0)
        assert abs(slope - expected) <= 0.1 * expected

    def test_vk_minimizer(self):
        """Test K0 > 0, the weak residual and the radial modulus."""
        result = complex_vk_minimizer(1.5, 1.0, 1, 3.0, nodes=800)
        assert result.multiplier > 0
        assert result.weak_residual <= 1e-6
        assert result.angular_variance <= 1e-10
        assert result.solution[0] == 0.0
        assert result.to_dict()['K0'] == result.multiplier

    def test_vk_eigenvalue_condition(self):
        """Test m - alpha^2 k^2 <= -j_{0,1}^2."""
        with pytest.raises(DomainError):
            complex_vk_minimizer(3.0, 0.0, 1, 3.0)


class TestNonradialityScan:
    """Test cases for the crossover scan."""

    def test_crossover_with_bound(self, alpha3):
        """Test that the eigenvalue bound drops below beta_rad on the grid."""
        report = nonradiality_scan(alpha3, 3.0, [10.0, 100.0, 1000.0, 10000.0], solve=False, solve_crossover=False)
        frame = report.to_frame()
        assert list(frame.columns) == COLUMNS
        assert report.crossover_m is not None
        assert report.crossover_m <= 1000.0
        assert frame['crossover'].iloc[-1]
        assert report.predicted_exponents['upper_bound'] < report.predicted_exponents['radial']
        summary = report.summary()
        assert summary['crossover_m'] == report.crossover_m
        assert summary['nonradial_energy_fraction'] is None

    def test_rejects_negative_mass(self, alpha3):
        """Test the mass grid validation."""
        with pytest.raises(ValidationError):
            nonradiality_scan(alpha3, 3.0, [10.0, -1.0])

    @pytest.mark.slow
    def test_crossover_state_is_nonradial(self, alpha3):
        """Test the ground state at the crossover mass."""
        report = nonradiality_scan(alpha3, 3.0, [10.0, 100.0, 1000.0], j_cut=40.0, starts=5)
        assert report.crossover_state is not None
        assert report.crossover_state.nonradial_energy_fraction > 0.5


if __name__ == '__main__':
    pytest.main([__file__])
