"""
Tests for admissible velocities and spectrum enumeration.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path for testing
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from src.spectrum.alpha import (
    alpha_n,
    alpha_n_approx,
    alpha_sigma,
    is_admissible,
    kappa_lower_estimate,
    kappa_n,
    mixed_type_radius,
    operator_type,
    sigma_from_alpha,
    validity_threshold,
    velocity_residual,
)
from src.spectrum.window import (
    KERNEL,
    NEGATIVE,
    POSITIVE,
    classify,
    enumerate_spectrum,
    gap_constant,
    linear_gap,
    mu_n,
    ratio_bound_check,
    shifted_spectrum,
    spectrum_in_window,
)
from src.utils.validators import DomainError, RangeError, ValidationError


@pytest.fixture(scope="module")
def alpha3():
    return alpha_n(3).alpha


class TestAdmissibleVelocities:
    """Test cases for alpha_n and kappa_n."""

    @pytest.mark.parametrize("n", [1, 2, 3, 10, 57, 100])
    def test_defining_identity(self, n):
        """Test the residual of the defining equation."""
        admissible = alpha_n(n)
        assert admissible.residual <= 1e-12 * max(1.0, math.pi * n)
        assert abs(velocity_residual(admissible.alpha, n)) == admissible.residual

    def test_first_fifty_indices(self):
        """Test the root find on n = 1..50 and recognition of every result."""
        for n in range(1, 51):
            admissible = alpha_n(n)
            assert math.pi * n < admissible.alpha < math.pi * n + math.pi / 2 + 1
            assert admissible.residual <= 1e-12 * max(1.0, math.pi * n)
            assert is_admissible(admissible.alpha) == n
            assert math.isfinite(kappa_n(n))

    @pytest.mark.parametrize("n", [1, 4, 25])
    def test_rearranged_identity(self, n):
        """Test alpha^2 = 1 + (pi n + pi/2 - arcsin(1/alpha))^2."""
        admissible = alpha_n(n)
        assert abs(admissible.rearranged_residual) <= 1e-12 * admissible.alpha ** 2

    def test_second_velocity(self):
        """Test alpha_2 against the fixed-point iteration."""
        alpha = 8.0
        for _ in range(100):
            alpha = math.sqrt(1 + (2 * math.pi + math.pi / 2 - math.asin(1 / alpha)) ** 2)
        assert alpha_n(2).alpha == pytest.approx(alpha, rel=1e-13)
        assert alpha_n(2).alpha == pytest.approx(7.79, abs=0.01)

    def test_velocity_exceeds_index(self):
        """Test alpha_n > n."""
        for n in range(1, 30):
            assert alpha_n(n).exceeds_n

    def test_approximation_error(self):
        """Test that sqrt(1 + (pi n + pi/2)^2) is within 1/n of alpha_n."""
        for n in range(1, 50):
            assert 0 < alpha_n_approx(n) - alpha_n(n).alpha <= 1.0 / n

    def test_kappa_above_lower_estimate(self):
        """Test kappa_n >= -(pi/4) e^{1/(3n)} + (n - pi/2)/n."""
        for n in range(1, 101):
            assert kappa_n(n) >= kappa_lower_estimate(n)

    def test_lower_estimate_limit(self):
        """Test the lower estimate tends to 1 - pi/4."""
        assert kappa_lower_estimate(10 ** 6) == pytest.approx(1 - math.pi / 4, abs=1e-5)
        values = [kappa_lower_estimate(n) for n in range(1, 200)]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_lower_estimate_positive_from_nine(self):
        """Test the first index with a positive lower estimate."""
        assert kappa_lower_estimate(8) < 0 < kappa_lower_estimate(9)

    def test_validity_threshold(self):
        """Test that kappa_n > 0 from the reported threshold on."""
        threshold = validity_threshold(100)
        assert threshold is not None
        assert all(kappa_n(n) > 0 for n in range(threshold, 101))

    def test_to_dict(self):
        """Test the exported row."""
        row = alpha_n(5).to_dict()
        assert row['n'] == 5
        assert row['sigma'] == "1/5"
        assert row['alpha_gt_n'] is True
        assert row['c_empirical'] is None

    def test_is_admissible(self, alpha3):
        """Test recognising alpha_n."""
        assert is_admissible(alpha3) == 3
        assert is_admissible(2.0) is None
        assert is_admissible(alpha3 + 1e-3) is None
        assert is_admissible(0.5) is None

    def test_bad_index(self):
        """Test that n must be a positive integer."""
        with pytest.raises(DomainError):
            alpha_n(0)
        with pytest.raises(RangeError):
            alpha_n(10 ** 6)

    def test_rational_velocity_matches_alpha_n(self):
        """Test that sigma = 1/n reproduces alpha_n."""
        for n in (1, 3, 8):
            velocity = alpha_sigma(1, n)
            assert velocity.alpha == pytest.approx(alpha_n(n).alpha, rel=1e-10)
        assert alpha_sigma(1, 100).condition_holds
        assert str(alpha_sigma(2, 6).sigma) == "1/3"

    def test_sigma_from_alpha(self):
        """Test f^{-1}(alpha_n) = 1/n."""
        for n in (2, 7):
            assert sigma_from_alpha(alpha_n(n).alpha) == pytest.approx(1.0 / n, rel=1e-10)

    def test_mixed_type(self):
        """Test the elliptic/hyperbolic split at r = 1/alpha."""
        assert mixed_type_radius(0.5) is None
        assert mixed_type_radius(2.0) == 0.5
        assert operator_type(2.0, 0.3) == "elliptic"
        assert operator_type(2.0, 0.5) == "parabolic"
        assert operator_type(2.0, 0.9) == "hyperbolic"
        assert operator_type(0.8, 0.99) == "elliptic"


class TestEnumeration:
    """Test cases for enumerate_spectrum and its statistics."""

    def test_classify(self):
        """Test the sign classes with the kernel tolerance scaled by j."""
        lam = np.array([0.0, 1e-12, 5.0, -5.0, 2e-9])
        j = np.ones(5)
        assert list(classify(lam, j)) == [KERNEL, KERNEL, POSITIVE, NEGATIVE, POSITIVE]
        assert classify(np.array([2e-9]), np.array([10.0]))[0] == KERNEL

    def test_window_contents(self, alpha3):
        """Test size, ordering and the radial row."""
        window = enumerate_spectrum(alpha3, 0.0, 20, 20, workers=2)
        frame = window.frame
        assert len(window) == 21 * 20
        assert np.all(np.diff(frame['lambda'].to_numpy()) >= 0)
        radial = frame[frame['ell'] == 0]
        assert (radial['class'] == POSITIVE).all()
        assert np.allclose(radial['lambda'], radial['j'] ** 2)
        assert window.count(POSITIVE) + window.count(KERNEL) + window.count(NEGATIVE) == len(window)
        assert window.total_multiplicity == 20 + 2 * 400
        assert window.admissible_n == 3

    def test_mass_shift(self, alpha3):
        """Test that m shifts every eigenvalue."""
        base = enumerate_spectrum(alpha3, 0.0, 10, 10).frame
        shifted = enumerate_spectrum(alpha3, 7.5, 10, 10).frame
        assert np.allclose(np.sort(shifted['lambda']), np.sort(base['lambda']) + 7.5)

    def test_window_grows_both_ways(self, alpha3):
        """Test that the window extremes move outward with the cutoffs."""
        small = enumerate_spectrum(alpha3, 0.0, 10, 10).lambda_range
        large = enumerate_spectrum(alpha3, 0.0, 20, 20).lambda_range
        assert large[0] < small[0]
        assert large[1] > small[1]

    def test_positive_gap_ratio(self, alpha3):
        """Test that min |lambda|/j is positive at alpha_3."""
        window = enumerate_spectrum(alpha3, 0.0, 60, 60)
        assert window.min_gap_ratio > 0
        summary = window.summary()
        assert summary['min_gap_ratio'] == window.min_gap_ratio
        assert summary['argmin'] == list(window.argmin)

    def test_points(self, alpha3):
        """Test iteration over the window."""
        window = enumerate_spectrum(alpha3, 0.0, 3, 3)
        points = list(window.points())
        assert len(points) == len(window)
        assert sum(point.multiplicity for point in points) == window.total_multiplicity

    def test_bad_cutoffs(self, alpha3):
        """Test rejected cutoffs."""
        with pytest.raises(DomainError):
            enumerate_spectrum(alpha3, 0.0, -1, 10)
        with pytest.raises(DomainError):
            enumerate_spectrum(alpha3, 0.0, 10, 0)


class TestGapConstant:
    """Test cases for the empirical gap constant."""

    def test_positive_at_admissible_velocity(self, alpha3):
        """Test c > 0 with and without mass."""
        assert gap_constant(alpha3, 0.0, 60, 60).c_estimate > 0
        assert gap_constant(alpha3, 5.0, 60, 60).c_estimate > 0

    def test_generic_velocity_reported(self):
        """Test that a generic velocity still yields an estimate."""
        estimate = gap_constant(2.0, 0.0, 20, 20)
        assert estimate.admissible_n is None
        assert math.isfinite(estimate.c_estimate)
        assert estimate.to_dict()['argmin'] == list(estimate.argmin)

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_stable_under_doubling(self, n):
        """Test the estimate at cutoffs 500 and 1000 for the first admissible velocities."""
        alpha = alpha_n(n).alpha
        coarse = gap_constant(alpha, 0.0, 500, 500, workers=4)
        fine = gap_constant(alpha, 0.0, 1000, 1000, workers=4)
        assert coarse.admissible_n == n
        assert fine.c_estimate > 0
        assert abs(fine.c_estimate - coarse.c_estimate) <= 0.2 * coarse.c_estimate

    def test_linear_gap(self, alpha3):
        """Test min |j - alpha l| is positive."""
        window = enumerate_spectrum(alpha3, 0.0, 30, 30)
        gap, argmin = linear_gap(window)
        assert gap > 0
        ell, k = argmin
        assert 0 <= ell <= 30 and 1 <= k <= 30


class TestShiftedSpectrum:
    """Test cases for the shifted operator."""

    def test_zero_shift_doubles_rows(self, alpha3):
        """Test mu = 0 reproduces the unshifted eigenvalues, l >= 1 twice."""
        base = enumerate_spectrum(alpha3, 1.0, 8, 8).frame
        shifted = shifted_spectrum(alpha3, 1.0, 0.0, 8, 8).frame
        expected = np.sort(np.concatenate([base['lambda'], base[base['ell'] > 0]['lambda']]))
        assert np.allclose(np.sort(shifted['lambda']), expected)
        assert set(shifted['branch']) == {"0", "+", "-"}
        assert (shifted[shifted['ell'] == 0]['branch'] == "0").all()

    def test_branch_symmetry(self, alpha3):
        """Test that branch + at mu equals branch - at -mu."""
        plus = shifted_spectrum(alpha3, 0.0, 0.7, 8, 8).frame
        minus = shifted_spectrum(alpha3, 0.0, -0.7, 8, 8).frame
        a = np.sort(plus[plus['branch'] == "+"]['lambda'].to_numpy())
        b = np.sort(minus[minus['branch'] == "-"]['lambda'].to_numpy())
        assert np.allclose(a, b)

    def test_gap_below_mu_n(self, alpha3):
        """Test a positive gap ratio for a shift below mu_n."""
        mu = mu_n(3, 30, 30)
        assert mu > 0
        window = shifted_spectrum(alpha3, 0.0, 0.5 * mu, 30, 30)
        assert window.min_gap_ratio > 0
        assert window.mu == 0.5 * mu


class TestRatioBound:
    """Test cases for the closed-form bracket on j/l - alpha."""

    @pytest.mark.parametrize("ell", [1, 3, 10, 50])
    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_bracket_holds(self, alpha3, ell, k):
        """Test lower < value < upper."""
        assert ratio_bound_check(alpha3, ell, k).holds

    def test_sign_regimes(self, alpha3):
        """Test the value's sign for l >> k and k >> l."""
        assert ratio_bound_check(alpha3, 200, 1).value < 0
        assert ratio_bound_check(alpha3, 1, 50).value > 0

    def test_rejects_radial_row(self, alpha3):
        """Test l = 0 is rejected."""
        with pytest.raises(ValidationError):
            ratio_bound_check(alpha3, 0, 1)


class TestWindowQuery:
    """Test cases for spectrum_in_window."""

    def test_matches_full_enumeration(self, alpha3):
        """Test that skipping rows never drops an eigenvalue."""
        full = enumerate_spectrum(alpha3, 2.0, 30, 30).frame
        selected = full[(full['lambda'] >= -50.0) & (full['lambda'] <= 200.0)]
        window = spectrum_in_window(alpha3, 2.0, -50.0, 200.0, 30, 30).frame
        expected = set(zip(selected['ell'], selected['k']))
        assert set(zip(window['ell'], window['k'])) == expected
        assert np.all(np.diff(window['lambda'].to_numpy()) >= 0)

    def test_empty_window(self, alpha3):
        """Test a window holding no eigenvalue."""
        window = spectrum_in_window(alpha3, 0.0, 1e6, 1e6 + 1, 5, 5)
        assert len(window) == 0

    def test_reversed_window(self, alpha3):
        """Test lam_hi < lam_lo."""
        with pytest.raises(ValidationError):
            spectrum_in_window(alpha3, 0.0, 1.0, 0.0, 5, 5)


if __name__ == '__main__':
    pytest.main([__file__])
