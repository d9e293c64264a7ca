"""Tests for the trajectory oracle: series seeding, upward integration,
residue matrices, and the regularised x -> 0 limit families.

Independent oracles: numpy eigenvalues for spectral conservation along the
trajectory, the closed-form boundary value as the limit target, synthetic
power-law data for the extrapolators, and seed/extend self-consistency at
two different seed points.
"""

from __future__ import annotations

import cmath

import numpy as np
import pytest
from numpy.testing import assert_allclose

from isolab.arrows import PviAsymptoticData, arrow_q
from isolab.core_linalg import delta_k
from isolab.errors import DomainError
from isolab.pvi_trajectory import (
    PuiseuxSeries,
    correction_powers,
    extend_trajectory,
    extrapolate_known_powers,
    extrapolate_single_power,
    gamma_exponents,
    omega_from_state,
    a_matrix,
    b_matrix,
    pvi_rhs,
    regularized_limits,
    seed_asymptotic,
    seed_logarithmic,
)

D_REAL = PviAsymptoticData(0.21, -0.33, 0.41, 0.52, 0.5, 1.1)
D_COMPLEX = PviAsymptoticData(0.21 + 0.04j, -0.33 - 0.06j, 0.41 + 0.07j,
                              0.52 - 0.03j, 0.3 + 0.1j, 1.1 - 0.4j)
D_MIXED = PviAsymptoticData(0.21 + 0.05j, -0.33 - 0.11j, 0.41 + 0.07j,
                            0.52 - 0.09j, 0.445 + 0.12j, 1.1 * cmath.exp(0.7j))


class TestPuiseuxSeries:
    """Finite Puiseux series on the (1 - sigma, sigma) exponent lattice."""

    SIGMA = 0.4 + 0.1j

    def test_monomial_evaluation(self):
        s = PuiseuxSeries.monomial(self.SIGMA, 10.0, (2, 1), 3.0 - 1.0j)
        x0 = 0.37
        want = (3.0 - 1.0j) * x0 ** (2 * (1 - self.SIGMA) + self.SIGMA)
        assert_allclose(s.evaluate(x0), want, rtol=1e-14)

    def test_ring_operations_match_pointwise(self):
        a = PuiseuxSeries(self.SIGMA, 10.0, {(1, 0): 2.0, (0, 1): 1.0 - 0.5j})
        b = PuiseuxSeries(self.SIGMA, 10.0, {(1, 1): -0.7, (2, 0): 0.3j})
        x0 = 0.21
        assert_allclose((a + b).evaluate(x0), a.evaluate(x0) + b.evaluate(x0), rtol=1e-14)
        assert_allclose((a - b).evaluate(x0), a.evaluate(x0) - b.evaluate(x0), rtol=1e-14)
        assert_allclose((a * b).evaluate(x0), a.evaluate(x0) * b.evaluate(x0), rtol=1e-13)
        assert_allclose(a.scale(2.0j).evaluate(x0), 2.0j * a.evaluate(x0), rtol=1e-14)

    def test_product_truncates_at_cap(self):
        a = PuiseuxSeries(self.SIGMA, 1.5, {(1, 0): 1.0, (1, 1): 1.0})
        b = PuiseuxSeries(self.SIGMA, 1.5, {(1, 0): 1.0})
        prod = a * b
        # (2, 1) has real exponent 2(1-s) + s = 1.6 > cap and must be dropped
        assert prod.coeff((2, 1)) == 0
        assert prod.coeff((2, 0)) == 1.0

    def test_derivative_shifts_lattice_keys(self):
        s = PuiseuxSeries.monomial(self.SIGMA, 10.0, (2, 1), 1.5)
        e = 2 * (1 - self.SIGMA) + self.SIGMA
        d = s.derivative()
        assert_allclose(d.coeff((1, 0)), 1.5 * e, rtol=1e-14)
        x0 = 0.3
        assert_allclose(d.evaluate(x0), 1.5 * e * x0 ** (e - 1), rtol=1e-14)

    def test_inverse_is_multiplicative_inverse(self):
        # truncation leaves a residual of order x^cap
        s = PuiseuxSeries(self.SIGMA, 4.0, {(0, 0): 1.0, (0, 1): 0.4, (1, 0): -0.2j})
        x0 = 0.01
        assert_allclose(s.inverse().evaluate(x0) * s.evaluate(x0), 1.0, rtol=1e-9)

    def test_primitive_splits_log_term(self):
        s = PuiseuxSeries(self.SIGMA, 4.0, {(-1, -1): 2.5, (0, 1): 1.0})
        g, prim = s.primitive_skip_log()
        assert g == 2.5
        e = self.SIGMA
        assert_allclose(prim.coeff((1, 2)), 1.0 / (e + 1), rtol=1e-14)

    def test_incompatible_series_rejected(self):
        a = PuiseuxSeries(0.4, 4.0, {(1, 0): 1.0})
        b = PuiseuxSeries(0.5, 4.0, {(1, 0): 1.0})
        with pytest.raises(DomainError):
            _ = a + b

    def test_evaluate_requires_positive_point(self):
        s = PuiseuxSeries.monomial(self.SIGMA, 4.0, (1, 0))
        with pytest.raises(DomainError):
            s.evaluate(0.0)


class TestSeeding:
    """Series seeds for the trajectory near x = 0."""

    def test_three_term_trivial_coefficients(self):
        # at theta1 = theta2 = 0 the subleading coefficients collapse to
        # 1/(16 J) and 1/2
        d = PviAsymptoticData(0.0, 0.0, 0.41, 0.52, 0.45, 1.3 - 0.2j)
        x0 = 1e-4
        seed = seed_asymptotic(d, x0, mode="three_term")
        s, J = d.sigma, d.J
        want_y = J * x0 ** (1 - s) + x0 ** (1 + s) / (16 * J) + x0 / 2
        want_yp = (J * (1 - s) * x0 ** (-s) + (1 + s) * x0 ** s / (16 * J) + 0.5)
        assert_allclose(seed.y, want_y, rtol=1e-13)
        assert_allclose(seed.yp, want_yp, rtol=1e-13)
        g1, g2 = gamma_exponents(d.thetas, s)
        assert_allclose(seed.w1, g1 * np.log(x0), rtol=1e-13)
        assert_allclose(seed.w2, g2 * np.log(x0), rtol=1e-13)

    def test_lattice_agrees_with_three_term_at_leading_orders(self):
        seed_l = seed_asymptotic(D_MIXED, 1e-4, mode="lattice")
        seed_3 = seed_asymptotic(D_MIXED, 1e-4, mode="three_term")
        assert abs(seed_l.y - seed_3.y) / abs(seed_l.y) < 0.05

    def test_seed_then_integrate_matches_higher_seed(self):
        # integrate up from a deep seed and compare against seeding directly
        # at the higher point; gauges compared at the k = exp(w) level (w
        # itself is only defined modulo the integration path)
        s_lo = seed_asymptotic(D_MIXED, 1e-4, target_rel=1e-10)
        pt = extend_trajectory(D_MIXED.thetas, s_lo, [1e-3], rtol=1e-12)[0]
        s_hi = seed_asymptotic(D_MIXED, 1e-3, mode="lattice")
        assert abs(pt.y - s_hi.y) / abs(s_hi.y) < 1e-6
        assert abs(pt.yp - s_hi.yp) / abs(s_hi.yp) < 5e-6
        assert abs(pt.k1 - cmath.exp(s_hi.w1)) / abs(cmath.exp(s_hi.w1)) < 1e-6
        assert abs(pt.k2 - cmath.exp(s_hi.w2)) / abs(cmath.exp(s_hi.w2)) < 1e-6

    def test_target_rel_moves_seed_down(self):
        seed = seed_asymptotic(D_MIXED, 1e-3, target_rel=1e-8)
        assert seed.x0 <= 1e-3
        assert seed.truncation_error <= 1e-8

    def test_seed_point_validation(self):
        with pytest.raises(DomainError):
            seed_asymptotic(D_MIXED, 0.6)
        with pytest.raises(DomainError):
            seed_asymptotic(D_MIXED, 1e-3, mode="mystery")

    def test_three_term_rejects_sigma_zero(self):
        d = PviAsymptoticData(0.25, -0.52, 0.31, 0.47, 0.0, 1.0)
        with pytest.raises(DomainError):
            seed_asymptotic(d, 1e-4, mode="three_term")

    def test_logarithmic_seed_self_consistency(self):
        # corrections in the log regime decay only logarithmically, so the
        # tolerance here is much looser than in the power-law regime
        thetas = (0.25, -0.52, 0.31, 0.47)
        s_lo = seed_logarithmic(thetas, 0.37, 1e-6)
        pt = extend_trajectory(thetas, s_lo, [1e-4], rtol=1e-12)[0]
        s_hi = seed_logarithmic(thetas, 0.37, 1e-4)
        assert abs(pt.y - s_hi.y) / abs(s_hi.y) < 5e-3
        assert abs(pt.yp - s_hi.yp) / abs(s_hi.yp) < 5e-3

    def test_logarithmic_seed_requires_distinct_thetas(self):
        with pytest.raises(DomainError):
            seed_logarithmic((0.3, 0.3, 0.1, 0.5), 1.0, 1e-4)


class TestTrajectory:
    """Upward integration and the residue matrices along the trajectory."""

    def test_extend_rejects_targets_below_seed(self):
        seed = seed_asymptotic(D_MIXED, 1e-3, mode="three_term")
        with pytest.raises(DomainError):
            extend_trajectory(D_MIXED.thetas, seed, [1e-4])

    def test_extend_empty_targets(self):
        seed = seed_asymptotic(D_MIXED, 1e-3, mode="three_term")
        assert extend_trajectory(D_MIXED.thetas, seed, []) == []

    def test_tolerance_consistency(self):
        seed = seed_asymptotic(D_COMPLEX, 1e-4, target_rel=1e-9)
        lo = extend_trajectory(D_COMPLEX.thetas, seed, [0.05], rtol=1e-9)[0]
        hi = extend_trajectory(D_COMPLEX.thetas, seed, [0.05], rtol=1e-12)[0]
        assert abs(lo.y - hi.y) / abs(hi.y) < 1e-7
        assert abs(lo.k1 - hi.k1) / abs(hi.k1) < 1e-7

    def test_residue_spectrum_is_conserved(self):
        # isomonodromy: the residue matrix keeps the spectrum
        # {0, (+-theta_inf - theta1 - theta2 - theta3)/2} at every x
        d = D_MIXED
        seed = seed_asymptotic(d, 1e-4, target_rel=1e-8)
        pts = extend_trajectory(d.thetas, seed, [1e-3, 1e-2, 0.05], rtol=1e-12)
        total = d.theta1 + d.theta2 + d.theta3
        want = sorted([0.0, (d.theta_inf - total) / 2, (-d.theta_inf - total) / 2],
                      key=lambda z: (complex(z).real, complex(z).imag))
        for pt in pts:
            om = omega_from_state(d.thetas, pt.x, pt.y, pt.yp, pt.k1, pt.k2)
            got = sorted(np.linalg.eigvals(om), key=lambda z: (z.real, z.imag))
            assert_allclose(got, want, rtol=0, atol=1e-11)

    def test_omega_diagonal(self):
        d = D_MIXED
        seed = seed_asymptotic(d, 1e-4, target_rel=1e-8)
        pt = extend_trajectory(d.thetas, seed, [1e-3])[0]
        om = omega_from_state(d.thetas, pt.x, pt.y, pt.yp, pt.k1, pt.k2)
        assert_allclose(np.diag(om), [-d.theta1, -d.theta2, -d.theta3], rtol=0, atol=0)

    def test_a_matrix_is_truncation_of_conjugated_omega(self):
        d = D_MIXED
        seed = seed_asymptotic(d, 1e-4, target_rel=1e-8)
        pt = extend_trajectory(d.thetas, seed, [1e-3])[0]
        a = a_matrix(d.thetas, pt)
        # delta_2 shape: zero outside the upper 2x2 block and the diagonal
        assert a[0, 2] == 0 and a[1, 2] == 0 and a[2, 0] == 0 and a[2, 1] == 0
        om = omega_from_state(d.thetas, pt.x, pt.y, pt.yp, pt.k1, pt.k2)
        lx = np.log(pt.x)
        e = np.exp(np.array([-lx * t for t in d.thetas[:3]], dtype=complex))
        conj = (e[:, None] * om) / e[None, :]
        assert_allclose(a[:2, :2], conj[:2, :2], rtol=0, atol=1e-15)

    def test_b_matrix_explicit_regulator_matches_default(self):
        d = D_MIXED
        seed = seed_asymptotic(d, 1e-4, target_rel=1e-8)
        pt = extend_trajectory(d.thetas, seed, [1e-3])[0]
        default = b_matrix(d, pt)
        explicit = b_matrix(d, pt, phi2=delta_k(arrow_q(d).phi0, 2))
        assert_allclose(default, explicit, rtol=0, atol=0)


class TestExtrapolation:
    """Power-law extrapolators on synthetic data."""

    def test_single_power_recovery(self):
        xs = [1e-4, 2e-4, 4e-4, 8e-4]
        limit, coeff, power = 1.3 - 0.7j, 0.9 + 0.2j, 0.62
        vals = [limit + coeff * x ** power for x in xs]
        got_l, got_p, got_c = extrapolate_single_power(xs, vals)
        assert_allclose(got_l, limit, rtol=1e-9)
        assert abs(got_p - power) < 1e-6
        assert_allclose(got_c, abs(coeff), rtol=1e-5)

    def test_single_power_flat_data(self):
        xs = [1e-4, 2e-4, 4e-4]
        vals = [2.0 + 1.0j] * 3
        got_l, got_p, _ = extrapolate_single_power(xs, vals)
        assert got_l == 2.0 + 1.0j
        assert got_p is None

    def test_single_power_needs_three_points(self):
        with pytest.raises(DomainError):
            extrapolate_single_power([1e-4, 2e-4], [1.0, 2.0])

    def test_known_powers_recovery(self):
        sigma = 0.3
        powers = correction_powers(sigma)
        xs = np.array([1e-5 * 2 ** j for j in range(8)])
        limit = np.array([[1.0, -2.0j], [0.5 + 0.5j, 3.0]])
        rng = np.random.default_rng(5)
        coeffs = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
                  for _ in powers]
        mats = [limit + sum(c * x ** p for c, p in zip(coeffs, powers)) for x in xs]
        got = extrapolate_known_powers(xs, mats, powers)
        assert_allclose(got, limit, rtol=1e-8, atol=1e-10)

    def test_correction_powers_sorted_and_deduplicated(self):
        assert correction_powers(0.5) == [0.5, 1.0]
        got = correction_powers(0.3)
        assert got == [0.3, 0.6, 0.7, 1.0]


class TestRegularizedLimits:
    """End-to-end ladder: the regularised families converge to the closed form."""

    def test_b_family_converges_to_boundary_value(self):
        rep = regularized_limits(D_REAL, x_small=1e-5, n_ladder=14, rtol=1e-11)
        phi0 = arrow_q(D_REAL).phi0
        assert np.max(np.abs(rep.b_limit - phi0)) < 1e-5
        assert np.max(np.abs(rep.b_limit_single - phi0)) < 1e-4

    def test_a_family_converges_to_truncated_boundary_value(self):
        rep = regularized_limits(D_REAL, x_small=1e-5, n_ladder=14, rtol=1e-11)
        assert np.max(np.abs(rep.a_limit - delta_k(arrow_q(D_REAL).phi0, 2))) < 1e-5

    def test_exponent_reports(self):
        # y correction: slope of y/(J x^(1-sigma)) - 1 -> min(Re s, 1 - Re s);
        # A-family decay: x^sigma corrections cancel -> 1 - Re s
        rep = regularized_limits(D_REAL, x_small=1e-5, n_ladder=14, rtol=1e-11)
        assert abs(rep.y_correction_exponent - 0.5) < 0.1
        assert abs(rep.decay_exponent - 0.5) < 0.1
        assert not rep.degraded

    def test_exponent_reports_complex_sigma(self):
        rep = regularized_limits(D_COMPLEX, x_small=1e-5, n_ladder=14, rtol=1e-11)
        assert abs(rep.y_correction_exponent - 0.3) < 0.1
        assert abs(rep.decay_exponent - 0.7) < 0.1
        phi0 = arrow_q(D_COMPLEX).phi0
        assert np.max(np.abs(rep.b_limit - phi0)) < 1e-5

    def test_degraded_flag_near_power_collision(self):
        # sigma = 0.52: the correction powers 0.52 and 0.48 nearly collide
        d = PviAsymptoticData(0.21, -0.33, 0.41, 0.52, 0.52, 1.1)
        rep = regularized_limits(d, x_small=1e-4, n_ladder=8, rtol=1e-10)
        assert rep.degraded

    def test_ladder_must_stay_small(self):
        with pytest.raises(DomainError, match="ladder"):
            regularized_limits(D_REAL, x_small=0.05, n_ladder=3)

    def test_rejects_nongeneric(self):
        d = PviAsymptoticData(1.0, -0.33, 0.41, 0.52, 0.5, 1.1)
        with pytest.raises(DomainError):
            regularized_limits(d)

    def test_ladder_metadata(self):
        rep = regularized_limits(D_REAL, x_small=1e-4, n_ladder=6, rtol=1e-10)
        assert len(rep.xs) == 6 == len(rep.a_values) == len(rep.b_values)
        assert rep.xs == sorted(rep.xs)
        assert rep.seed.x0 < rep.xs[0]
        assert rep.seed.truncation_error <= 1e-8


class TestRhsSeriesConsistency:
    """The lattice series and the direct right-hand side validate each other."""

    def test_series_second_derivative_matches_rhs(self):
        from isolab.pvi_trajectory import _solve_lattice_series

        y_series, _ = _solve_lattice_series(D_MIXED, 2.2)
        x0 = 1e-3
        y0 = y_series.evaluate(x0)
        yp0 = y_series.derivative().evaluate(x0)
        ypp0 = y_series.derivative().derivative().evaluate(x0)
        out = pvi_rhs(D_MIXED.thetas)(x0, np.array([y0, yp0, 0.0, 0.0], dtype=complex))
        assert out[0] == yp0
        assert abs(out[1] - ypp0) / abs(ypp0) < 1e-4
