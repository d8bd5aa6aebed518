"""Special-function unit tests against independently computed reference
values (frozen from a 40-digit arbitrary-precision computation) and
structural identities."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from besselreg.specfun import (
    SpecFunDomainError,
    bessel_k_scaled,
    bessel_k_scaled_123,
    exp_integral_e1,
    exp_integral_e1_scaled,
    log_bessel_k,
)

# frozen reference values (40-digit arbitrary-precision computation)
E_K1_AT_1 = 1.6361534862632582       # e^1 * K_1(1)
LOG_K2_AT_5 = -5.2383623877680453    # log K_2(5)
E1_AT_1 = 0.21938393439552027        # E_1(1)
E1_AT_5 = 0.0011482955912753258      # E_1(5)


class TestFrozenOracles:
    def test_k1_scaled_at_1(self):
        assert bessel_k_scaled(1, 1.0) == pytest.approx(E_K1_AT_1, rel=1e-14)

    def test_log_k2_at_5(self):
        assert log_bessel_k(2, 5.0) == pytest.approx(LOG_K2_AT_5, rel=1e-14)

    def test_e1_at_1(self):
        assert exp_integral_e1(1.0) == pytest.approx(E1_AT_1, rel=1e-14)

    def test_e1_at_5(self):
        assert exp_integral_e1(5.0) == pytest.approx(E1_AT_5, rel=1e-13)


class TestRecurrence:
    def test_three_term_recurrence_on_log_grid(self):
        # K_{n+1}(x) = K_{n-1}(x) + (2n/x) K_n(x), scaling cancels
        x = np.logspace(-6, np.log10(600.0), 400)
        k0 = bessel_k_scaled(0, x)
        k1 = bessel_k_scaled(1, x)
        k2 = bessel_k_scaled(2, x)
        k3 = bessel_k_scaled(3, x)
        np.testing.assert_allclose(k2, k0 + 2.0 / x * k1, rtol=1e-10)
        np.testing.assert_allclose(k3, k1 + 4.0 / x * k2, rtol=1e-10)

    def test_batched_matches_single_order(self):
        x = np.logspace(-5, 5, 50)
        k1, k2, k3 = bessel_k_scaled_123(x)
        np.testing.assert_array_equal(k1, bessel_k_scaled(1, x))
        np.testing.assert_array_equal(k2, bessel_k_scaled(2, x))
        np.testing.assert_array_equal(k3, bessel_k_scaled(3, x))

    def test_branch_seams_are_continuous(self):
        for seam in (2.0, 500.0):
            below = bessel_k_scaled(1, seam * (1 - 1e-12))
            above = bessel_k_scaled(1, seam * (1 + 1e-12))
            assert below == pytest.approx(above, rel=1e-10)


class TestQuadratureAgreement:
    def test_k_against_integral_representation(self):
        # K_n(x) = int_0^inf e^{-x cosh t} cosh(n t) dt
        rng = np.random.default_rng(42)
        xs = np.exp(rng.uniform(np.log(0.05), np.log(30.0), size=100))
        for x in xs:
            order = rng.integers(0, 4)
            ref, _ = quad(
                lambda t: np.exp(-x * np.cosh(t) + x) * np.cosh(order * t),
                0.0, 60.0, limit=300)
            assert bessel_k_scaled(int(order), x) == pytest.approx(ref, rel=1e-9)

    def test_e1_against_quadrature(self):
        rng = np.random.default_rng(7)
        for x in np.exp(rng.uniform(np.log(0.01), np.log(20.0), size=30)):
            ref, _ = quad(lambda u: np.exp(-x * u) / u, 1.0, np.inf, limit=200)
            assert exp_integral_e1(x) == pytest.approx(ref, rel=1e-9)


class TestDerivativesAndAsymptotes:
    def test_e1_derivative_identity(self):
        # d/dx E1(x) = -e^{-x}/x, checked by central differences
        for x in (0.3, 1.0, 4.0, 12.0):
            h = 1e-6 * x
            fd = (exp_integral_e1(x + h) - exp_integral_e1(x - h)) / (2 * h)
            assert fd == pytest.approx(-np.exp(-x) / x, rel=1e-6)

    def test_small_x_k0_log_asymptote(self):
        x = 1e-7
        assert bessel_k_scaled(0, x) == pytest.approx(
            np.exp(x) * (-np.log(x / 2.0) - 0.5772156649015329), rel=1e-7)

    def test_small_x_k1_pole(self):
        x = 1e-7
        assert bessel_k_scaled(1, x) * x == pytest.approx(1.0, rel=1e-6)

    def test_large_x_prefactor(self):
        x = 1e8
        assert bessel_k_scaled(0, x) == pytest.approx(
            np.sqrt(np.pi / (2 * x)), rel=1e-7)

    def test_e1_scaled_large_x(self):
        # e^x E1(x) ~ 1/x for large x
        x = 1e8
        assert exp_integral_e1_scaled(x) * x == pytest.approx(1.0, rel=1e-6)


class TestDomainErrors:
    @pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
    def test_k_rejects_nonpositive(self, bad):
        with pytest.raises(SpecFunDomainError):
            bessel_k_scaled(1, bad)

    def test_k_rejects_unsupported_order(self):
        with pytest.raises(SpecFunDomainError):
            bessel_k_scaled(4, 1.0)

    @pytest.mark.parametrize("bad", [0.0, -2.0, np.nan])
    def test_e1_rejects_nonpositive(self, bad):
        with pytest.raises(SpecFunDomainError):
            exp_integral_e1(bad)

    def test_array_with_one_bad_element_rejected(self):
        with pytest.raises(SpecFunDomainError):
            bessel_k_scaled(1, np.array([1.0, -1.0]))


@given(st.floats(min_value=1e-6, max_value=1e6))
@settings(max_examples=60, deadline=None)
def test_k_orders_increase(x):
    # K_0(x) < K_1(x) < K_2(x) < K_3(x) for every x > 0
    k0 = bessel_k_scaled(0, x)
    k1, k2, k3 = bessel_k_scaled_123(x)
    assert 0.0 < k0 < k1 < k2 < k3


@given(st.floats(min_value=1e-6, max_value=700.0))
@settings(max_examples=60, deadline=None)
def test_e1_scaled_bounds(x):
    # 1/(x+1) < e^x E1(x) < 1/x
    s = exp_integral_e1_scaled(x)
    assert 1.0 / (x + 1.0) < s < 1.0 / x
