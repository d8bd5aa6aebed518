"""Diagnostics tests: residual definitions, envelope mechanics at reduced
replication counts, cross-validation bookkeeping, and VIF selection."""

import numpy as np
import pytest
from scipy.stats import norm

from besselreg.diagnostics import (
    blom_quantiles,
    cross_validate,
    pearson_residuals,
    quantile_residuals,
    simulated_envelope,
    vif_select,
)
from besselreg.distributions import g_bessel, g_beta
from besselreg.regression import mu_of, phi_of
from conftest import random_dataset


class TestResiduals:
    def test_pearson_definition(self, sa_data, sa_bessel_fit):
        r = pearson_residuals(sa_bessel_fit, sa_data)
        mu = mu_of(sa_bessel_fit.theta_hat, sa_data)
        phi = phi_of(sa_bessel_fit.theta_hat, sa_data)
        expected = (sa_data.z - mu) / np.sqrt(mu * (1 - mu) * g_bessel(phi))
        np.testing.assert_allclose(r, expected, rtol=1e-12)

    def test_pearson_beta_uses_beta_g(self, sa_data, sa_beta_fit):
        r = pearson_residuals(sa_beta_fit, sa_data)
        mu = mu_of(sa_beta_fit.theta_hat, sa_data)
        phi = phi_of(sa_beta_fit.theta_hat, sa_data)
        expected = (sa_data.z - mu) / np.sqrt(mu * (1 - mu) * g_beta(phi))
        np.testing.assert_allclose(r, expected, rtol=1e-12)

    def test_quantile_residuals_roughly_normal(self, sa_data, sa_bessel_fit):
        r = quantile_residuals(sa_bessel_fit, sa_data)
        assert np.all(np.isfinite(r))
        assert abs(np.mean(r)) < 0.3
        assert 0.5 < np.std(r) < 1.5

    def test_quantile_clamp_count_reported(self, sa_data, sa_bessel_fit):
        r, clamped = quantile_residuals(sa_bessel_fit, sa_data,
                                        return_clamp_count=True)
        assert clamped >= 0
        assert r.shape == (sa_data.n,)

    def test_quantile_monotone_in_z_for_common_mu(self):
        # with identical covariates, larger z means larger residual
        from besselreg.regression import Dataset, fit_bessel_em
        rng = np.random.default_rng(0)
        z = np.sort(rng.uniform(0.1, 0.9, 50))
        data = Dataset(z, np.ones((50, 1)), np.ones((50, 1)))
        fit = fit_bessel_em(data)
        r = quantile_residuals(fit, data)
        assert np.all(np.diff(r) >= -1e-9)


class TestBlom:
    def test_positions(self):
        q = blom_quantiles(5)
        expected = norm.ppf((np.arange(1, 6) - 0.375) / 5.25)
        np.testing.assert_allclose(q, expected, rtol=1e-12)

    def test_symmetry(self):
        q = blom_quantiles(11)
        np.testing.assert_allclose(q, -q[::-1], atol=1e-12)


@pytest.fixture(scope="module")
def small_env(sa_data, sa_bessel_fit):
    return simulated_envelope(sa_bessel_fit, sa_data, B=40, seed=123,
                              n_jobs=1)


class TestEnvelope:
    def test_band_order(self, small_env, sa_data):
        assert small_env.lower_band.shape == (sa_data.n,)
        assert np.all(small_env.lower_band <= small_env.band_mean + 1e-12)
        assert np.all(small_env.band_mean <= small_env.upper_band + 1e-12)

    def test_bands_monotone(self, small_env):
        assert np.all(np.diff(small_env.lower_band) >= -1e-12)
        assert np.all(np.diff(small_env.upper_band) >= -1e-12)

    def test_coverage_in_range(self, small_env):
        assert 0.0 <= small_env.coverage_pct <= 100.0

    def test_deterministic_given_seed(self, sa_data, sa_bessel_fit, small_env):
        again = simulated_envelope(sa_bessel_fit, sa_data, B=40, seed=123,
                                   n_jobs=1)
        np.testing.assert_array_equal(again.lower_band, small_env.lower_band)
        np.testing.assert_array_equal(again.upper_band, small_env.upper_band)

    def test_worker_count_does_not_change_result(self, sa_data, sa_bessel_fit,
                                                 small_env):
        two = simulated_envelope(sa_bessel_fit, sa_data, B=40, seed=123,
                                 n_jobs=2)
        np.testing.assert_array_equal(two.lower_band, small_env.lower_band)

    def test_rejects_unknown_residual_kind(self, sa_data, sa_bessel_fit):
        with pytest.raises(ValueError):
            simulated_envelope(sa_bessel_fit, sa_data, B=5,
                               residual_kind="deviance", seed=1)

    def test_band_row_indices(self, sa_data, sa_bessel_fit):
        # with B=40 and 95% coverage, band rows are the 1st and 38th
        # order statistics per column (ceil(40*0.025)=1, floor(40*0.975)=39)
        env = simulated_envelope(sa_bessel_fit, sa_data, B=40, seed=5,
                                 coverage=0.95, n_jobs=1)
        assert env.replications + env.dropped == 40


class TestCrossValidate:
    def test_shapes_and_shared_splits(self, sa_data):
        res = cross_validate(sa_data, test_size=10, partitions=8, seed=42,
                             n_jobs=1)
        assert res.rss_bessel.shape == res.rss_beta.shape
        assert res.rss_bessel.size + res.dropped == 8
        assert np.all(res.rss_bessel > 0) and np.all(res.fsmd_beta > 0)

    def test_deterministic(self, sa_data):
        a = cross_validate(sa_data, test_size=10, partitions=5, seed=7,
                           n_jobs=1)
        b = cross_validate(sa_data, test_size=10, partitions=5, seed=7,
                           n_jobs=2)
        np.testing.assert_array_equal(a.rss_bessel, b.rss_bessel)
        np.testing.assert_array_equal(a.fsmd_beta, b.fsmd_beta)

    def test_too_small_dataset_rejected(self):
        rng = np.random.default_rng(1)
        data = random_dataset(rng, n=12)
        with pytest.raises(ValueError):
            cross_validate(data, test_size=10, partitions=2, seed=0)


class TestVIF:
    def test_independent_columns_all_kept(self):
        rng = np.random.default_rng(2)
        M = rng.standard_normal((200, 4))
        kept, trace = vif_select(M, ["a", "b", "c", "d"])
        assert kept == ["a", "b", "c", "d"]
        assert trace == []

    def test_exact_collinearity_detected(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(100)
        M = np.column_stack([x, 2 * x, rng.standard_normal(100)])
        kept, trace = vif_select(M, ["x", "x2", "y"])
        assert len(trace) == 1 and np.isinf(trace[0].vif)
        assert "y" in kept and len(kept) == 2

    def test_removal_order_is_largest_first(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal(300)
        b = rng.standard_normal(300)
        M = np.column_stack([a, b, a + 0.05 * rng.standard_normal(300),
                             b + 0.5 * rng.standard_normal(300)])
        kept, trace = vif_select(M, ["a", "b", "a_close", "b_loose"])
        assert trace[0].column in ("a", "a_close")
        assert all(t.vif >= 5.0 for t in trace)

    def test_threshold_respected(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal(300)
        M = np.column_stack([a, a + 0.6 * rng.standard_normal(300),
                             rng.standard_normal(300)])
        kept_strict, _ = vif_select(M, ["a", "b", "c"], threshold=1.5)
        kept_loose, _ = vif_select(M, ["a", "b", "c"], threshold=50.0)
        assert len(kept_strict) < 3 and len(kept_loose) == 3

    def test_needs_two_columns(self):
        with pytest.raises(ValueError):
            vif_select(np.ones((10, 1)))
