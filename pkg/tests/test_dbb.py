"""Discrimination-test unit and property tests."""

import numpy as np
import pytest

from besselreg.dbb import dbb_test, decide, quasi_score, solve_ql
from besselreg.regression import Dataset
from conftest import random_dataset


class TestDecisionRule:
    def test_smaller_abs_d_wins(self):
        assert decide(0.001, 0.002) == "bessel"
        assert decide(-0.001, 0.0005) == "beta"
        assert decide(0.003, -0.002) == "beta"

    def test_tie_goes_to_bessel(self):
        assert decide(0.002, 0.002) == "bessel"
        assert decide(-0.002, 0.002) == "bessel"
        assert decide(0.0, 0.0) == "bessel"


class TestPrecheck:
    def test_high_dispersion_short_circuits_to_beta(self):
        # responses on both extremes make the sample second moment exceed
        # the largest second moment any fitted model can produce
        z = np.tile([0.01, 0.99], 30)
        data = Dataset(z, np.ones((60, 1)), np.ones((60, 1)))
        rep = dbb_test(data)
        assert rep.precheck_beta
        assert rep.decision == "beta"
        assert rep.d_bessel is None and rep.d_beta is None
        assert rep.mean_sq_response >= rep.variance_bound

    def test_precheck_dominance(self):
        # whenever T >= B the decision is beta regardless of anything else
        rng = np.random.default_rng(4)
        for _ in range(5):
            n = 50
            z = np.clip(rng.choice([0.02, 0.98], size=n), 1e-6, 1 - 1e-6)
            data = Dataset(z, np.ones((n, 1)), np.ones((n, 1)))
            rep = dbb_test(data)
            if rep.mean_sq_response >= rep.variance_bound:
                assert rep.decision == "beta" and rep.precheck_beta


class TestQuasiLikelihood:
    def test_intercept_only_root_is_sample_mean(self):
        rng = np.random.default_rng(8)
        z = rng.uniform(0.1, 0.9, 100)
        data = Dataset(z, np.ones((100, 1)), np.ones((100, 1)))
        kappa = solve_ql(data)
        from scipy.special import expit
        assert float(expit(kappa[0])) == pytest.approx(z.mean(), abs=1e-10)

    def test_score_zero_at_root(self):
        rng = np.random.default_rng(9)
        data = random_dataset(rng, n=120, p=3)
        kappa = solve_ql(data)
        assert np.linalg.norm(quasi_score(kappa, data), np.inf) < 1e-7 * data.n

    def test_invariant_under_design_reparameterization(self):
        # replacing X by X A (A invertible) maps kappa to A^{-1} kappa and
        # leaves the fitted means unchanged
        from scipy.special import expit
        rng = np.random.default_rng(10)
        data = random_dataset(rng, n=150, p=3)
        A = np.array([[1.0, 0.3, 0.0], [0.0, 1.0, -0.2], [0.0, 0.5, 1.0]])
        data2 = Dataset(data.z, data.X @ A, data.V)
        k1 = solve_ql(data)
        k2 = solve_ql(data2)
        np.testing.assert_allclose(A @ k2, k1, atol=1e-7)
        np.testing.assert_allclose(expit(data2.X @ k2), expit(data.X @ k1),
                                   atol=1e-8)


class TestConsistency:
    def test_selects_generator_at_large_n(self):
        from besselreg.simstudy import MCConfig, gen_dataset
        base = dict(n=4000, replications=1, master_seed=314,
                    covariate_scheme="constant_precision",
                    true_lambda=(1.0,))
        bes = gen_dataset(MCConfig(generator="bessel", **base), 0)
        bet = gen_dataset(MCConfig(generator="beta", **base), 0)
        assert dbb_test(bes).decision == "bessel"
        assert dbb_test(bet).decision == "beta"

    def test_report_fields_populated(self, sa_data):
        rep = dbb_test(sa_data)
        assert rep.decision in ("bessel", "beta")
        assert rep.mu_tilde.shape == (sa_data.n,)
        assert rep.lambda_tilde_bessel is not None
        assert rep.variance_bound_sum == pytest.approx(
            rep.variance_bound * sa_data.n)
