"""Residuals, simulated envelopes, predictive cross-validation (RSS and
FSMD) and iterative VIF covariate selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import norm
from scipy.special import betainc, expit

from .distributions import bessel_cdf_many, g_bessel, g_beta
from .regression import Dataset, FitResult, Theta, fit_beta_ml, fit_bessel_em, mu_of, phi_of

_CDF_CLAMP = 1e-12


@dataclass
class EnvelopeResult:
    sorted_observed_residuals: np.ndarray
    lower_band: np.ndarray
    upper_band: np.ndarray
    band_mean: np.ndarray
    theoretical_quantiles: np.ndarray
    coverage_pct: float
    replications: int
    dropped: int
    model_tag: str
    residual_kind: str


@dataclass
class CVResult:
    rss_bessel: np.ndarray
    rss_beta: np.ndarray
    fsmd_bessel: np.ndarray
    fsmd_beta: np.ndarray
    test_size: int
    seed: int
    dropped: int = 0

    @property
    def rss_ratio(self):
        return self.rss_bessel / self.rss_beta

    @property
    def fsmd_ratio(self):
        return self.fsmd_bessel / self.fsmd_beta


def _g_of(model_tag, phi):
    return g_bessel(phi) if model_tag == "bessel" else g_beta(phi)


def pearson_residuals(fit: FitResult, data: Dataset):
    """(z - mu_hat) / sqrt(mu_hat (1-mu_hat) g(phi_hat))."""
    mu = mu_of(fit.theta_hat, data)
    phi = phi_of(fit.theta_hat, data)
    return (data.z - mu) / np.sqrt(mu * (1.0 - mu) * _g_of(fit.model_tag, phi))


def quantile_residuals(fit: FitResult, data: Dataset,
                       return_clamp_count: bool = False):
    """Normal quantile of the fitted CDF at each observation.

    CDF values are clamped to [1e-12, 1-1e-12] before inversion; pass
    return_clamp_count=True to also get the number of clamped points.
    """
    mu = mu_of(fit.theta_hat, data)
    phi = phi_of(fit.theta_hat, data)
    if fit.model_tag == "bessel":
        F = bessel_cdf_many(mu, phi, data.z)
    else:
        F = betainc(mu * phi, (1.0 - mu) * phi, data.z)
    clamped = int(np.count_nonzero((F < _CDF_CLAMP) | (F > 1.0 - _CDF_CLAMP)))
    r = norm.ppf(np.clip(F, _CDF_CLAMP, 1.0 - _CDF_CLAMP))
    return (r, clamped) if return_clamp_count else r


def _simulate_responses(model_tag, mu, phi, rng):
    if model_tag == "bessel":
        # ratio of inverse-Gaussians with mean = variance = shape param
        a1 = mu * phi
        a2 = (1.0 - mu) * phi
        y1 = rng.wald(a1, a1 ** 2)
        y2 = rng.wald(a2, a2 ** 2)
        out = y1 / (y1 + y2)
    else:
        g1 = rng.gamma(mu * phi, 1.0)
        g2 = rng.gamma((1.0 - mu) * phi, 1.0)
        out = g1 / (g1 + g2)
    return np.clip(out, 1e-9, 1.0 - 1e-9)


def _refit(model_tag, data, init):
    if model_tag == "bessel":
        return fit_bessel_em(data, init=init)
    return fit_beta_ml(data, init=init)


def blom_quantiles(n):
    """Standard-normal plotting positions (i - 3/8)/(n + 1/4)."""
    i = np.arange(1, n + 1)
    return norm.ppf((i - 0.375) / (n + 0.25))


def simulated_envelope(
    fit: FitResult,
    data: Dataset,
    B: int = 1000,
    coverage: float = 0.95,
    residual_kind: str = "pearson",
    seed: int = 0,
    n_jobs: int = -1,
) -> EnvelopeResult:
    """Monte Carlo envelope for sorted residuals.

    B datasets are simulated from the fitted model with the original
    covariates, each is refit and its residuals computed; the B x n
    residual matrix is sorted along rows then columns and the band is
    read off the rows at the coverage quantiles. Refits that fail are
    retried once with a jittered start, then dropped.
    """
    if residual_kind not in ("pearson", "quantile"):
        raise ValueError(f"unknown residual_kind {residual_kind!r}")
    mu = mu_of(fit.theta_hat, data)
    phi = phi_of(fit.theta_hat, data)
    resfun = pearson_residuals if residual_kind == "pearson" else quantile_residuals
    obs = np.sort(resfun(fit, data))
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(B)

    def one(child):
        rng = np.random.default_rng(child)
        zsim = _simulate_responses(fit.model_tag, mu, phi, rng)
        sim = Dataset(zsim, data.X, data.V,
                      list(data.x_names), list(data.v_names))
        for attempt in range(2):
            try:
                init = fit.theta_hat if attempt == 0 else Theta(
                    fit.theta_hat.kappa + 0.05 * rng.standard_normal(data.p),
                    fit.theta_hat.lam + 0.05 * rng.standard_normal(data.q),
                )
                f = _refit(fit.model_tag, sim, init)
                r = resfun(f, sim)
                if np.all(np.isfinite(r)):
                    return r
            except Exception:
                continue
        return None

    rows = Parallel(n_jobs=n_jobs)(delayed(one)(c) for c in children)
    good = [r for r in rows if r is not None]
    dropped = B - len(good)
    R = np.vstack(good)
    R = np.sort(R, axis=1)   # sort rows
    R = np.sort(R, axis=0)   # then columns
    b_eff = R.shape[0]
    lo_idx = int(np.ceil(b_eff * (1.0 - coverage) / 2.0)) - 1
    hi_idx = int(np.floor(b_eff * (1.0 + coverage) / 2.0)) - 1
    lower = R[max(lo_idx, 0)]
    upper = R[min(hi_idx, b_eff - 1)]
    mean = R.mean(axis=0)
    inside = (obs >= lower) & (obs <= upper)
    return EnvelopeResult(
        sorted_observed_residuals=obs,
        lower_band=lower,
        upper_band=upper,
        band_mean=mean,
        theoretical_quantiles=blom_quantiles(data.n),
        coverage_pct=100.0 * float(np.count_nonzero(inside)) / data.n,
        replications=b_eff,
        dropped=dropped,
        model_tag=fit.model_tag,
        residual_kind=residual_kind,
    )


def _predictive_stats(fitres, model_tag, z_test, X_test, V_test):
    theta = fitres.theta_hat
    mu = expit(X_test @ theta.kappa)
    phi = np.exp(V_test @ theta.lam)
    g = _g_of(model_tag, phi)
    var = mu * (1.0 - mu) * g
    r = (z_test - mu) / np.sqrt(var)
    ez2 = var + mu ** 2
    s = np.abs(z_test - mu) + np.abs(z_test ** 2 - ez2)
    return float(np.sum(r ** 2)), float(np.sum(s))


def cross_validate(
    data: Dataset,
    test_size: int = 10,
    partitions: int = 1000,
    seed: int = 0,
    n_jobs: int = -1,
) -> CVResult:
    """Random train/test partitions; both models are fit on every
    training set and scored on the held-out responses with RSS (squared
    Pearson residuals) and FSMD (first and second moment distances).
    Both models always see the identical split."""
    if data.n <= test_size + data.p + data.q:
        raise ValueError("dataset too small for the requested test size")
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(partitions)

    def one(child):
        rng = np.random.default_rng(child)
        test_idx = rng.choice(data.n, size=test_size, replace=False)
        mask = np.zeros(data.n, dtype=bool)
        mask[test_idx] = True
        train = Dataset(data.z[~mask], data.X[~mask], data.V[~mask],
                        list(data.x_names), list(data.v_names))
        try:
            fb = fit_bessel_em(train)
            ft = fit_beta_ml(train)
        except Exception:
            return None
        zt, Xt, Vt = data.z[mask], data.X[mask], data.V[mask]
        rb, sb = _predictive_stats(fb, "bessel", zt, Xt, Vt)
        rt, st = _predictive_stats(ft, "beta", zt, Xt, Vt)
        return rb, rt, sb, st

    rows = Parallel(n_jobs=n_jobs)(delayed(one)(c) for c in children)
    good = [r for r in rows if r is not None]
    dropped = partitions - len(good)
    arr = np.asarray(good)
    return CVResult(
        rss_bessel=arr[:, 0], rss_beta=arr[:, 1],
        fsmd_bessel=arr[:, 2], fsmd_beta=arr[:, 3],
        test_size=test_size, seed=seed, dropped=dropped,
    )


@dataclass
class VIFStep:
    column: str
    vif: float


def vif_select(candidate_matrix, names=None, threshold: float = 5.0):
    """Iterative variance-inflation-factor pruning.

    Each column is OLS-regressed on the others; the largest VIF at or
    above the threshold is removed, until all VIFs fall below it.
    Returns (kept column names, removal trace).
    """
    M = np.atleast_2d(np.asarray(candidate_matrix, dtype=float))
    k = M.shape[1]
    if names is None:
        names = [f"c{j}" for j in range(k)]
    if k < 2:
        raise ValueError("need at least two candidate columns")
    cols = list(range(k))
    trace: list[VIFStep] = []
    while len(cols) >= 2:
        vifs = []
        for j in cols:
            others = [c for c in cols if c != j]
            A = np.column_stack([np.ones(M.shape[0]), M[:, others]])
            y = M[:, j]
            coef, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
            resid = y - A @ coef
            tss = float(np.sum((y - y.mean()) ** 2))
            rss = float(resid @ resid)
            if tss <= 0 or rss <= 1e-12 * tss:
                vifs.append(np.inf)
            else:
                r2 = 1.0 - rss / tss
                vifs.append(1.0 / (1.0 - r2))
        worst = int(np.argmax(vifs))
        if vifs[worst] < threshold:
            break
        trace.append(VIFStep(names[cols[worst]], float(vifs[worst])))
        cols.pop(worst)
    return [names[c] for c in cols], trace
