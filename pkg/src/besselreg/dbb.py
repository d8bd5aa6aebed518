"""DBB criterion: discrimination between the bessel and beta regressions.

The mean structure is estimated once by quasi-likelihood (distribution
free), the precision structure is re-estimated under each candidate
model with the means frozen, and the sample second moment is compared
against each model's implied second moment. Ties go to bessel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .distributions import g_bessel, g_beta
from .regression import (
    Dataset,
    FitError,
    _estep_vec,
    _newton_max,
    _zeta2,
    bfgs_minimize,
    default_init,
)


class QLSolveError(RuntimeError):
    """Newton failed to solve the quasi-likelihood estimating equation."""


@dataclass
class DBBReport:
    mean_sq_response: float
    variance_bound: float            # mean of mu~(1-mu~)/2 + mu~^2
    variance_bound_sum: float        # raw sum, for comparability with reports
    d_bessel: float | None
    d_beta: float | None
    decision: str
    mu_tilde: np.ndarray = field(repr=False, default=None)
    phi_tilde_bessel: np.ndarray = field(repr=False, default=None)
    phi_tilde_beta: np.ndarray = field(repr=False, default=None)
    lambda_tilde_bessel: np.ndarray = None
    lambda_tilde_beta: np.ndarray = None
    kappa_tilde: np.ndarray = None
    precheck_beta: bool = False


def quasi_score(kappa, data: Dataset):
    """Quasi-likelihood score for the mean under the logit link.

    With working variance mu(1-mu) and canonical link the weight
    (dmu/deta)/V(mu) collapses to 1, leaving U_QL = sum (z_i - mu_i) x_i.
    """
    mu = expit(data.X @ np.asarray(kappa, dtype=float))
    return data.X.T @ (data.z - mu)


def solve_ql(data: Dataset, max_restarts: int = 4):
    """Root of the quasi-likelihood estimating equation by damped Newton
    with a finite-difference Jacobian. Independent of the precision fit."""
    tol = 1e-10 * data.n
    kappa = default_init(data, "bessel").kappa

    def jac(k):
        J = np.empty((data.p, data.p))
        for j in range(data.p):
            h = 1e-6 * max(1.0, abs(k[j]))
            e = np.zeros(data.p)
            e[j] = h
            J[:, j] = (quasi_score(k + e, data) - quasi_score(k - e, data)) / (2 * h)
        return J

    for attempt in range(max_restarts + 1):
        k = kappa + (0.0 if attempt == 0 else 0.5 * attempt * np.random.default_rng(attempt).standard_normal(data.p))
        for _ in range(200):
            u = quasi_score(k, data)
            if np.linalg.norm(u, np.inf) <= tol:
                return k
            try:
                step = np.linalg.solve(jac(k), u)
            except np.linalg.LinAlgError:
                break
            # damped update: halve until the residual shrinks
            t = 1.0
            base = np.linalg.norm(u)
            for _h in range(40):
                cand = k - t * step
                if np.linalg.norm(quasi_score(cand, data)) < base:
                    k = cand
                    break
                t /= 2.0
            else:
                break
        u = quasi_score(k, data)
        if np.linalg.norm(u, np.inf) <= tol:
            return k
    raise QLSolveError(
        f"quasi-likelihood Newton failed; residual {np.linalg.norm(u, np.inf):.3e}"
    )


def _q_lambda(lam, psi, mu, data: Dataset):
    phi = np.exp(data.V @ lam)
    zt2 = _zeta2(data.z, mu)
    return float(np.sum(2.0 * np.log(phi) + phi - 0.5 * psi * phi ** 2 * zt2))


def _q_lambda_grad(lam, psi, mu, data: Dataset):
    phi = np.exp(data.V @ lam)
    zt2 = _zeta2(data.z, mu)
    return data.V.T @ ((2.0 + phi - psi * phi ** 2 * zt2))


def _q_lambda_pieces(lam, psi, mu, data: Dataset):
    """(value, gradient, negative Hessian) of the lambda-block Q-function."""
    phi = np.exp(data.V @ lam)
    zt2 = _zeta2(data.z, mu)
    q = float(np.sum(2.0 * np.log(phi) + phi - 0.5 * psi * phi ** 2 * zt2))
    grad = data.V.T @ (2.0 + phi - psi * phi ** 2 * zt2)
    h_ll = (2.0 * phi * psi * zt2 - 1.0) * phi
    return q, grad, data.V.T @ (h_ll[:, None] * data.V)


def fit_precision_fixed_mu(data: Dataset, mu_tilde, model: str,
                           epsilon: float = 1e-5, max_iter: int = 10000):
    """Estimate the precision coefficients with all means frozen.

    bessel: EM restricted to the lambda block; beta: direct ML in lambda.
    Returns (lambda_tilde, phi_tilde).
    """
    mu_tilde = np.asarray(mu_tilde, dtype=float)
    lam = default_init(data, model).lam
    if model == "bessel":
        for _ in range(max_iter):
            phi = np.exp(data.V @ lam)
            psi, _ = _estep_vec(mu_tilde, phi, data.z)
            new = _newton_max(
                lambda l: _q_lambda_pieces(l, psi, mu_tilde, data),
                lambda l: _q_lambda(l, psi, mu_tilde, data),
                lam, gtol=1e-8, maxiter=200,
            )
            delta = np.linalg.norm(new - lam) / max(np.linalg.norm(lam), 1e-300)
            lam = new
            if delta < epsilon:
                break
    elif model == "beta":
        from scipy.special import digamma, gammaln

        @np.errstate(over="ignore", invalid="ignore")
        def negll_and_grad(l):
            # beta likelihood in lambda only, means frozen at mu_tilde;
            # wild line-search trials may overflow exp and yield nan,
            # which the optimizer's finiteness check rejects
            phi = np.exp(data.V @ l)
            a = mu_tilde * phi
            b = (1.0 - mu_tilde) * phi
            ll = np.sum(
                gammaln(phi) - gammaln(a) - gammaln(b)
                + (a - 1.0) * np.log(data.z) + (b - 1.0) * np.log1p(-data.z)
            )
            zstar = np.log(data.z / (1.0 - data.z))
            mustar = digamma(a) - digamma(b)
            gl = phi * (
                mu_tilde * (zstar - mustar) + np.log1p(-data.z)
                - digamma(b) + digamma(phi)
            )
            return -float(ll), -(data.V.T @ gl)

        lam = bfgs_minimize(negll_and_grad, lam, gtol=1e-8, maxiter=2000)
    else:
        raise ValueError(f"unknown model {model!r}")
    if not np.all(np.isfinite(lam)):
        raise FitError("precision fit diverged")
    return lam, np.exp(data.V @ lam)


def decide(d_bessel: float, d_beta: float) -> str:
    """Decision rule on the second-moment discrepancies: the model with
    the smaller |D| wins; ties go to bessel."""
    return "bessel" if abs(d_bessel) <= abs(d_beta) else "beta"


def dbb_test(data: Dataset) -> DBBReport:
    """Run the full discrimination procedure on a dataset."""
    kappa_t = solve_ql(data)
    mu_t = expit(data.X @ kappa_t)
    T = float(np.mean(data.z ** 2))
    bound_terms = 0.5 * mu_t * (1.0 - mu_t) + mu_t ** 2
    B = float(np.mean(bound_terms))
    B_sum = float(np.sum(bound_terms))
    if T >= B:
        return DBBReport(
            mean_sq_response=T, variance_bound=B, variance_bound_sum=B_sum,
            d_bessel=None, d_beta=None, decision="beta",
            mu_tilde=mu_t, kappa_tilde=kappa_t, precheck_beta=True,
        )
    lam_bes, phi_bes = fit_precision_fixed_mu(data, mu_t, "bessel")
    lam_bet, phi_bet = fit_precision_fixed_mu(data, mu_t, "beta")
    mm = mu_t * (1.0 - mu_t)
    d_bes = T - float(np.mean(mm * g_bessel(phi_bes) + mu_t ** 2))
    d_bet = T - float(np.mean(mm * g_beta(phi_bet) + mu_t ** 2))
    decision = decide(d_bes, d_bet)
    return DBBReport(
        mean_sq_response=T, variance_bound=B, variance_bound_sum=B_sum,
        d_bessel=d_bes, d_beta=d_bet, decision=decision,
        mu_tilde=mu_t, phi_tilde_bessel=phi_bes, phi_tilde_beta=phi_bet,
        lambda_tilde_bessel=lam_bes, lambda_tilde_beta=lam_bet,
        kappa_tilde=kappa_t, precheck_beta=False,
    )
