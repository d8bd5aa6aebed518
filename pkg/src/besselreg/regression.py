"""Bessel regression with logit/log links: EM fitter (analytic E-step,
quasi-Newton M-step), exact observed log-likelihood, Louis observed
information and Wald inference, plus a direct-ML beta regression fitted
under the same links for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import digamma, expit, gammaln
from scipy.stats import norm

from .specfun import bessel_k_scaled, bessel_k_scaled_123

BOUNDARY_TOL = 1e-10


class DesignError(ValueError):
    """Invalid design matrix or response vector."""


class FitError(RuntimeError):
    """Optimizer failure that could not be recovered."""


@dataclass
class Dataset:
    """Responses in (0,1) with a mean design matrix X and a precision
    design matrix V (both including intercept columns if wanted)."""

    z: np.ndarray
    X: np.ndarray
    V: np.ndarray
    x_names: list[str] = field(default_factory=list)
    v_names: list[str] = field(default_factory=list)
    response_name: str = "z"

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float).ravel()
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.V = np.atleast_2d(np.asarray(self.V, dtype=float))
        n = self.z.size
        if self.X.shape[0] != n or self.V.shape[0] != n:
            raise DesignError("X and V must have one row per response")
        if np.any(self.z <= BOUNDARY_TOL) or np.any(self.z >= 1.0 - BOUNDARY_TOL):
            raise DesignError(
                "responses must lie strictly inside (0,1); rescale the data "
                "linearly into the unit interval before fitting"
            )
        if self.p + self.q >= n:
            raise DesignError("need p + q < n")
        for name, m in (("X", self.X), ("V", self.V)):
            if np.linalg.matrix_rank(m) < m.shape[1]:
                raise DesignError(f"design matrix {name} is rank deficient")
        if not self.x_names:
            self.x_names = [f"x{j}" for j in range(self.p)]
        if not self.v_names:
            self.v_names = [f"v{j}" for j in range(self.q)]

    @property
    def n(self):
        return self.z.size

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def q(self):
        return self.V.shape[1]


@dataclass
class Theta:
    kappa: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        self.kappa = np.asarray(self.kappa, dtype=float).ravel()
        self.lam = np.asarray(self.lam, dtype=float).ravel()

    def as_vector(self):
        return np.concatenate([self.kappa, self.lam])

    @staticmethod
    def from_vector(vec, p):
        vec = np.asarray(vec, dtype=float)
        return Theta(vec[:p], vec[p:])


@dataclass
class FitResult:
    theta_hat: Theta
    std_errors: np.ndarray
    observed_information: np.ndarray
    loglik: float
    em_iterations: int
    loglik_trace: np.ndarray
    converged: bool
    model_tag: str
    info_warning: bool = False
    coef_names: list[str] = field(default_factory=list)


def mu_of(theta: Theta, data: Dataset):
    return expit(data.X @ theta.kappa)


def phi_of(theta: Theta, data: Dataset):
    return np.exp(data.V @ theta.lam)


def _zeta2(z, mu):
    return 1.0 + (z - mu) ** 2 / (z * (1.0 - z))


def loglik_bessel(theta: Theta, data: Dataset) -> float:
    """Exact observed log-likelihood (constants included, so values are
    directly comparable with the beta log-likelihood)."""
    z = data.z
    mu = mu_of(theta, data)
    phi = phi_of(theta, data)
    zt = np.sqrt(_zeta2(z, mu))
    x = phi * zt
    ll = (
        np.log(mu) + np.log1p(-mu) + np.log(phi)
        + phi * (1.0 - zt)
        - np.log(np.pi) - 1.5 * np.log(z * (1.0 - z))
        - np.log(zt)
        + np.log(bessel_k_scaled(1, x))
    )
    return float(np.sum(ll))


def _estep_vec(mu, phi, z):
    """Conditional moments of the latent inverse-Gaussian total W:
    psi = E(W^-1 | z), chi = E(W^-2 | z), via scaled Bessel ratios."""
    x = phi * np.sqrt(_zeta2(z, mu))
    k1, k2, k3 = bessel_k_scaled_123(x)
    psi = k2 / (x * k1)
    chi = k3 / (x * x * k1)
    return psi, chi


def e_step(theta: Theta, data: Dataset):
    return _estep_vec(mu_of(theta, data), phi_of(theta, data), data.z)


def _estep_and_loglik(theta: Theta, data: Dataset):
    """(psi, chi, loglik) sharing one Bessel-K evaluation; values are
    identical to e_step(...) followed by loglik_bessel(...)."""
    z = data.z
    mu = mu_of(theta, data)
    phi = phi_of(theta, data)
    zt = np.sqrt(_zeta2(z, mu))
    x = phi * zt
    k1, k2, k3 = bessel_k_scaled_123(x)
    psi = k2 / (x * k1)
    chi = k3 / (x * x * k1)
    ll = float(np.sum(
        np.log(mu) + np.log1p(-mu) + np.log(phi)
        + phi * (1.0 - zt)
        - np.log(np.pi) - 1.5 * np.log(z * (1.0 - z))
        - np.log(zt)
        + np.log(k1)
    ))
    return psi, chi, ll


def q_function(theta: Theta, psi_fixed, data: Dataset) -> float:
    z = data.z
    mu = mu_of(theta, data)
    phi = phi_of(theta, data)
    zt2 = _zeta2(z, mu)
    q = (
        np.log(mu) + np.log1p(-mu) + 2.0 * np.log(phi) + phi
        - 0.5 * psi_fixed * phi ** 2 * zt2
    )
    return float(np.sum(q))


def q_score(theta: Theta, psi_fixed, data: Dataset):
    """Gradient of the Q-function.

    The kappa block carries the full coefficient psi*phi^2 (the chain rule
    on the zeta^2 term produces no 1/2), which is what matches central
    finite differences of q_function.
    """
    z = data.z
    mu = mu_of(theta, data)
    phi = phi_of(theta, data)
    d = (z - mu) / (z * (1.0 - z))
    gk = (1.0 - 2.0 * mu + psi_fixed * phi ** 2 * mu * (1.0 - mu) * d)
    gl = (2.0 + phi - psi_fixed * phi ** 2 * _zeta2(z, mu))
    return np.concatenate([data.X.T @ gk, data.V.T @ gl])


def bfgs_minimize(fun_and_grad, x0, gtol: float = 1e-8, maxiter: int = 200):
    """Minimize a smooth function by BFGS with Armijo backtracking.

    fun_and_grad(x) must return (value, gradient). Used for the
    lambda-only fits of the discrimination test; the main M-step uses
    the analytic-Hessian Newton ascent below.
    """
    x = np.asarray(x0, dtype=float).copy()
    k = x.size
    f, g = fun_and_grad(x)
    if not np.isfinite(f):
        raise FitError("non-finite objective at the starting point")
    H = np.eye(k)
    eye = np.eye(k)
    for _ in range(maxiter):
        if np.linalg.norm(g, np.inf) <= gtol:
            break
        p = -H @ g
        gp = float(g @ p)
        if gp >= 0.0:  # lost positive definiteness; restart from steepest descent
            H = np.eye(k)
            p = -g
            gp = float(g @ p)
            if gp >= 0.0:
                break
        if -gp <= 1e-9 * (1.0 + abs(f)):
            # predicted decrease below the objective's noise floor
            xn = x + p
            fn, gn = fun_and_grad(xn)
            if not np.isfinite(fn):
                break
            x, f, g = xn, fn, gn
            continue
        t = 1.0
        for _halve in range(40):
            xn = x + t * p
            fn, gn = fun_and_grad(xn)
            if np.isfinite(fn) and fn <= f + 1e-4 * t * gp:
                break
            t *= 0.5
        else:
            break
        s = xn - x
        y = gn - g
        x, f, g = xn, fn, gn
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            A = eye - rho * np.outer(s, y)
            H = A @ H @ A.T + rho * np.outer(s, s)
    if not np.all(np.isfinite(x)):
        raise FitError("optimizer produced non-finite parameters")
    return x


def _newton_max(fun_pieces, fun_only, x0, gtol: float = 1e-8,
                maxiter: int = 200):
    """Safeguarded Newton ascent with Armijo backtracking.

    fun_pieces(x) -> (value, gradient, negative Hessian); the negative
    Hessian is positive definite near the maximum. If the Newton system
    is singular or fails the ascent test, the step falls back to scaled
    steepest ascent.
    """
    x = np.asarray(x0, dtype=float).copy()
    for _ in range(maxiter):
        f, g, nh = fun_pieces(x)
        if not np.isfinite(f):
            raise FitError("non-finite objective during optimization")
        if np.linalg.norm(g, np.inf) <= gtol:
            break
        step = None
        try:
            cand = np.linalg.solve(nh, g)
            if np.isfinite(cand).all() and float(g @ cand) > 0.0:
                step = cand
        except np.linalg.LinAlgError:
            pass
        if step is None:
            step = g / max(1.0, np.linalg.norm(g))
        gs = float(g @ step)
        if gs <= 1e-9 * (1.0 + abs(f)):
            # predicted improvement is below the floating-point noise in
            # the objective; the (Newton) step is safe to take unchecked
            x = x + step
            continue
        t = 1.0
        for _halve in range(40):
            xn = x + t * step
            fn = fun_only(xn)
            if np.isfinite(fn) and fn >= f + 1e-4 * t * gs:
                break
            t *= 0.5
        else:
            break
        x = xn
    if not np.all(np.isfinite(x)):
        raise FitError("optimizer produced non-finite parameters")
    return x


def _q_only(vec, psi, data: Dataset):
    p = data.p
    z = data.z
    mu = expit(data.X @ vec[:p])
    phi = np.exp(data.V @ vec[p:])
    return float(np.sum(
        np.log(mu) + np.log1p(-mu) + 2.0 * np.log(phi) + phi
        - 0.5 * psi * phi ** 2 * _zeta2(z, mu)
    ))


def _q_pieces(vec, psi, data: Dataset):
    """Q value, gradient and negative Hessian at vec, with the shared
    per-observation terms computed once. The negative Hessian uses the
    same closed-form blocks as the conditional-Hessian part of the
    observed information, with psi frozen."""
    p = data.p
    z = data.z
    X, V = data.X, data.V
    mu = expit(X @ vec[:p])
    phi = np.exp(V @ vec[p:])
    zt2 = _zeta2(z, mu)
    mm = mu * (1.0 - mu)
    d = (z - mu) / (z * (1.0 - z))
    q = float(np.sum(
        np.log(mu) + np.log1p(-mu) + 2.0 * np.log(phi) + phi
        - 0.5 * psi * phi ** 2 * zt2
    ))
    gk = 1.0 - 2.0 * mu + psi * phi ** 2 * mm * d
    gl = 2.0 + phi - psi * phi ** 2 * zt2
    grad = np.concatenate([X.T @ gk, V.T @ gl])
    h_kk = (2.0 + psi * phi ** 2 * (mm - (1.0 - 2.0 * mu) * (z - mu)) / (z * (1.0 - z))) * mm
    h_ll = (2.0 * phi * psi * zt2 - 1.0) * phi
    h_kl = -2.0 * phi ** 2 * psi * mm * d
    kl_block = X.T @ (h_kl[:, None] * V)
    neg_hess = np.vstack([
        np.hstack([X.T @ (h_kk[:, None] * X), kl_block]),
        np.hstack([kl_block.T, V.T @ (h_ll[:, None] * V)]),
    ])
    return q, grad, neg_hess


def _m_step(theta: Theta, psi, data: Dataset) -> Theta:
    """Maximize the Q-function with psi frozen: Newton ascent with the
    analytic gradient and Hessian, safeguarded by backtracking."""
    x = _newton_max(
        lambda vec: _q_pieces(vec, psi, data),
        lambda vec: _q_only(vec, psi, data),
        theta.as_vector(), gtol=1e-8, maxiter=200,
    )
    return Theta.from_vector(x, data.p)


def default_init(data: Dataset, model_tag: str = "bessel") -> Theta:
    """Starting values from an auxiliary OLS regression of logit(z) on X.

    The precision intercept comes from a method-of-moments estimate on
    the link scale; the bessel variant shifts it by
    ln 2 + ln(1 + exp(lambda1)) to account for the different g-function.
    """
    eta = np.log(data.z / (1.0 - data.z))
    kappa0, res_ss, rank, _sv = np.linalg.lstsq(data.X, eta, rcond=None)
    fitted = data.X @ kappa0
    resid = eta - fitted
    dof = max(data.n - data.p, 1)
    sigma2_eta = float(resid @ resid) / dof
    mu0 = expit(fitted)
    sig2 = sigma2_eta * (mu0 * (1.0 - mu0)) ** 2
    phi_check = float(np.mean(mu0 * (1.0 - mu0) / sig2 - 1.0))
    lam1_beta = np.log(max(phi_check, 0.1))
    lam0 = np.zeros(data.q)
    if model_tag == "bessel":
        lam0[0] = np.log(2.0) + np.log1p(np.exp(lam1_beta))
    else:
        lam0[0] = lam1_beta
    return Theta(kappa0, lam0)


def fit_bessel_em(
    data: Dataset,
    init: Theta | None = None,
    epsilon: float = 1e-5,
    max_iter: int = 10000,
) -> FitResult:
    """EM fit: analytic E-step, Newton M-step on the Q-function,
    relative-change stopping rule
    ||theta_new - theta_old|| / ||theta_old|| < epsilon."""
    theta = init if init is not None else default_init(data, "bessel")
    psi, _chi, ll = _estep_and_loglik(theta, data)
    trace = [ll]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        theta_new = _m_step(theta, psi, data)
        psi, _chi, ll = _estep_and_loglik(theta_new, data)
        trace.append(ll)
        old = theta.as_vector()
        delta = np.linalg.norm(theta_new.as_vector() - old)
        theta = theta_new
        if delta / max(np.linalg.norm(old), 1e-300) < epsilon:
            converged = True
            break
    info = louis_information(theta, data)
    se, warn = _se_from_information(info)
    return FitResult(
        theta_hat=theta,
        std_errors=se,
        observed_information=info,
        loglik=trace[-1],
        em_iterations=it,
        loglik_trace=np.asarray(trace),
        converged=converged,
        model_tag="bessel",
        info_warning=warn,
        coef_names=list(data.x_names) + list(data.v_names),
    )


def _se_from_information(info):
    try:
        cov = np.linalg.inv(info)
        diag = np.diag(cov)
        if np.any(diag <= 0):
            return np.sqrt(np.abs(diag)), True
        return np.sqrt(diag), False
    except np.linalg.LinAlgError:
        return np.full(info.shape[0], np.nan), True


def louis_information(theta: Theta, data: Dataset):
    """Observed information at theta: conditional expectation of the
    complete-data Hessian minus that of the score outer product.

    The i != k double sums are folded in O(n) through
    sum_{i!=k} a_i b_k = (sum a)(sum b) - sum a_i b_i.
    """
    z = data.z
    X, V = data.X, data.V
    mu = mu_of(theta, data)
    phi = phi_of(theta, data)
    psi, chi = _estep_vec(mu, phi, z)
    d = (z - mu) / (z * (1.0 - z))
    zt2 = _zeta2(z, mu)
    mm = mu * (1.0 - mu)

    a_vec = phi ** 2 * mm * d          # psi coefficient in the kappa score
    b_vec = phi ** 2 * zt2             # psi coefficient in the lambda score
    s_k = (1.0 - 2.0 * mu) + psi * a_vec
    s_l = (2.0 + phi) - psi * b_vec

    # conditional Hessian blocks
    h_kk = (2.0 + psi * phi ** 2 * (mm - (1.0 - 2.0 * mu) * (z - mu)) / (z * (1.0 - z))) * mm
    h_ll = (2.0 * phi * psi * zt2 - 1.0) * phi
    h_kl = -2.0 * phi ** 2 * psi * mm * d

    # conditional second moments of the per-observation complete scores
    e_kk = (1.0 - 2.0 * mu) ** 2 + 2.0 * (1.0 - 2.0 * mu) * psi * a_vec + chi * a_vec ** 2
    e_ll = (2.0 + phi) ** 2 - 2.0 * (2.0 + phi) * psi * b_vec + chi * b_vec ** 2
    e_kl = (
        (1.0 - 2.0 * mu) * (2.0 + phi)
        - (1.0 - 2.0 * mu) * psi * b_vec
        + (2.0 + phi) * psi * a_vec
        - chi * a_vec * b_vec
    )

    H_kk = X.T @ (h_kk[:, None] * X)
    H_ll = V.T @ (h_ll[:, None] * V)
    H_kl = X.T @ (h_kl[:, None] * V)

    g_k = X.T @ s_k
    g_l = V.T @ s_l
    B_kk = X.T @ ((e_kk - s_k ** 2)[:, None] * X) + np.outer(g_k, g_k)
    B_ll = V.T @ ((e_ll - s_l ** 2)[:, None] * V) + np.outer(g_l, g_l)
    B_kl = X.T @ ((e_kl - s_k * s_l)[:, None] * V) + np.outer(g_k, g_l)

    top = np.hstack([H_kk - B_kk, H_kl - B_kl])
    bot = np.hstack([(H_kl - B_kl).T, H_ll - B_ll])
    info = np.vstack([top, bot])
    return (info + info.T) / 2.0


def wald_inference(fit: FitResult, level: float = 0.95):
    """Wald table: estimate, se, z, two-sided p, confidence interval."""
    est = fit.theta_hat.as_vector()
    se = fit.std_errors
    if np.any(~np.isfinite(se)):
        bad = [n for n, s in zip(fit.coef_names, se) if not np.isfinite(s)]
        raise FitError(f"singular information matrix; offending columns: {bad}")
    zval = est / se
    pval = 2.0 * norm.sf(np.abs(zval))
    crit = norm.ppf(0.5 + level / 2.0)
    rows = []
    p = fit.theta_hat.kappa.size
    for i, name in enumerate(fit.coef_names or [f"b{i}" for i in range(est.size)]):
        rows.append({
            "name": name,
            "block": "mean" if i < p else "precision",
            "estimate": float(est[i]),
            "se": float(se[i]),
            "z": float(zval[i]),
            "p": float(pval[i]),
            "ci_lo": float(est[i] - crit * se[i]),
            "ci_hi": float(est[i] + crit * se[i]),
        })
    return rows


# ---------------------------------------------------------------------------
# beta regression by direct maximum likelihood (same links)
# ---------------------------------------------------------------------------

def loglik_beta(theta: Theta, data: Dataset) -> float:
    z = data.z
    mu = mu_of(theta, data)
    phi = phi_of(theta, data)
    a = mu * phi
    b = (1.0 - mu) * phi
    ll = (
        gammaln(phi) - gammaln(a) - gammaln(b)
        + (a - 1.0) * np.log(z) + (b - 1.0) * np.log1p(-z)
    )
    return float(np.sum(ll))


def beta_score(theta: Theta, data: Dataset):
    z = data.z
    mu = mu_of(theta, data)
    phi = phi_of(theta, data)
    zstar = np.log(z / (1.0 - z))
    mustar = digamma(mu * phi) - digamma((1.0 - mu) * phi)
    gk = phi * (zstar - mustar) * mu * (1.0 - mu)
    gl = phi * (
        mu * (zstar - mustar) + np.log1p(-z)
        - digamma((1.0 - mu) * phi) + digamma(phi)
    )
    return np.concatenate([data.X.T @ gk, data.V.T @ gl])


def _numerical_hessian(fun_grad, x0, scale=1e-6):
    """Central-difference Hessian of a function given its gradient."""
    k = x0.size
    H = np.zeros((k, k))
    for j in range(k):
        h = scale * max(1.0, abs(x0[j]))
        e = np.zeros(k)
        e[j] = h
        H[:, j] = (fun_grad(x0 + e) - fun_grad(x0 - e)) / (2.0 * h)
    return (H + H.T) / 2.0


def fit_beta_ml(
    data: Dataset,
    init: Theta | None = None,
    tol: float = 1e-8,
) -> FitResult:
    """Direct quasi-Newton maximization of the beta log-likelihood with
    analytic gradient; standard errors from the numerical Hessian."""
    theta = init if init is not None else default_init(data, "beta")
    p = data.p

    def neg_ll_and_grad(vec):
        th = Theta.from_vector(vec, p)
        return -loglik_beta(th, data), -beta_score(th, data)

    def neg_grad(vec):
        return -beta_score(Theta.from_vector(vec, p), data)

    res = optimize.minimize(neg_ll_and_grad, theta.as_vector(), jac=True,
                            method="BFGS",
                            options={"gtol": tol, "maxiter": 2000})
    x = res.x
    if not np.all(np.isfinite(x)):
        raise FitError("beta ML produced non-finite parameters")
    theta_hat = Theta.from_vector(x, p)
    ll = loglik_beta(theta_hat, data)
    info = _numerical_hessian(neg_grad, x)
    se, warn = _se_from_information(info)
    return FitResult(
        theta_hat=theta_hat,
        std_errors=se,
        observed_information=info,
        loglik=ll,
        em_iterations=0,
        loglik_trace=np.asarray([ll]),
        converged=np.linalg.norm(neg_grad(x), np.inf) < 1e-4 * max(1.0, data.n / 100.0),
        model_tag="beta",
        info_warning=warn,
        coef_names=list(data.x_names) + list(data.v_names),
    )
