"""Special functions: scaled modified Bessel K of integer order and the
exponential integral E1.

Everything here is self-contained (series, continued fractions and
asymptotic expansions only), deterministic and free of table lookups, so
results are bit-reproducible across runs and safe to call from parallel
workers.

Supported orders are 0..3, which covers the density (K_1) and the
conditional-moment ratios K_2/K_1 and K_3/K_1 used by the EM fitter.
All functions accept scalars or numpy arrays.
"""

from __future__ import annotations

import numpy as np

_EULER_GAMMA = 0.5772156649015328606

_MAX_ORDER = 3


class SpecFunDomainError(ValueError):
    """Raised when an argument is outside the supported domain."""


def _as_array(x):
    a = np.asarray(x, dtype=float)
    return a, (a.ndim == 0)


def _k01_scaled_series(x):
    """e^x * (K0(x), K1(x)) by the ascending series, for x < 2."""
    t = x * x / 4.0
    # running term of I0 series: t^k/(k!)^2 and of the K1 companion series
    i0 = np.ones_like(x)
    i1 = np.ones_like(x)          # I1(x)/(x/2) = sum t^k/(k!(k+1)!)
    k0_sum = np.zeros_like(x)
    k1_sum = np.ones_like(x)      # sum (psi(k+1)+psi(k+2)) t^k/(k!(k+1)!), k=0 term = 1
    term0 = np.ones_like(x)
    term1 = np.ones_like(x)
    hk = 0.0
    # psi(1)+psi(2) = -2*gamma + 1
    pk = 1.0
    for k in range(1, 40):
        term0 = term0 * t / (k * k)
        term1 = term1 * t / (k * (k + 1))
        hk += 1.0 / k
        pk += 1.0 / k + 1.0 / (k + 1)
        i0 += term0
        i1 += term1
        k0_sum += term0 * hk
        k1_sum += term1 * pk
        if np.all(term0 * max(hk, 1.0) < 1e-18 * i0):
            break
    lh = np.log(x / 2.0)
    k0 = -(lh + _EULER_GAMMA) * i0 + k0_sum
    # K1 = 1/x + log(x/2) I1 - (x/4)[sum - 2*gamma*I1/(x/2)] ; fold gamma into pk start
    i1_full = (x / 2.0) * i1
    k1 = 1.0 / x + lh * i1_full - (x / 4.0) * (k1_sum - 2.0 * _EULER_GAMMA * i1)
    ex = np.exp(x)
    return ex * k0, ex * k1


def _k01_scaled_cf(x):
    """e^x * (K0(x), K1(x)) by Steed's continued fraction (CF2), x >= 2."""
    a1 = 0.25
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 500):
        a -= 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) < 1e-16 * np.abs(s)):
            break
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _k01_scaled_asym(x):
    """e^x * (K0(x), K1(x)) by the large-argument asymptotic expansion,
    accurate to better than 1e-14 relative for x >= 500. Used above the
    continued-fraction range so that already-converged vector elements
    cannot overflow the shared iteration."""
    s0 = np.ones_like(x)
    s1 = np.ones_like(x)
    t0 = np.ones_like(x)
    t1 = np.ones_like(x)
    for k in range(1, 14):
        c = (2.0 * k - 1.0) ** 2
        t0 = t0 * (0.0 - c) / (8.0 * k * x)
        t1 = t1 * (4.0 - c) / (8.0 * k * x)
        s0 += t0
        s1 += t1
    pref = np.sqrt(np.pi / (2.0 * x))
    return pref * s0, pref * s1


def _k01_scaled(a):
    """e^x * (K0(x), K1(x)): series (x<2), continued fraction
    (2 <= x < 500), asymptotic expansion (x >= 500)."""
    small = a < 2.0
    big = a >= 500.0
    mid = ~small & ~big
    k0 = np.empty_like(a)
    k1 = np.empty_like(a)
    if np.any(small):
        k0[small], k1[small] = _k01_scaled_series(a[small])
    if np.any(mid):
        k0[mid], k1[mid] = _k01_scaled_cf(a[mid])
    if np.any(big):
        k0[big], k1[big] = _k01_scaled_asym(a[big])
    return k0, k1


def bessel_k_scaled_123(x):
    """(e^x K_1(x), e^x K_2(x), e^x K_3(x)) from one K0/K1 evaluation.

    Batched variant for the EM E-step, which needs all three orders at
    the same arguments; identical values to bessel_k_scaled order by
    order (same series/continued fraction and the same upward
    recurrence).
    """
    a, scalar = _as_array(x)
    if np.any(a <= 0.0) or np.any(~np.isfinite(a)):
        raise SpecFunDomainError("bessel_k_scaled_123 requires x > 0")
    k0, k1 = _k01_scaled(a)
    k2 = k0 + (2.0 / a) * k1
    k3 = k1 + (4.0 / a) * k2
    if scalar:
        return float(k1), float(k2), float(k3)
    return k1, k2, k3


def bessel_k_scaled(order: int, x):
    """Exponentially scaled modified Bessel function e^x * K_order(x).

    order must be in {0, 1, 2, 3}; x > 0 (scalar or array).
    """
    if order not in (0, 1, 2, 3):
        raise SpecFunDomainError(f"unsupported order {order}; must be 0..3")
    a, scalar = _as_array(x)
    if np.any(a <= 0.0) or np.any(~np.isfinite(a)):
        raise SpecFunDomainError("bessel_k_scaled requires x > 0")
    k0, k1 = _k01_scaled(a)
    if order == 0:
        out = k0
    elif order == 1:
        out = k1
    else:
        # upward recurrence K_{n+1} = K_{n-1} + (2n/x) K_n (stable for K)
        k2 = k0 + (2.0 / a) * k1
        out = k2 if order == 2 else k1 + (4.0 / a) * k2
    return float(out) if scalar else out


def log_bessel_k(order: int, x):
    """log K_order(x), overflow-free for large x."""
    a, scalar = _as_array(x)
    out = np.log(bessel_k_scaled(order, a)) - a
    return float(out) if scalar else out


def _e1_series(x):
    """E1(x) = -gamma - log x + sum (-1)^{k+1} x^k / (k k!), x <= 1."""
    s = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 60):
        term = term * (-x) / k
        s -= term / k
        if np.all(np.abs(term) < 1e-18 * np.maximum(np.abs(s), 1e-300)):
            break
    return -_EULER_GAMMA - np.log(x) + s


def _e1_cf_scaled(x):
    """e^x E1(x) by the continued fraction 1/(x+1- 1^2/(x+3- 2^2/(x+5-...))), x > 1."""
    tiny = 1e-300
    b = x + 1.0
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 300):
        an = -float(i) * float(i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        delta = c * d
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    return h


def exp_integral_e1(x):
    """Exponential integral E1(x) = int_1^inf u^{-1} e^{-x u} du, x > 0."""
    a, scalar = _as_array(x)
    if np.any(a <= 0.0) or np.any(~np.isfinite(a)):
        raise SpecFunDomainError("exp_integral_e1 requires x > 0")
    out = np.empty_like(a)
    small = a <= 1.0
    if np.any(small):
        out[small] = _e1_series(a[small])
    if np.any(~small):
        out[~small] = _e1_cf_scaled(a[~small]) * np.exp(-a[~small])
    return float(out) if scalar else out


def exp_integral_e1_scaled(x):
    """e^x E1(x); stays finite for arbitrarily large x."""
    a, scalar = _as_array(x)
    if np.any(a <= 0.0) or np.any(~np.isfinite(a)):
        raise SpecFunDomainError("exp_integral_e1_scaled requires x > 0")
    out = np.empty_like(a)
    small = a <= 1.0
    if np.any(small):
        out[small] = _e1_series(a[small]) * np.exp(a[small])
    if np.any(~small):
        out[~small] = _e1_cf_scaled(a[~small])
    return float(out) if scalar else out
