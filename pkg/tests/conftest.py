import numpy as np
import pytest

from besselreg.datasets import load_body_fat, load_stress_anxiety, load_weather_task
from besselreg.regression import fit_bessel_em, fit_beta_ml


@pytest.fixture(scope="session")
def sa_data():
    return load_stress_anxiety()


@pytest.fixture(scope="session")
def wt_data():
    return load_weather_task()


@pytest.fixture(scope="session")
def bf_data():
    return load_body_fat()


@pytest.fixture(scope="session")
def sa_bessel_fit(sa_data):
    return fit_bessel_em(sa_data)


@pytest.fixture(scope="session")
def sa_beta_fit(sa_data):
    return fit_beta_ml(sa_data)


@pytest.fixture(scope="session")
def wt_bessel_fit(wt_data):
    return fit_bessel_em(wt_data)


@pytest.fixture(scope="session")
def wt_beta_fit(wt_data):
    return fit_beta_ml(wt_data)


@pytest.fixture(scope="session")
def bf_bessel_fit(bf_data):
    return fit_bessel_em(bf_data)


@pytest.fixture(scope="session")
def bf_beta_fit(bf_data):
    return fit_beta_ml(bf_data)


def random_dataset(rng, n=60, p=2, q=1):
    """Small random regression dataset with responses inside (0,1)."""
    from besselreg.regression import Dataset

    X = np.column_stack([np.ones(n)] +
                        [rng.uniform(-1, 1, n) for _ in range(p - 1)])
    V = np.column_stack([np.ones(n)] +
                        [rng.uniform(-1, 1, n) for _ in range(q - 1)])
    kappa = rng.uniform(-1, 1, p)
    lam = np.concatenate([[rng.uniform(0.8, 2.0)], rng.uniform(-0.5, 0.5, q - 1)])
    mu = 1.0 / (1.0 + np.exp(-(X @ kappa)))
    phi = np.exp(V @ lam)
    a1 = mu * phi
    a2 = (1.0 - mu) * phi
    y1 = rng.wald(a1, a1 ** 2)
    y2 = rng.wald(a2, a2 ** 2)
    z = np.clip(y1 / (y1 + y2), 1e-9, 1 - 1e-9)
    return Dataset(z, X, V)
