"""besselreg: bessel (normalized inverse-Gaussian) regression for
responses in the open unit interval.

Provides EM-based maximum-likelihood fitting with Louis-information
inference, a reference beta regression, the DBB bessel-vs-beta
discrimination test, residual/envelope/cross-validation diagnostics, a
Monte Carlo study harness, and a CSV-driven command line interface.
"""

from .distributions import (
    BesselParams,
    BetaParams,
    bessel_cdf,
    bessel_logpdf,
    bessel_mean_var,
    bessel_pdf,
    beta_logpdf,
    g_bessel,
    g_beta,
    sample_bessel,
    sample_beta,
    sample_ig,
    zeta,
)
from .regression import (
    Dataset,
    FitResult,
    Theta,
    default_init,
    fit_bessel_em,
    fit_beta_ml,
    loglik_bessel,
    loglik_beta,
    louis_information,
    wald_inference,
)
from .dbb import DBBReport, dbb_test
from .diagnostics import (
    CVResult,
    EnvelopeResult,
    cross_validate,
    pearson_residuals,
    quantile_residuals,
    simulated_envelope,
    vif_select,
)
from .simstudy import MCConfig, MCReport, gen_dataset, relative_bias, run_dbb_study, run_mc

__version__ = "1.0.0"

__all__ = [
    "BesselParams", "BetaParams", "bessel_cdf", "bessel_logpdf",
    "bessel_mean_var", "bessel_pdf", "beta_logpdf", "g_bessel", "g_beta",
    "sample_bessel", "sample_beta", "sample_ig", "zeta",
    "Dataset", "FitResult", "Theta", "default_init", "fit_bessel_em",
    "fit_beta_ml", "loglik_bessel", "loglik_beta", "louis_information",
    "wald_inference",
    "DBBReport", "dbb_test",
    "CVResult", "EnvelopeResult", "cross_validate", "pearson_residuals",
    "quantile_residuals", "simulated_envelope", "vif_select",
    "MCConfig", "MCReport", "gen_dataset", "relative_bias",
    "run_dbb_study", "run_mc",
    "__version__",
]
