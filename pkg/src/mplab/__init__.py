"""Marchenko-Pastur law, sample-covariance spectra and their rate of convergence.

The package evaluates the limiting law and its Stieltjes transforms, samples
data matrices reproducibly, computes spectra and resolvents, checks the
algebraic identities behind the convergence argument and runs Monte Carlo
experiments on the Kolmogorov distance ``Delta_n``.
"""

__version__ = "0.1.0"

from ._errors import ContractError, DomainError
from .mp_law import (
    MPLaw,
    mp_pdf,
    mp_cdf,
    mp_cdf_vec,
    mp_ppf,
    mp_moment,
    mp_stieltjes,
    mp_stieltjes_sym,
    sym_pdf,
    sym_cdf,
)
from .ensemble import EntryDistribution, EnsembleConfig, DataMatrix, sample_matrix, load_config
from .spectral import SpectralSample, hermitize, spectral_sample, empirical_stieltjes_sym
from .bounds import kolmogorov_distance, SmoothingParams, smoothing_rhs, stieltjes_error_envelope
from .experiments import (
    estimate_expected_esd,
    fit_power_law,
    run_rate_experiment,
    run_stieltjes_experiment,
    run_truncation_experiment,
)

__all__ = [
    "ContractError",
    "DomainError",
    "MPLaw",
    "mp_pdf",
    "mp_cdf",
    "mp_cdf_vec",
    "mp_ppf",
    "mp_moment",
    "mp_stieltjes",
    "mp_stieltjes_sym",
    "sym_pdf",
    "sym_cdf",
    "EntryDistribution",
    "EnsembleConfig",
    "DataMatrix",
    "sample_matrix",
    "load_config",
    "SpectralSample",
    "hermitize",
    "spectral_sample",
    "empirical_stieltjes_sym",
    "kolmogorov_distance",
    "SmoothingParams",
    "smoothing_rhs",
    "stieltjes_error_envelope",
    "estimate_expected_esd",
    "fit_power_law",
    "run_rate_experiment",
    "run_stieltjes_experiment",
    "run_truncation_experiment",
]
