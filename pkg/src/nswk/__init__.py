"""Spectral analysis and subsampling of nonstationary random processes."""

from .model import (
    AsymmetricLag,
    BiSpectrum,
    EmptySpectrum,
    Ensemble,
    InvariantViolation,
    LagFunction,
    LtiFilter,
    NonConvergent,
    NswkError,
    Spectrum,
    UnstableFilter,
    VarianceProfile,
    WindowTooLong,
    ZeroSignal,
    dft_grid,
    frequency_response,
    make_filter,
)
from .sampling import (
    SamplingPlan,
    fractional_bandwidth,
    make_plan,
    out_of_band_fraction,
    reconstruction_mse,
    sinc_reconstruct,
    subsample,
)
from .spectral import (
    averaged_autocorrelation,
    ensemble_averaged_autocorrelation,
    check_assumptions,
    estimate_autocorrelation,
    estimate_generalized_psd,
    estimate_psd,
    ft_of_lag,
    max_abs_autocorrelation,
    noise_generalized_psd,
    theoretical_avg_acf,
    theoretical_psd_ns1,
    verify_wk_convergence,
)
from .synthesis import TemporalModel, apply_filter, constant_profile, generate_noise, paper_variance_profile, synthesize

__version__ = "0.1.0"

__all__ = [
    "apply_filter",
    "AsymmetricLag",
    "averaged_autocorrelation",
    "BiSpectrum",
    "check_assumptions",
    "dft_grid",
    "EmptySpectrum",
    "Ensemble",
    "ensemble_averaged_autocorrelation",
    "estimate_autocorrelation",
    "estimate_generalized_psd",
    "estimate_psd",
    "fractional_bandwidth",
    "frequency_response",
    "ft_of_lag",
    "generate_noise",
    "InvariantViolation",
    "LagFunction",
    "LtiFilter",
    "make_filter",
    "make_plan",
    "max_abs_autocorrelation",
    "noise_generalized_psd",
    "NonConvergent",
    "NswkError",
    "out_of_band_fraction",
    "constant_profile",
    "paper_variance_profile",
    "reconstruction_mse",
    "SamplingPlan",
    "sinc_reconstruct",
    "Spectrum",
    "subsample",
    "synthesize",
    "TemporalModel",
    "theoretical_avg_acf",
    "theoretical_psd_ns1",
    "UnstableFilter",
    "VarianceProfile",
    "verify_wk_convergence",
    "WindowTooLong",
    "ZeroSignal",
]
