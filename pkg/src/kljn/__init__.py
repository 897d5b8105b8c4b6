"""Simulation and error analysis of the ideal Kirchhoff-law-Johnson-noise key exchange."""

from ._validation import (
    ApproximationDomainError,
    ConfigurationError,
    InsufficientDataError,
    InvalidParameterError,
    KLJNError,
    PlanSizeError,
    ValidityWarning,
)
from .core import (
    BepOutcome,
    BitSituation,
    Decision,
    ErrorClass,
    LevelSet,
    SystemConfig,
    channel_waveforms,
    classify,
    classify_error,
    compute_thresholds,
    distill_key,
    exact_level,
    exact_level_current,
    run_bep,
    simulate_bep,
)
from .detector import MeanSquareTransformer, ThresholdDetector
from .error_model import (
    PredictorInput,
    SquaredNoisePsd,
    averaged_square_rms,
    gaussian_tail_probability,
    pessimism_ratio,
    rice_crossing_frequency,
    rice_error_probability_00,
    rice_error_probability_11,
    squared_noise_psd,
)
from .montecarlo import (
    ErrorTally,
    ExperimentPlan,
    RateEstimate,
    estimate_rate,
    ks_two_sample,
    measure_estimator_sigma,
    run_experiment,
    two_stage_validation,
)
from .noise import (
    NoiseSpec,
    NoiseTrace,
    estimate_psd,
    johnson_spectral_density,
    mean_square,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "ApproximationDomainError",
    "BepOutcome",
    "BitSituation",
    "ConfigurationError",
    "Decision",
    "ErrorClass",
    "ErrorTally",
    "ExperimentPlan",
    "InsufficientDataError",
    "InvalidParameterError",
    "KLJNError",
    "LevelSet",
    "MeanSquareTransformer",
    "NoiseSpec",
    "NoiseTrace",
    "PlanSizeError",
    "PredictorInput",
    "RateEstimate",
    "SquaredNoisePsd",
    "SystemConfig",
    "ThresholdDetector",
    "ValidityWarning",
    "averaged_square_rms",
    "channel_waveforms",
    "classify",
    "classify_error",
    "compute_thresholds",
    "distill_key",
    "estimate_psd",
    "estimate_rate",
    "exact_level",
    "exact_level_current",
    "gaussian_tail_probability",
    "johnson_spectral_density",
    "ks_two_sample",
    "mean_square",
    "measure_estimator_sigma",
    "pessimism_ratio",
    "rice_crossing_frequency",
    "rice_error_probability_00",
    "rice_error_probability_11",
    "run_bep",
    "run_experiment",
    "simulate_bep",
    "squared_noise_psd",
    "synthesize",
    "two_stage_validation",
]
