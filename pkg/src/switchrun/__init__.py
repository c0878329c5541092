"""Longest consecutive-switch statistics for IID Bernoulli sequences.

A switch is an adjacent pair of trials with different outcomes; this package
computes the exact law of the longest consecutive-switch run M_N, rigorous
sandwich bounds on P(M_N < K-1), the threshold asymptotics governing M_N's
almost-sure growth, and a deterministic seeded Monte Carlo harness that
exercises all of them.
"""

__version__ = "0.1.0"

from .asymptotics import (
    GammaFamily,
    SeriesVerdict,
    ThresholdSpec,
    alpha1,
    alpha1_unfloored,
    alpha2,
    alpha2_unfloored,
    classify_gamma_series,
    gamma_value,
    log_lambda,
    min_admissible_n,
    slln_ratio,
)
from .core import (
    BernoulliParams,
    BitSequence,
    SwitchRunStats,
    longest_switch_run,
    switch_count,
    window_scan_oracle,
    windowed_longest,
)
from .errors import ConfigError, DomainError, InternalConsistencyError, WindowRangeError
from .exact import (
    BoundEnvelope,
    ExactDistribution,
    bounds_mn_less,
    enumerate_mn_cdf_exact,
    enumerate_mn_dist,
    exact_mn_cdf,
    exact_mn_cdf_profile,
    p_full_alternation,
    p_window2k_reach,
)
from .montecarlo import (
    ExperimentConfig,
    GridPointResult,
    TrialReport,
    achieving_pattern,
    estimate_cdf,
    gamma_hit_scan,
    mn_prefix_profile,
    run_trials,
    sample_mn,
    simulate_sequence,
)
from .prng import derive_seed

__all__ = [
    "__version__",
    "BernoulliParams",
    "BitSequence",
    "BoundEnvelope",
    "ConfigError",
    "DomainError",
    "ExactDistribution",
    "ExperimentConfig",
    "GammaFamily",
    "GridPointResult",
    "InternalConsistencyError",
    "SeriesVerdict",
    "SwitchRunStats",
    "ThresholdSpec",
    "TrialReport",
    "WindowRangeError",
    "achieving_pattern",
    "alpha1",
    "alpha1_unfloored",
    "alpha2",
    "alpha2_unfloored",
    "bounds_mn_less",
    "classify_gamma_series",
    "derive_seed",
    "enumerate_mn_cdf_exact",
    "enumerate_mn_dist",
    "estimate_cdf",
    "exact_mn_cdf",
    "exact_mn_cdf_profile",
    "gamma_hit_scan",
    "gamma_value",
    "log_lambda",
    "longest_switch_run",
    "min_admissible_n",
    "mn_prefix_profile",
    "p_full_alternation",
    "p_window2k_reach",
    "run_trials",
    "sample_mn",
    "simulate_sequence",
    "slln_ratio",
    "switch_count",
    "window_scan_oracle",
    "windowed_longest",
]
