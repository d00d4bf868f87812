"""Non-adaptive dyadic transmission policies for noisy target localization.

The target is a point in [0, 1]; its binary-expansion bits are transmitted a
chosen number of times each through a noisy binary-input channel and decoded
by per-bit Bayesian posteriors. The package computes the distortion bounds
driven by the channel's Chernoff information and mean absolute log-likelihood
ratio, searches for bound-minimizing repetition patterns, constructs the
staircase (Aurelian) policy achieving the exp(-A2 sqrt(n)) rate, and
validates everything by exact computation and Monte-Carlo simulation.
"""

__version__ = "0.1.0"

from .channel import (
    ChannelSpec,
    ChernoffInfo,
    InfoConstants,
    b_alt,
    b_functional,
    chernoff_information,
    info_constants,
    load_channel,
    make_bac,
    make_bsc,
    sample_output,
)
from .decoder import (
    PosteriorState,
    conditional_distortion,
    exact_bit_variance,
    exact_distortion,
    mmse_estimate,
    posterior_update,
)
from .errors import (
    BudgetExceededError,
    DegenerateChannelError,
    InfiniteLogRatioError,
    ValidationError,
)
from .policy import (
    DepthBoundsReport,
    EfficiencyReport,
    TransmissionPattern,
    aurelian,
    check_efficient_properties,
    depth_bounds,
    efficient_search,
    enumerate_patterns,
    lower_bound,
    parse_pattern,
    pattern,
    upper_bound,
)
from .sim import (
    DistortionEstimate,
    NonuniformReport,
    SimConfig,
    SweepResult,
    SweepRow,
    aurelian_sweep,
    estimate_distortion,
    nonuniform_experiment,
    run_trial,
)
from .source import (
    Message,
    PriorSpec,
    bit_of,
    from_uniform,
    load_prior,
    power_prior,
    quantize,
    to_uniform,
    uniform_prior,
)

__all__ = [
    "__version__",
    "ChannelSpec",
    "ChernoffInfo",
    "InfoConstants",
    "b_alt",
    "b_functional",
    "chernoff_information",
    "info_constants",
    "load_channel",
    "make_bac",
    "make_bsc",
    "sample_output",
    "PosteriorState",
    "conditional_distortion",
    "exact_bit_variance",
    "exact_distortion",
    "mmse_estimate",
    "posterior_update",
    "BudgetExceededError",
    "DegenerateChannelError",
    "InfiniteLogRatioError",
    "ValidationError",
    "DepthBoundsReport",
    "EfficiencyReport",
    "TransmissionPattern",
    "aurelian",
    "check_efficient_properties",
    "depth_bounds",
    "efficient_search",
    "enumerate_patterns",
    "lower_bound",
    "parse_pattern",
    "pattern",
    "upper_bound",
    "DistortionEstimate",
    "NonuniformReport",
    "SimConfig",
    "SweepResult",
    "SweepRow",
    "aurelian_sweep",
    "estimate_distortion",
    "nonuniform_experiment",
    "run_trial",
    "Message",
    "PriorSpec",
    "bit_of",
    "from_uniform",
    "load_prior",
    "power_prior",
    "quantize",
    "to_uniform",
    "uniform_prior",
]
