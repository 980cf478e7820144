"""Sequential Bayesian localization of a cascade source on d-dimensional
lattices, with optimal-stopping rules and a verification harness."""

from .cascade import ObservationFrame, Window, WorldState, get_window, infected_set, next_frame
from .channels import ChannelMoments, ChannelPair
from .config import ConfigError, ExperimentConfig, build_config, load_config
from .harness import (
    ScalingRow,
    TrialRecord,
    batch_summary,
    normalizer_concentration_check,
    run_batch,
    run_trajectory,
    scaling_study,
    variance_transition_profile,
)
from .lattice import (
    ball_size,
    bfs_sphere_sizes,
    enumerate_ball,
    growth,
    growth_inverse,
    l1_distance,
    overlap_growth,
    pnorm_sum,
    sphere_bounds,
    sphere_size,
)
from .posterior import PosteriorState, sample_from_posterior, uniform_prior, update
from .stopping import (
    LookaheadEstimate,
    StoppingRule,
    lookahead_estimate,
    t_plus_triggered,
    t_r_triggered,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelMoments",
    "ChannelPair",
    "ConfigError",
    "ExperimentConfig",
    "LookaheadEstimate",
    "ObservationFrame",
    "PosteriorState",
    "ScalingRow",
    "StoppingRule",
    "TrialRecord",
    "Window",
    "WorldState",
    "ball_size",
    "batch_summary",
    "bfs_sphere_sizes",
    "build_config",
    "enumerate_ball",
    "get_window",
    "growth",
    "growth_inverse",
    "infected_set",
    "l1_distance",
    "load_config",
    "lookahead_estimate",
    "next_frame",
    "normalizer_concentration_check",
    "overlap_growth",
    "pnorm_sum",
    "run_batch",
    "run_trajectory",
    "sample_from_posterior",
    "scaling_study",
    "sphere_bounds",
    "sphere_size",
    "t_plus_triggered",
    "t_r_triggered",
    "uniform_prior",
    "update",
    "variance_transition_profile",
]
