"""Sequential Monte Carlo parameter estimation with stochastic-approximation
EM and pluggable learning-rate schedules."""

__version__ = "0.1.0"

from .core import ConfigError, RngStream, derive_stream
from .em import (
    AveragedOEM,
    BatchEM,
    IntrospectiveOEM,
    OnlineEM,
    cap_gamma,
    make_scheduler,
    propose_gamma,
    pseudo_update,
    telescoped_weights,
)
from .experiment import ExperimentConfig, load_presets, run_experiment
from .kalman import kalman_filter, kalman_smoother
from .models import MODELS, FullAR, SimplifiedAR, StochasticVolatility, TwoDimAR, make_model
from .regression import RegressionState
from .smc import DegenerateWeightsError, ParticleSystem, ess, init_particles, resample, step

__all__ = [
    "AveragedOEM", "BatchEM", "ConfigError", "DegenerateWeightsError",
    "ExperimentConfig", "FullAR", "IntrospectiveOEM", "MODELS", "OnlineEM",
    "ParticleSystem", "RegressionState", "RngStream", "SimplifiedAR",
    "StochasticVolatility", "TwoDimAR", "cap_gamma", "derive_stream", "ess",
    "init_particles", "kalman_filter", "kalman_smoother", "load_presets",
    "make_model", "make_scheduler", "propose_gamma", "pseudo_update",
    "resample", "run_experiment", "step", "telescoped_weights",
]
