"""Multivariate Hawkes processes: simulation, likelihood, Gibbs fitting, influence."""

from .gibbs import Priors, PosteriorSamples, fit, normal_gamma_posterior, sample_parent_posterior
from .influence import (
    InfluenceMatrix,
    aggregate_influence,
    external_influence,
    influence_normalized,
    influence_raw,
)
from .model import (
    DEFAULT_DT_MAX,
    EventSeq,
    HawkesModel,
    compensator,
    impulse_cdf,
    impulse_density,
    log_likelihood,
    simulate,
)

__all__ = [
    "DEFAULT_DT_MAX", "EventSeq", "HawkesModel", "InfluenceMatrix", "PosteriorSamples", "Priors",
    "aggregate_influence", "compensator", "external_influence", "fit", "impulse_cdf",
    "impulse_density", "influence_normalized", "influence_raw", "log_likelihood",
    "normal_gamma_posterior", "sample_parent_posterior", "simulate",
]
