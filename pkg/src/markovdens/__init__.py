"""Adaptive penalized projection estimation for Markov chains.

Estimates the stationary density, the joint density of consecutive states
and the transition density of a discrete-time Markov chain by model
selection over nested projection spaces.
"""

__version__ = "0.1.0"

from .basis import BasisFamily, CapRule, Family, ModelCollection, ModelSpec, make_collection
from .chains import PRESETS, ChainKind, ChainSample, ChainSpec, get_chain, simulate
from .errors import ConfigurationError, DomainError
from .estimator import (
    DensityEstimate1D,
    DensityEstimate2D,
    PenaltyConfig,
    TransitionEstimate,
    fit_transition,
    quotient_transition,
    select_model_1d,
    select_model_2d,
)
from .kernels import BACKEND
