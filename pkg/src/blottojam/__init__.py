"""Evolutionary Colonel Blotto solver for OFDM anti-jamming power allocation."""

from .blotto import (
    GameConfig,
    MixedStrategy,
    NashGaps,
    PowerGrid,
    Side,
    best_response_oracle,
    dominance_check,
    epsilon_nash_check,
    expected_payoff_ap,
    expected_payoff_jammer,
    nash_gaps,
)
from .channel import ChannelKind, GainSample, RadioParams
from .errors import ConfigurationError, UnsupportedModelError
from .evolution import EvolutionParams, EvolutionTrace, Population
from .experiments import ExperimentSpec

__version__ = "0.1.0"
