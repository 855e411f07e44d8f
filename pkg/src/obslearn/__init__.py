"""Numerical laboratory for two-player repeated social learning with binary actions."""

__version__ = "0.1.0"

from .belief_engine import (
    ActionPair,
    ActionRule,
    Configuration,
    MyopicTrace,
    dominant_action,
    evolve_myopic,
    initial_configuration,
    myopic_threshold,
    update_beliefs,
)
from .equilibrium_lab import (
    AggregationReport,
    DeviationReport,
    Theorem2Construction,
    aggregation_score,
    check_symmetric_equilibrium,
    deviation_gain_bound,
    find_profitable_epsilon,
    theorem2_construct,
    two_threshold_dominance_bound,
)
from .intervals import BeliefInterval
from .play_engine import (
    BeliefPolicy,
    DeviationScript,
    Myopic,
    PlayTrace,
    ThresholdMap,
    TwoThresholdMap,
    deviation_gap,
    expected_value,
    play,
    play_many,
)
from .signal_model import (
    GaussianModel,
    Player,
    QuadratureSettings,
    conditional_type_density,
    is_symmetric,
    marginal_expectation,
    opponent,
    posterior_mean,
    truncated_expectation,
    type_probability,
)

__all__ = [
    "ActionPair", "ActionRule", "AggregationReport", "BeliefInterval", "BeliefPolicy", "Configuration",
    "DeviationReport", "DeviationScript", "GaussianModel", "Myopic", "MyopicTrace", "PlayTrace", "Player",
    "QuadratureSettings", "Theorem2Construction", "ThresholdMap", "TwoThresholdMap", "aggregation_score",
    "check_symmetric_equilibrium", "conditional_type_density", "deviation_gain_bound", "deviation_gap",
    "dominant_action", "evolve_myopic", "expected_value", "find_profitable_epsilon", "initial_configuration",
    "is_symmetric", "marginal_expectation", "myopic_threshold", "opponent", "play", "play_many",
    "posterior_mean", "theorem2_construct", "truncated_expectation", "two_threshold_dominance_bound",
    "type_probability", "update_beliefs",
]
