"""Continuous blackjack: analytic thresholds, a seedable simulator and learning strategies."""

from .engine import Observation, RoundLog, TurnOutcome, play_round, play_turn, run_tournament, simulate_fixed_seating
from .equilibrium import (
    FiniteMixedStrategy,
    ThresholdTable,
    best_response_adaptive_thresholds,
    best_response_mixed,
    best_response_pure,
    best_response_sensitivity,
    nash_thresholds,
    rational_upper_bound,
    second_derivative_at_nash,
    simple_threshold_upper_bound,
    stable_upper_bound,
)
from .kernels import (
    EnvelopeFunction,
    best_response_envelope,
    bust_kernel_F,
    payoff_envelope,
    payoff_pure,
    product_H,
    response_kernel_G,
)
from .rng import GameRng, RngStream

__version__ = "0.1.0"
