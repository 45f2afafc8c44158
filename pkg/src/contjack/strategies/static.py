"""Non-learning strategies."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..engine import Observation
from ..equilibrium import ThresholdTable, nash_thresholds
from ..numerics import check_unit
from .base import Strategy


class FixedThreshold(Strategy):
    """Always the same threshold, whatever happened earlier in the round."""

    name = "fixed"

    def __init__(self, a: float):
        self.a = check_unit("a", a)

    def decide(self, obs: Observation) -> float:
        return self.a

    def decide_batch(self, seat, n_players, t):
        return np.full(t.shape, self.a)

    def params(self):
        return {"a": self.a}


class AdaptiveThreshold(Strategy):
    """Plays ``max(t, a)``."""

    name = "adaptive"
    rational = True

    def __init__(self, a: float):
        self.a = check_unit("a", a)

    def decide(self, obs: Observation) -> float:
        return obs.constraint_t if obs.constraint_t > self.a else self.a

    def decide_batch(self, seat, n_players, t):
        return np.maximum(t, self.a)

    def params(self):
        return {"a": self.a}


class NashStrategy(Strategy):
    """Equilibrium play: ``max(t, alpha_m)`` with ``m`` players still to act."""

    name = "nash"
    rational = True

    def __init__(self, table: Optional[ThresholdTable] = None):
        self.table = table

    def reset(self, player_id, n_players, rng):
        super().reset(player_id, n_players, rng)
        need = max(1, n_players - 1)
        if self.table is None or self.table.n_max < need:
            if self.table is not None:
                raise ValueError(f"nash table covers {self.table.n_max} opponents, game has {n_players - 1}")
            self.table = nash_thresholds(need)
        self._alphas = [self.table[m] for m in range(n_players)] if n_players > 0 else []

    def decide(self, obs: Observation) -> float:
        a = self._alphas[obs.remaining] if self._alphas else self.table[obs.remaining]
        t = obs.constraint_t
        return t if t > a else a

    def decide_batch(self, seat, n_players, t):
        table = self.table or nash_thresholds(max(1, n_players - 1))
        return np.maximum(t, table[n_players - seat - 1])


class UniformReference(Strategy):
    """Threshold drawn uniformly from ``[t, 1)``; also the bandit's exploration move."""

    name = "uniform"
    rational = True

    def decide(self, obs: Observation) -> float:
        return uniform_reference_threshold(obs.constraint_t, self.rng)


def uniform_reference_threshold(t: float, rng) -> float:
    if t >= 1.0:
        return t
    return t + (1.0 - t) * rng.uniform()
