from __future__ import annotations

from typing import Optional

import numpy as np

from ..engine import Observation, RoundLog
from ..rng import RngStream


class Strategy:
    """Base class for everything that sits in a seat.

    The engine calls :meth:`reset` once per tournament, :meth:`decide` once per
    turn and :meth:`end_round` after every round (with the full log, so
    learners can look at every other player's turn).
    """

    name = "strategy"
    #: never plays below the current constraint
    rational = False

    player_id: int = -1
    n_players: int = 0
    rng: Optional[RngStream] = None

    def reset(self, player_id: int, n_players: int, rng: RngStream) -> None:
        self.player_id = player_id
        self.n_players = n_players
        self.rng = rng

    def decide(self, obs: Observation) -> float:
        raise NotImplementedError

    def end_round(self, log: RoundLog) -> None:
        pass

    def decide_batch(self, seat: int, n_players: int, t: np.ndarray) -> np.ndarray:
        """Vectorized decision for fixed-seating batch simulation (static strategies only)."""
        raise NotImplementedError(f"{type(self).__name__} has no batch form")

    def params(self) -> dict:
        return {}

    def spec(self) -> dict:
        return {"kind": self.name, **self.params()}
