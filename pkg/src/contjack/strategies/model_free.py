"""Profile learner: estimate each opponent's win envelope per seat, then best-respond.

For every (opponent, seat) pair the learner keeps ``m`` buckets over the
constraint ``t`` the opponent faced. Each observed turn contributes the
indicator ``score <= t`` (a bust counts as score 0) to the bucket holding
``t``. The product of the later opponents' estimates is the learner's win
envelope, and the threshold maximizes ``e^A * int_A^1 M`` over ``A >= t``.
"""

from __future__ import annotations

import csv
from typing import Callable, Optional

import numpy as np
from scipy.optimize import isotonic_regression

from ..engine import Observation, RoundLog
from ..equilibrium import rational_upper_bound
from ..kernels import EnvelopeFunction, _solve_constant
from .base import Strategy

SCHEDULES = ("bucket", "global", "exponential")
MODEL_CSV_FIELDS = ("player", "seat", "bucket_lo", "bucket_hi", "L_hat", "visits")
MODEL_CSV_VERSION = "# contjack-opponent-model v1"


class OpponentModel:
    """Discretized estimates of ``P(score <= t)`` keyed by ``(player, seat)``.

    ``schedule`` picks the step weight of each update:

    * ``"bucket"``: ``1 / visits`` of the bucket (plain running mean);
    * ``"global"``: ``1 / r`` with ``r`` the learner's round counter;
    * ``"exponential"``: ``1 / sum_{i<n} decay**i`` with ``n`` the bucket's
      visit count, a recency-weighted mean for drifting opponents.

    Entries that were never observed read as all zeros.
    """

    def __init__(self, m: int = 256, schedule: str = "bucket", decay: float = 0.999):
        if m < 2:
            raise ValueError("need at least two buckets")
        if schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {schedule!r}; choose from {SCHEDULES}")
        if schedule == "exponential" and not 0.0 < decay < 1.0:
            raise ValueError("exponential schedule needs 0 < decay < 1")
        self.m = m
        self.schedule = schedule
        self.decay = decay
        self.edges = np.linspace(0.0, 1.0, m + 1)
        self._values: dict[tuple[int, int], np.ndarray] = {}
        self._visits: dict[tuple[int, int], np.ndarray] = {}
        self._zeros = np.zeros(m)

    def bucket(self, t: float) -> int:
        b = int(t * self.m)
        return b if b < self.m else self.m - 1

    def keys(self):
        return sorted(self._values)

    def values(self, player: int, seat: int) -> np.ndarray:
        return self._values.get((player, seat), self._zeros)

    def visits(self, player: int, seat: int) -> np.ndarray:
        return self._visits.get((player, seat), np.zeros(self.m, dtype=np.int64))

    def envelope(self, player: int, seat: int) -> EnvelopeFunction:
        return EnvelopeFunction(self.edges, self.values(player, seat).copy(), "constant")

    def _entry(self, key):
        vals = self._values.get(key)
        if vals is None:
            vals = self._values[key] = np.zeros(self.m)
            self._visits[key] = np.zeros(self.m, dtype=np.int64)
        return vals, self._visits[key]

    def step_weight(self, visits: int, round_count: int) -> float:
        if self.schedule == "bucket":
            return 1.0 / visits
        if self.schedule == "global":
            return 1.0 / max(round_count, 1)
        a = self.decay
        return (1.0 - a) / (1.0 - a**visits)

    def observe(self, player: int, seat: int, t: float, score: float, round_count: int = 0) -> None:
        vals, visits = self._entry((player, seat))
        b = self.bucket(t)
        visits[b] += 1
        target = 1.0 if score <= t else 0.0
        vals[b] += self.step_weight(int(visits[b]), round_count) * (target - vals[b])

    def set_values(self, player: int, seat: int, values, visits=None) -> None:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.m,):
            raise ValueError(f"expected {self.m} bucket values")
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise ValueError("L_hat values must lie in [0, 1]")
        self._values[(player, seat)] = values.copy()
        self._visits[(player, seat)] = (
            np.zeros(self.m, dtype=np.int64) if visits is None else np.asarray(visits, dtype=np.int64).copy()
        )

    @classmethod
    def from_functions(cls, funcs: dict[tuple[int, int], Callable[[float], float]], m: int = 256) -> "OpponentModel":
        """Exact bucket means of known envelopes (used as an oracle / warm start)."""
        model = cls(m)
        for (player, seat), f in funcs.items():
            model.set_values(player, seat, EnvelopeFunction.from_function(f, m).values)
        return model

    def write_csv(self, fh) -> None:
        fh.write(MODEL_CSV_VERSION + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MODEL_CSV_FIELDS)
        for player, seat in self.keys():
            vals, visits = self._values[(player, seat)], self._visits[(player, seat)]
            for b in range(self.m):
                w.writerow([player, seat, repr(float(self.edges[b])), repr(float(self.edges[b + 1])), repr(float(vals[b])), int(visits[b])])

    @classmethod
    def read_csv(cls, fh, schedule: str = "bucket", decay: float = 0.999) -> "OpponentModel":
        first = fh.readline().strip()
        if first != MODEL_CSV_VERSION:
            raise ValueError(f"not an opponent-model file (header {first!r})")
        rows = list(csv.DictReader(fh))
        groups: dict[tuple[int, int], list[dict]] = {}
        for row in rows:
            groups.setdefault((int(row["player"]), int(row["seat"])), []).append(row)
        ms = {len(g) for g in groups.values()}
        if len(ms) > 1:
            raise ValueError("inconsistent bucket counts in model file")
        model = cls(ms.pop() if ms else 256, schedule, decay)
        for key, group in groups.items():
            group.sort(key=lambda r: float(r["bucket_lo"]))
            model.set_values(*key, [float(r["L_hat"]) for r in group], [int(r["visits"]) for r in group])
        return model


def isotonic_envelope(values: np.ndarray, visits: np.ndarray) -> np.ndarray:
    """Visit-weighted non-decreasing projection; unvisited buckets get a tiny weight."""
    w = np.where(visits > 0, visits.astype(float), 1e-6)
    return np.clip(isotonic_regression(values, weights=w).x, 0.0, 1.0)


class ModelFreeStrategy(Strategy):
    """Best response to the learned opponent profile.

    The threshold is ``max(t, min(A, gamma_k))`` where ``A`` maximizes the
    payoff under the estimated envelope over ``A >= t`` and ``gamma_k`` is the
    rational upper bound for ``k`` opponents still to act.
    """

    name = "model_free"
    rational = True

    def __init__(
        self,
        m: int = 256,
        schedule: str = "bucket",
        decay: float = 0.999,
        isotonic: bool = False,
        rational_cap: bool = True,
        learn: bool = True,
        model: Optional[OpponentModel] = None,
    ):
        self.m = m
        self.schedule = schedule
        self.decay = decay
        self.isotonic = isotonic
        self.rational_cap = rational_cap
        self.learn = learn
        self.model = model if model is not None else OpponentModel(m, schedule, decay)
        self.rounds_seen = 0

    def reset(self, player_id, n_players, rng):
        super().reset(player_id, n_players, rng)
        self._caps = [1.0] + (list(rational_upper_bound(n_players - 1).values) if n_players > 1 else [])

    def win_envelope(self, obs: Observation) -> np.ndarray:
        env = np.ones(self.model.m)
        for offset, pid in enumerate(obs.later_players, start=obs.seat + 1):
            vals = self.model.values(pid, offset)
            if self.isotonic:
                vals = isotonic_envelope(vals, self.model.visits(pid, offset))
            env = env * vals
        return env

    def decide(self, obs: Observation) -> float:
        t = obs.constraint_t
        if obs.remaining == 0:
            return t
        env = self.win_envelope(obs)
        best = _solve_constant(self.model.edges, env, t).threshold
        if self.rational_cap:
            best = min(best, self._caps[obs.remaining])
        return t if t > best else best

    def end_round(self, log: RoundLog) -> None:
        self.rounds_seen += 1
        if not self.learn:
            return
        for seat, rec in enumerate(log.seats):
            if rec.player_id != self.player_id:
                self.model.observe(rec.player_id, seat, rec.constraint_t, rec.outcome.score, self.rounds_seen)

    def params(self):
        return {
            "m": self.m,
            "schedule": self.schedule,
            "decay": self.decay,
            "isotonic": self.isotonic,
            "rational_cap": self.rational_cap,
        }
