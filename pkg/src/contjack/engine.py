"""Round and tournament simulator.

A turn hits while the running sum is at or below the threshold and stops at
the first sum above it; a sum above 1 is a bust and scores 0. The highest
score takes the point and ties (including everyone busting at 0) split it.

The engine never enforces ``threshold >= constraint``: strategies own that
choice, so irrational strategies can be simulated too.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .rng import GameRng, RngStream, turn_keys, uniforms_array

ROUNDLOG_FIELDS = ("round", "seat", "player_id", "threshold", "n_draws", "sum", "score", "busted", "point_share")


class RoundAborted(RuntimeError):
    def __init__(self, round_index: int, player_id: int, detail: str):
        super().__init__(f"round {round_index} aborted: player {player_id} {detail}")
        self.round_index = round_index
        self.player_id = player_id


@dataclass(frozen=True, slots=True)
class Observation:
    round_index: int
    seat: int
    total_players: int
    seating: tuple[int, ...]
    prior_scores: tuple[float, ...]
    constraint_t: float

    @property
    def player_id(self) -> int:
        return self.seating[self.seat]

    @property
    def remaining(self) -> int:
        """Players still to act after this seat."""
        return self.total_players - self.seat - 1

    @property
    def later_players(self) -> tuple[int, ...]:
        return self.seating[self.seat + 1 :]


@dataclass(frozen=True, slots=True)
class TurnOutcome:
    draws: tuple[float, ...]
    sum: float
    score: float
    busted: bool


@dataclass(frozen=True, slots=True)
class SeatRecord:
    player_id: int
    constraint_t: float
    threshold: float
    outcome: TurnOutcome


@dataclass(frozen=True, slots=True)
class RoundLog:
    round_index: int
    seating: tuple[int, ...]
    seats: tuple[SeatRecord, ...]
    winners: tuple[int, ...]
    point_share: float

    def reward(self, player_id: int) -> float:
        return self.point_share if player_id in self.winners else 0.0

    def csv_rows(self):
        for seat, rec in enumerate(self.seats):
            yield {
                "round": self.round_index,
                "seat": seat,
                "player_id": rec.player_id,
                "threshold": repr(rec.threshold),
                "n_draws": len(rec.outcome.draws),
                "sum": repr(rec.outcome.sum),
                "score": repr(rec.outcome.score),
                "busted": int(rec.outcome.busted),
                "point_share": repr(self.reward(rec.player_id)),
            }


def play_turn(rng: RngStream, threshold: float) -> TurnOutcome:
    """Hit while ``sum <= threshold``."""
    draws = []
    total = 0.0
    while total <= threshold:
        x = rng.uniform()
        draws.append(x)
        total += x
    busted = total > 1.0
    return TurnOutcome(tuple(draws), total, 0.0 if busted else total, busted)


def _validated(threshold, round_index: int, player_id: int) -> float:
    try:
        value = float(threshold)
    except (TypeError, ValueError):
        raise RoundAborted(round_index, player_id, f"returned non-numeric threshold {threshold!r}") from None
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise RoundAborted(round_index, player_id, f"returned threshold {value!r} outside [0, 1]")
    return value


def play_round(
    rng: GameRng,
    players: Sequence,
    round_index: int,
    seating: Optional[Sequence[int]] = None,
) -> RoundLog:
    """Play one round; ``players[i]`` is the strategy of player id ``i``.

    ``seating`` overrides the random permutation (fixed-seating experiments).
    """
    n = len(players)
    if n < 1:
        raise ValueError("a round needs at least one player")
    order = tuple(seating) if seating is not None else tuple(rng.seating(round_index, n))
    scores: list[float] = []
    records = []
    t = 0.0
    for seat, pid in enumerate(order):
        obs = Observation(round_index, seat, n, order, tuple(scores), t)
        raw = players[pid].decide(obs)
        threshold = _validated(raw, round_index, pid)
        outcome = play_turn(rng.turn(round_index, seat), threshold)
        records.append(SeatRecord(pid, t, threshold, outcome))
        scores.append(outcome.score)
        if outcome.score > t:
            t = outcome.score
    best = max(scores)
    winners = tuple(pid for pid, s in zip(order, scores) if s == best)
    return RoundLog(round_index, order, tuple(records), winners, 1.0 / len(winners))


# ---------------------------------------------------------------------------
# Tournaments
# ---------------------------------------------------------------------------


@dataclass
class TournamentResult:
    seed: int
    rounds: int
    player_names: list[str]
    rewards: np.ndarray
    completed: int
    aborted: Optional[str] = None
    config: dict = field(default_factory=dict)

    @property
    def totals(self) -> np.ndarray:
        return self.rewards[: self.completed].sum(axis=0)

    @property
    def mean_rewards(self) -> np.ndarray:
        if self.completed == 0:
            return np.zeros(len(self.player_names))
        return self.totals / self.completed

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "rounds": self.rounds,
            "completed": self.completed,
            "partial": self.aborted is not None,
            "aborted": self.aborted,
            "players": [
                {"player_id": i, "name": name, "total": float(tot), "mean": float(mean)}
                for i, (name, tot, mean) in enumerate(zip(self.player_names, self.totals, self.mean_rewards))
            ],
            "config": self.config,
        }

    def write_json(self, fh) -> None:
        json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_tournament(
    players: Sequence,
    rounds: int,
    seed: int,
    *,
    seating: Optional[Sequence[int]] = None,
    on_round: Optional[Callable[[RoundLog], None]] = None,
    log_every: int = 1,
    config: Optional[dict] = None,
    raise_on_abort: bool = False,
) -> TournamentResult:
    """Play ``rounds`` rounds with reshuffled seating.

    Every strategy gets ``reset(player_id, n_players, rng)`` once and
    ``end_round(log)`` after each round. ``on_round`` receives every
    ``log_every``-th log. A strategy error stops the tournament and the result
    is flagged partial (or re-raised with ``raise_on_abort``).
    """
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    n = len(players)
    rng = GameRng(seed)
    for pid, strat in enumerate(players):
        strat.reset(pid, n, rng.strategy(pid))
    rewards = np.zeros((rounds, n))
    aborted = None
    completed = 0
    for r in range(rounds):
        try:
            log = play_round(rng, players, r, seating)
        except RoundAborted as exc:
            if raise_on_abort:
                raise
            aborted = str(exc)
            break
        share = log.point_share
        for pid in log.winners:
            rewards[r, pid] = share
        for strat in players:
            strat.end_round(log)
        if on_round is not None and r % log_every == 0:
            on_round(log)
        completed += 1
    names = [getattr(p, "name", type(p).__name__) for p in players]
    return TournamentResult(int(seed), rounds, names, rewards, completed, aborted, dict(config or {}))


class RoundLogWriter:
    """Streams round logs as CSV rows; usable as ``on_round``."""

    def __init__(self, fh):
        self._writer = csv.DictWriter(fh, fieldnames=ROUNDLOG_FIELDS, lineterminator="\n")
        self._writer.writeheader()

    def __call__(self, log: RoundLog) -> None:
        self._writer.writerows(log.csv_rows())


def read_roundlog_csv(fh) -> list[dict]:
    rows = []
    for row in csv.DictReader(fh):
        rows.append(
            {
                "round": int(row["round"]),
                "seat": int(row["seat"]),
                "player_id": int(row["player_id"]),
                "threshold": float(row["threshold"]),
                "n_draws": int(row["n_draws"]),
                "sum": float(row["sum"]),
                "score": float(row["score"]),
                "busted": bool(int(row["busted"])),
                "point_share": float(row["point_share"]),
            }
        )
    return rows


# ---------------------------------------------------------------------------
# Vectorized fixed-seating simulation
# ---------------------------------------------------------------------------


@dataclass
class BatchResult:
    thresholds: np.ndarray  # (rounds, seats)
    scores: np.ndarray
    busted: np.ndarray
    n_draws: np.ndarray
    rewards: np.ndarray  # per seat, ties split

    @property
    def all_bust(self) -> np.ndarray:
        return self.busted.all(axis=1)

    def win_rewards(self) -> np.ndarray:
        """Rewards with all-bust splits removed (outright or positive-score tie wins only)."""
        return np.where(self.all_bust[:, None], 0.0, self.rewards)


def simulate_turns(keys: np.ndarray, thresholds: np.ndarray):
    """Vectorized :func:`play_turn` over streams ``keys``."""
    sums = np.zeros(keys.shape)
    n_draws = np.zeros(keys.shape, dtype=np.int64)
    active = np.ones(keys.shape, dtype=bool)
    position = 0
    while active.any():
        idx = np.flatnonzero(active)
        sums[idx] += uniforms_array(keys[idx], position)
        n_draws[idx] += 1
        active[idx] = sums[idx] <= thresholds[idx]
        position += 1
    busted = sums > 1.0
    return sums, np.where(busted, 0.0, sums), busted, n_draws


def simulate_fixed_seating(
    seed: int,
    deciders: Sequence[Callable[[np.ndarray], np.ndarray]],
    rounds: int,
    start_round: int = 0,
) -> BatchResult:
    """Simulate ``rounds`` rounds with seat ``i`` choosing ``deciders[i](t)``.

    Each decider maps the array of constraints it faces to thresholds.
    Draws are the ones :func:`play_round` would use with the same seed and a
    fixed seating, so results match the scalar engine round for round.
    """
    rng = GameRng(seed)
    r_idx = np.arange(start_round, start_round + rounds, dtype=np.int64)
    n = len(deciders)
    thr = np.empty((rounds, n))
    scores = np.empty((rounds, n))
    busted = np.empty((rounds, n), dtype=bool)
    draws = np.empty((rounds, n), dtype=np.int64)
    t = np.zeros(rounds)
    for seat, decide in enumerate(deciders):
        th = np.broadcast_to(np.asarray(decide(t.copy()), dtype=float), (rounds,)).copy()
        if np.any(np.isnan(th)) or np.any(th < 0.0) or np.any(th > 1.0):
            raise ValueError(f"seat {seat} produced thresholds outside [0, 1]")
        _, sc, bu, nd = simulate_turns(turn_keys(rng, r_idx, seat), th)
        thr[:, seat], scores[:, seat], busted[:, seat], draws[:, seat] = th, sc, bu, nd
        t = np.maximum(t, sc)
    best = scores.max(axis=1, keepdims=True)
    top = scores == best
    rewards = top / top.sum(axis=1, keepdims=True)
    return BatchResult(thr, scores, busted, draws, rewards)
