"""Performance metrics and the experiment harness.

* scale metric ``s = n * R``: 1 means an average share of the points;
* reference metric ``r = (R - R_ref) / (R_ne - R_ref)``: 0 at the uniform
  reference strategy, 1 at equilibrium play.

All metrics are computed from the per-round reward matrix, which is itself a
function of the round logs (see :func:`rewards_from_logs`).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .engine import RoundLog, run_tournament
from .strategies import Strategy, make_strategy

UNDEFINED_GAP = 1e-9
CURVE_FIELDS = ("round", "player_id", "cum_reward", "window_reward", "s", "r")


class UndefinedMetricError(ValueError):
    pass


def scale_metric(R: float, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= R <= 1.0:
        raise ValueError(f"mean reward must lie in [0, 1], got {R!r}")
    return n * R


def reference_metric(R: float, R_ref: float, R_ne: float) -> float:
    gap = R_ne - R_ref
    if abs(gap) < UNDEFINED_GAP:
        raise UndefinedMetricError("equilibrium and reference rewards coincide; r is undefined")
    return (R - R_ref) / gap


@dataclass
class PlayerMetrics:
    player_id: int
    name: str
    mean_reward: float
    stderr: float
    s: float
    s_stderr: float
    r: Optional[float] = None


@dataclass
class MetricReport:
    n_players: int
    window: tuple[int, int]
    players: list[PlayerMetrics]
    nash_player: Optional[int] = None
    reference_player: Optional[int] = None
    seed: Optional[int] = None
    note: str = ""

    def by_id(self, player_id: int) -> PlayerMetrics:
        return self.players[player_id]

    def to_json_dict(self) -> dict:
        return {
            "n_players": self.n_players,
            "window": list(self.window),
            "seed": self.seed,
            "nash_player": self.nash_player,
            "reference_player": self.reference_player,
            "note": self.note,
            "players": [asdict(p) for p in self.players],
        }


def rewards_from_logs(logs: Iterable[RoundLog], n_players: int) -> np.ndarray:
    rows = []
    for log in logs:
        row = np.zeros(n_players)
        for pid in log.winners:
            row[pid] = log.point_share
        rows.append(row)
    return np.array(rows).reshape(-1, n_players)


def default_window(rounds: int, fraction: float = 0.1) -> tuple[int, int]:
    width = max(1, int(round(rounds * fraction))) if rounds else 0
    return rounds - width, rounds


def metrics_from_rewards(
    rewards: np.ndarray,
    names: Optional[Sequence[str]] = None,
    window: Optional[tuple[int, int]] = None,
    nash_player: Optional[int] = None,
    reference_player: Optional[int] = None,
    seed: Optional[int] = None,
) -> MetricReport:
    """Per-player metrics over ``rewards[window[0]:window[1]]``."""
    rounds, n = rewards.shape
    names = list(names) if names is not None else [f"p{i}" for i in range(n)]
    start, stop = window if window is not None else default_window(rounds)
    block = rewards[start:stop]
    count = block.shape[0]
    means = block.mean(axis=0) if count else np.zeros(n)
    ses = block.std(axis=0, ddof=1) / math.sqrt(count) if count > 1 else np.full(n, np.nan)
    note = ""
    r_values: list[Optional[float]] = [None] * n
    if nash_player is not None and reference_player is not None and count:
        try:
            r_values = [reference_metric(m, means[reference_player], means[nash_player]) for m in means]
        except UndefinedMetricError as exc:
            note = str(exc)
    players = [
        PlayerMetrics(i, names[i], float(means[i]), float(ses[i]), n * float(means[i]), n * float(ses[i]), r_values[i])
        for i in range(n)
    ]
    return MetricReport(n, (start, stop), players, nash_player, reference_player, seed, note)


def convergence_rows(
    rewards: np.ndarray,
    every: int = 1000,
    window: int = 10000,
    nash_player: Optional[int] = None,
    reference_player: Optional[int] = None,
) -> list[dict]:
    """Reward-vs-round checkpoints: running mean and trailing-window mean per player."""
    rounds, n = rewards.shape
    if rounds == 0:
        return []
    cum = np.cumsum(rewards, axis=0)
    rows = []
    for end in range(every, rounds + 1, every):
        lo = max(0, end - window)
        win = (cum[end - 1] - (cum[lo - 1] if lo > 0 else 0.0)) / (end - lo)
        run = cum[end - 1] / end
        r = [""] * n
        if nash_player is not None and reference_player is not None:
            try:
                r = [reference_metric(w, win[reference_player], win[nash_player]) for w in win]
            except UndefinedMetricError:
                pass
        for pid in range(n):
            rows.append(
                {
                    "round": end,
                    "player_id": pid,
                    "cum_reward": float(run[pid]),
                    "window_reward": float(win[pid]),
                    "s": n * float(win[pid]),
                    "r": r[pid],
                }
            )
    return rows


def write_convergence_csv(rows: Iterable[dict], fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=CURVE_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


StrategyFactory = Union[dict, Callable[[], Strategy]]


@dataclass
class ExperimentSpec:
    """A lineup replayed over several seeds.

    ``lineup`` entries are strategy specs (``{"kind": ..., **params}``) or
    zero-argument factories; fresh strategies are built for every seed.
    """

    lineup: list[StrategyFactory]
    rounds: int
    seeds: list[int] = field(default_factory=lambda: [0])
    window_fraction: float = 0.1
    window: Optional[tuple[int, int]] = None
    curve_every: int = 1000
    curve_window: int = 10000

    def build(self) -> list[Strategy]:
        players = []
        for entry in self.lineup:
            if isinstance(entry, dict):
                params = {k: v for k, v in entry.items() if k != "kind"}
                players.append(make_strategy(entry["kind"], **params))
            else:
                players.append(entry())
        return players

    def echo(self) -> dict:
        return {
            "lineup": [e if isinstance(e, dict) else getattr(e, "__name__", repr(e)) for e in self.lineup],
            "rounds": self.rounds,
            "seeds": list(self.seeds),
            "window_fraction": self.window_fraction,
            "window": list(self.window) if self.window else None,
            "curve_every": self.curve_every,
            "curve_window": self.curve_window,
        }


@dataclass
class ExperimentRun:
    seed: int
    report: MetricReport
    curve: list[dict]
    rewards: np.ndarray
    players: list[Strategy]


@dataclass
class ExperimentResult:
    config: dict
    runs: list[ExperimentRun]

    def to_json_dict(self) -> dict:
        return {"config": self.config, "reports": [run.report.to_json_dict() for run in self.runs]}

    def write_json(self, fh) -> None:
        json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _find_role(players: Sequence[Strategy], name: str) -> Optional[int]:
    return next((i for i, p in enumerate(players) if p.name == name), None)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    runs = []
    for seed in spec.seeds:
        players = spec.build()
        result = run_tournament(players, spec.rounds, seed)
        if result.aborted:
            raise RuntimeError(result.aborted)
        ne = _find_role(players, "nash")
        ref = _find_role(players, "uniform")
        window = spec.window or default_window(spec.rounds, spec.window_fraction)
        report = metrics_from_rewards(result.rewards, result.player_names, window, ne, ref, seed)
        curve = convergence_rows(result.rewards, spec.curve_every, spec.curve_window, ne, ref)
        runs.append(ExperimentRun(seed, report, curve, result.rewards, players))
    return ExperimentResult(spec.echo(), runs)
