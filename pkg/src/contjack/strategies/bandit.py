"""Epsilon-greedy contextual bandit over a threshold grid, with policy pruning.

Contexts: seats 0-2 get one bandit per set of players still to act (order is
ignored); later seats share one bandit per seat. Arms start on a uniform grid
capped at the rational upper bound. Pruning drops the worst tenth of the arms
and splits each of the best tenth in two, so the grid densifies around the
winners while the arm count stays fixed.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

from ..engine import Observation, RoundLog
from ..equilibrium import nash_thresholds, rational_upper_bound
from .base import Strategy
from .static import uniform_reference_threshold

log = logging.getLogger(__name__)

BANDIT_JSON_FORMAT = "contjack-bandit"
BANDIT_JSON_VERSION = 1
MIN_ARMS_TO_PRUNE = 10


@dataclass
class EpsilonSchedule:
    """``initial`` halved every ``halve_every`` rounds, and 0 from ``zero_after`` on."""

    initial: float = 0.1
    halve_every: Optional[int] = None
    zero_after: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.initial <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")

    def __call__(self, round_count: int) -> float:
        if self.zero_after is not None and round_count >= self.zero_after:
            return 0.0
        if self.halve_every:
            return self.initial * 0.5 ** (round_count // self.halve_every)
        return self.initial


@dataclass
class ArmSet:
    thresholds: list[float]
    rewards: list[float]
    counts: list[int]
    updates: int = 0
    next_prune: Optional[int] = None
    prune_interval: Optional[float] = None
    prunes_done: int = 0
    history: list[dict] = field(default_factory=list)

    def greedy(self) -> int:
        best = max(self.rewards)
        # thresholds are sorted, so the first maximizer is the lowest threshold
        return self.rewards.index(best)

    def nearest(self, x: float) -> Optional[int]:
        th = self.thresholds
        if len(th) > 1:
            half = 0.5 * min(b - a for a, b in zip(th[:-1], th[1:]))
        else:
            half = 0.0
        if x < th[0] - half or x > th[-1] + half:
            return None
        return min(range(len(th)), key=lambda i: abs(th[i] - x))


class BanditState:
    """All arm sets of one bandit learner, keyed by context."""

    def __init__(
        self,
        grid: list[float],
        init_reward: float = 1.0,
        init_count: int = 10,
        step: str = "sample_average",
        decay: float = 0.999,
        prune_first: Optional[int] = 20000,
        prune_growth: float = 2.0,
        max_prunes: int = 4,
    ):
        if step not in ("sample_average", "exponential"):
            raise ValueError(f"unknown step rule {step!r}")
        self.grid = sorted(grid)
        self.init_reward = init_reward
        self.init_count = init_count
        self.step = step
        self.decay = decay
        self.prune_first = prune_first
        self.prune_growth = prune_growth
        self.max_prunes = max_prunes
        self.contexts: dict[tuple, ArmSet] = {}

    def arms(self, key: tuple) -> ArmSet:
        arms = self.contexts.get(key)
        if arms is None:
            k = len(self.grid)
            arms = ArmSet(
                list(self.grid),
                [self.init_reward] * k,
                [self.init_count] * k,
                next_prune=self.prune_first,
                prune_interval=self.prune_first,
            )
            self.contexts[key] = arms
        return arms

    def update(self, key: tuple, arm: int, reward: float) -> None:
        arms = self.arms(key)
        arms.counts[arm] += 1
        n = arms.counts[arm]
        if self.step == "sample_average":
            alpha = 1.0 / n
        else:
            alpha = (1.0 - self.decay) / (1.0 - self.decay**n)
        arms.rewards[arm] += alpha * (reward - arms.rewards[arm])
        arms.updates += 1
        if (
            arms.next_prune is not None
            and arms.updates >= arms.next_prune
            and arms.prunes_done < self.max_prunes
        ):
            self.prune(key)
            arms.prune_interval *= self.prune_growth
            arms.next_prune = arms.updates + int(arms.prune_interval)

    def prune(self, key: tuple) -> None:
        arms = self.arms(key)
        k = len(arms.thresholds)
        if k < MIN_ARMS_TO_PRUNE:
            log.warning("context %r has %d arms; pruning needs at least %d", key, k, MIN_ARMS_TO_PRUNE)
            return
        cut = max(1, k // 10)
        th, rw, ct = arms.thresholds, arms.rewards, arms.counts
        # bottom: lowest reward, ties -> lowest threshold; top: highest reward, ties -> highest threshold
        bottom = set(sorted(range(k), key=lambda i: (rw[i], th[i]))[:cut])
        top = set(sorted(range(k), key=lambda i: (-rw[i], -th[i]))[:cut]) - bottom
        keep = [i for i in range(k) if i not in bottom]
        new = []
        for pos, i in enumerate(keep):
            if i not in top:
                new.append((th[i], rw[i], ct[i]))
                continue
            left = th[keep[pos - 1]] if pos > 0 else None
            right = th[keep[pos + 1]] if pos + 1 < len(keep) else None
            # children sit halfway between the arm and the cell boundary toward each neighbour
            lo = th[i] - (th[i] - left) / 4.0 if left is not None else th[i]
            hi = th[i] + (right - th[i]) / 4.0 if right is not None else th[i]
            if lo == hi:
                new.append((th[i], rw[i], ct[i]))
                continue
            new.append((lo, rw[i], self.init_count))
            new.append((hi, rw[i], self.init_count))
        new.sort(key=lambda a: a[0])
        # an edge arm split into itself plus one child keeps k; top arms that
        # could not split leave the count one short, so refill from the removed arms
        removed = sorted(bottom, key=lambda i: (-rw[i], -th[i]))
        while len(new) < k and removed:
            i = removed.pop(0)
            new.append((th[i], rw[i], ct[i]))
            new.sort(key=lambda a: a[0])
        arms.thresholds = [a[0] for a in new]
        arms.rewards = [a[1] for a in new]
        arms.counts = [a[2] for a in new]
        arms.prunes_done += 1
        arms.history.append(
            {
                "update": arms.updates,
                "removed": sorted(th[i] for i in bottom),
                "split": sorted(th[i] for i in top),
            }
        )

    def to_json_dict(self, epsilon: float, rounds: int) -> dict:
        return {
            "format": BANDIT_JSON_FORMAT,
            "version": BANDIT_JSON_VERSION,
            "epsilon": epsilon,
            "rounds": rounds,
            "contexts": [
                {
                    "context": _key_to_json(key),
                    "arms": [
                        {"threshold": t, "r": r, "N": n} for t, r, n in zip(arms.thresholds, arms.rewards, arms.counts)
                    ],
                    "updates": arms.updates,
                    "prune_history": arms.history,
                }
                for key, arms in sorted(self.contexts.items(), key=lambda kv: repr(kv[0]))
            ],
        }

    def max_threshold(self) -> float:
        return max((max(a.thresholds) for a in self.contexts.values()), default=max(self.grid))


def _key_to_json(key: tuple):
    return [key[0], list(key[1])] if len(key) > 1 else [key[0]]


def initial_grid(n_opponents: int, n_arms: int) -> list[float]:
    """Uniform grid on ``[alpha_{n//2} - 0.1, gamma_n]`` (lower end clamped at 0)."""
    if n_opponents < 1:
        return [i / max(n_arms - 1, 1) for i in range(n_arms)]
    half = n_opponents // 2
    lo = max(0.0, (nash_thresholds(half)[half] if half >= 1 else 0.0) - 0.1)
    hi = rational_upper_bound(n_opponents)[n_opponents]
    if n_arms == 1:
        return [hi]
    return [lo + (hi - lo) * i / (n_arms - 1) for i in range(n_arms)]


class BanditStrategy(Strategy):
    """Epsilon-greedy over threshold arms, one arm set per context.

    With probability ``epsilon`` the move comes from the uniform reference
    strategy; the arm nearest to that threshold (if it falls inside the grid)
    is credited. Otherwise the best-estimated arm is played as
    ``max(arm, t)``.
    """

    name = "bandit"
    rational = True

    def __init__(
        self,
        n_arms: int = 32,
        epsilon: float = 0.1,
        halve_every: Optional[int] = None,
        zero_after: Optional[int] = None,
        init_reward: float = 1.0,
        init_count: int = 10,
        step: str = "sample_average",
        decay: float = 0.999,
        prune_first: Optional[int] = 20000,
        prune_growth: float = 2.0,
        max_prunes: int = 4,
        credit_constrained: bool = True,
        exact_context_seats: int = 3,
    ):
        self.n_arms = n_arms
        self.schedule = EpsilonSchedule(epsilon, halve_every, zero_after)
        self.init_reward = init_reward
        self.init_count = init_count
        self.step = step
        self.decay = decay
        self.prune_first = prune_first
        self.prune_growth = prune_growth
        self.max_prunes = max_prunes
        self.credit_constrained = credit_constrained
        self.exact_context_seats = exact_context_seats
        self.state: Optional[BanditState] = None
        self.rounds_seen = 0
        self._pending = None

    def reset(self, player_id, n_players, rng):
        super().reset(player_id, n_players, rng)
        self.state = BanditState(
            initial_grid(n_players - 1, self.n_arms),
            self.init_reward,
            self.init_count,
            self.step,
            self.decay,
            self.prune_first,
            self.prune_growth,
            self.max_prunes,
        )
        self.rounds_seen = 0
        self._pending = None

    @property
    def epsilon(self) -> float:
        return self.schedule(self.rounds_seen)

    def context_key(self, obs: Observation) -> tuple:
        if 0 < obs.seat < self.exact_context_seats:
            return (obs.seat, tuple(sorted(obs.later_players)))
        return (obs.seat,)

    def select(self, obs: Observation):
        """Return ``(threshold, context key, arm index or None, explored)``."""
        key = self.context_key(obs)
        arms = self.state.arms(key)
        t = obs.constraint_t
        eps = self.epsilon
        if eps > 0.0 and self.rng.uniform() < eps:
            x = uniform_reference_threshold(t, self.rng)
            return x, key, arms.nearest(x), True
        arm = arms.greedy()
        a = arms.thresholds[arm]
        return (t if t > a else a), key, arm, False

    def decide(self, obs: Observation) -> float:
        threshold, key, arm, explored = self.select(obs)
        self._pending = (key, arm, obs.constraint_t)
        return threshold

    def end_round(self, log: RoundLog) -> None:
        pending, self._pending = self._pending, None
        self.rounds_seen += 1
        if pending is None:
            return
        key, arm, t = pending
        if arm is None:
            return
        if not self.credit_constrained and t > self.state.arms(key).thresholds[arm]:
            return
        self.state.update(key, arm, log.reward(self.player_id))

    def export_json(self, fh) -> None:
        json.dump(self.state.to_json_dict(self.epsilon, self.rounds_seen), fh, indent=2)
        fh.write("\n")

    def params(self):
        return {
            "n_arms": self.n_arms,
            "epsilon": self.schedule.initial,
            "halve_every": self.schedule.halve_every,
            "zero_after": self.schedule.zero_after,
            "init_reward": self.init_reward,
            "init_count": self.init_count,
            "step": self.step,
            "decay": self.decay,
            "prune_first": self.prune_first,
            "prune_growth": self.prune_growth,
            "max_prunes": self.max_prunes,
            "credit_constrained": self.credit_constrained,
        }
