"""Defining equations for equilibrium thresholds, upper bounds and best responses.

Every equation here has the shape ``D(A) = 0`` with ``D`` decreasing on
``[0, 1]``, so all of them go through :func:`bisect_decreasing`.
"""

from __future__ import annotations

import csv
import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .kernels import _G, _H, bust_probability, stay_probability
from .numerics import (
    DEFAULT_ABS_TOL,
    DEFAULT_ROOT_TOL,
    adaptive_simpson,
    bisect_decreasing,
    check_unit_all,
)

KINDS = ("nash", "simple_upper", "rational_upper", "stable_upper")


@dataclass(frozen=True)
class ThresholdTable:
    kind: str
    values: tuple[float, ...]
    tol: float = DEFAULT_ROOT_TOL
    c: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown table kind {self.kind!r}")
        if self.kind == "stable_upper" and self.c is None:
            raise ValueError("stable_upper tables need the stability constant c")

    def __getitem__(self, n: int) -> float:
        """Value for ``n`` opponents; ``n == 0`` is defined (0) for Nash tables only."""
        if n == 0 and self.kind == "nash":
            return 0.0
        if not 1 <= n <= len(self.values):
            raise IndexError(f"{self.kind} table covers n=1..{len(self.values)}, asked for {n}")
        return self.values[n - 1]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def n_max(self) -> int:
        return len(self.values)

    def rows(self):
        for n, v in enumerate(self.values, start=1):
            yield {"kind": self.kind, "n": n, "c": "" if self.c is None else self.c, "value": v, "tol": self.tol}

    def write_csv(self, fh) -> None:
        writer = csv.DictWriter(fh, fieldnames=["kind", "n", "c", "value", "tol"], lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            row = dict(row, value=f"{row['value']:.10f}")
            writer.writerow(row)


@dataclass(frozen=True)
class FiniteMixedStrategy:
    atoms: tuple[tuple[tuple[float, ...], float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        atoms = tuple((check_unit_all("profile", p), float(w)) for p, w in self.atoms)
        if not atoms:
            raise ValueError("a mixture needs at least one atom")
        if any(w <= 0.0 for _, w in atoms):
            raise ValueError("mixture weights must be positive")
        if abs(sum(w for _, w in atoms) - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")
        if len({len(p) for p, _ in atoms}) != 1:
            raise ValueError("all atoms must have the same number of opponents")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_lists(cls, profiles: Sequence[Sequence[float]], weights: Sequence[float]):
        return cls(tuple(zip((tuple(p) for p in profiles), weights)))


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _nash_value(n: int, tol: float) -> float:
    def defining(a: float) -> float:
        tail = adaptive_simpson(lambda t: bust_probability(t) ** n, a, 1.0, DEFAULT_ABS_TOL)
        return tail - bust_probability(a) ** n

    return bisect_decreasing(defining, 0.0, 1.0, tol)


def nash_thresholds(n_max: int, tol: float = DEFAULT_ROOT_TOL) -> ThresholdTable:
    """First-seat equilibrium thresholds for ``n = 1..n_max`` opponents."""
    _check_n(n_max)
    return ThresholdTable("nash", tuple(_nash_value(n, tol) for n in range(1, n_max + 1)), tol)


@functools.lru_cache(maxsize=None)
def _simple_upper_value(n: int, tol: float) -> float:
    def defining(b: float) -> float:
        q = bust_probability(b)
        return 1.0 - q ** (n + 1) - (n + 1) * math.exp(b) * q**n

    return bisect_decreasing(defining, 0.0, 1.0, tol)


def simple_threshold_upper_bound(n_max: int, tol: float = DEFAULT_ROOT_TOL) -> ThresholdTable:
    _check_n(n_max)
    return ThresholdTable("simple_upper", tuple(_simple_upper_value(n, tol) for n in range(1, n_max + 1)), tol)


@functools.lru_cache(maxsize=None)
def _rational_upper_value(n: int, tol: float) -> float:
    def defining(g: float) -> float:
        tail = adaptive_simpson(bust_probability, g, 1.0, DEFAULT_ABS_TOL)
        return tail - bust_probability(g) ** n

    return bisect_decreasing(defining, 0.0, 1.0, tol)


def rational_upper_bound(n_max: int, tol: float = DEFAULT_ROOT_TOL) -> ThresholdTable:
    _check_n(n_max)
    return ThresholdTable("rational_upper", tuple(_rational_upper_value(n, tol) for n in range(1, n_max + 1)), tol)


def stable_upper_bound(n: int, c: float, tol: float = DEFAULT_ROOT_TOL) -> float:
    """Best-response cap when every opponent's win envelope is non-decreasing and ``c``-Lipschitz.

    The envelope bound used is ``min(1, (1 - F(theta, 1)) + c (t - theta))``:
    the opponent's envelope at ``theta`` is at least the bust probability
    ``1 - F(theta, 1)`` and grows at rate at most ``c``.
    """
    _check_n(n)
    if not c > 0:
        raise ValueError("stability constant c must be positive")
    return _stable_upper_value(n, float(c), tol)


@functools.lru_cache(maxsize=None)
def _stable_upper_value(n: int, c: float, tol: float) -> float:
    def defining(th: float) -> float:
        base = bust_probability(th)
        kink = th + (1.0 - base) / c

        def integrand(t: float) -> float:
            return min(1.0, base + c * (t - th)) ** (n - 1) * bust_probability(t)

        tail = adaptive_simpson(integrand, th, 1.0, DEFAULT_ABS_TOL, kinks=(kink,))
        return tail - base**n

    return bisect_decreasing(defining, 0.0, 1.0, tol)


def stable_upper_table(n_max: int, c: float, tol: float = DEFAULT_ROOT_TOL) -> ThresholdTable:
    _check_n(n_max)
    return ThresholdTable("stable_upper", tuple(stable_upper_bound(n, c, tol) for n in range(1, n_max + 1)), tol, c)


def threshold_table(kind: str, n_max: int, c: Optional[float] = None) -> ThresholdTable:
    if kind == "nash":
        return nash_thresholds(n_max)
    if kind == "simple_upper":
        return simple_threshold_upper_bound(n_max)
    if kind == "rational_upper":
        return rational_upper_bound(n_max)
    if kind == "stable_upper":
        if c is None:
            raise ValueError("stable_upper needs c")
        return stable_upper_table(n_max, c)
    raise ValueError(f"unknown table kind {kind!r}")


def _check_n(n: int) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")


# ---------------------------------------------------------------------------
# Best responses
# ---------------------------------------------------------------------------


def _pure_defining(profile: tuple[float, ...]):
    def defining(a: float) -> float:
        tail = adaptive_simpson(lambda t: _H(t, profile), a, 1.0, DEFAULT_ABS_TOL, kinks=profile)
        return tail - _H(a, profile)

    return defining


def best_response_pure(profile: Sequence[float], tol: float = DEFAULT_ROOT_TOL) -> float:
    ks = check_unit_all("profile", profile)
    if not ks:
        raise ValueError("profile must contain at least one opponent")
    return bisect_decreasing(_pure_defining(ks), 0.0, 1.0, tol)


def best_response_mixed(mix: FiniteMixedStrategy, tol: float = DEFAULT_ROOT_TOL) -> float:
    parts = [(_pure_defining(p), w) for p, w in mix.atoms]

    def defining(a: float) -> float:
        return sum(w * d(a) for d, w in parts)

    return bisect_decreasing(defining, 0.0, 1.0, tol)


def _adaptive_envelope(a_values: tuple[float, ...]):
    def envelope(t: float) -> float:
        out = 1.0
        for a in a_values:
            out *= bust_probability(t if t > a else a)
        return out

    return envelope


def best_response_adaptive_thresholds(a_values: Sequence[float], tol: float = DEFAULT_ROOT_TOL) -> float:
    """Best first-seat threshold when every opponent plays ``max(t, a_i)``."""
    a_values = check_unit_all("a", a_values)
    if not a_values:
        raise ValueError("need at least one opponent")
    env = _adaptive_envelope(a_values)

    def defining(x: float) -> float:
        return adaptive_simpson(env, x, 1.0, DEFAULT_ABS_TOL, kinks=a_values) - env(x)

    return bisect_decreasing(defining, 0.0, 1.0, tol)


def second_derivative_at_nash(k: int, n: int, nash: ThresholdTable, printed: bool = False) -> float:
    """Curvature of the seat payoff at ``alpha_k`` when every player is at equilibrium.

    The payoff of the player with ``k`` opponents left, as a function of its
    base threshold ``A``, is ``P(all earlier players bust) * e^A * int_A^1
    q(t)^k dt`` with ``q = 1 - F(., 1)``. Differentiating twice at the root
    gives ``-e^a prod_{i>k} q(alpha_i) [q(a)^k + k q(a)^(k-1) q'(a)]`` with
    ``q'(a) = a e^a``. ``printed=True`` drops the ``q'`` factor, which is the
    variant usually quoted; the two agree closely only for ``k == 1``.
    """
    if not 1 <= k <= n:
        raise IndexError(f"need 1 <= k <= n, got k={k}, n={n}")
    if nash.kind != "nash" or nash.n_max < n:
        raise IndexError(f"nash table must cover n={n}")
    ak = nash[k]
    earlier = 1.0
    for i in range(k + 1, n + 1):
        earlier *= bust_probability(nash[i])
    q = bust_probability(ak)
    slope = 1.0 if printed else ak * math.exp(ak)
    return -math.exp(ak) * earlier * (q**k + k * q ** (k - 1) * slope)


CRITICAL_BAND = 1e-4


def best_response_sensitivity(
    profile: Sequence[float], i: int, step: float = 1e-6, band: float = CRITICAL_BAND
) -> int:
    """Sign of the right derivative of the best response in opponent ``i``'s threshold.

    Returns ``+1`` / ``-1``, or ``0`` when the best response sits within
    ``band`` of ``profile[i]`` (no determinate sign there).
    """
    ks = list(check_unit_all("profile", profile))
    base = best_response_pure(ks, tol=1e-14)
    if abs(base - ks[i]) < band:
        return 0
    bumped = ks.copy()
    bumped[i] = min(1.0, ks[i] + step)
    moved = best_response_pure(bumped, tol=1e-14)
    diff = moved - base
    if diff == 0.0:
        return 0
    return 1 if diff > 0 else -1


# ---------------------------------------------------------------------------
# Reward of an exact best responder against adaptive-threshold opponents
# ---------------------------------------------------------------------------


def adaptive_lineup_reward(opponent_a: Sequence[float], grid: int = 1600, fine: int = 40001) -> float:
    """Expected per-round reward of a player best-responding to ``max(t, a_j)`` opponents.

    Seating is uniformly random. The player uses ``max(t, A*)`` where ``A*``
    is the exact best response to the opponents seated after it, and ties at
    zero (everyone busts) split the point. The distribution of the constraint
    ``t`` is propagated on a grid of ``grid`` cells.
    """
    a_all = check_unit_all("a", opponent_a)
    n_players = len(a_all) + 1
    edges = np.linspace(0.0, 1.0, grid + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    u = np.linspace(0.0, 1.0, fine)
    total = 0.0
    count = 0
    for order in itertools.permutations(range(len(a_all))):
        for seat in range(n_players):
            before = [a_all[j] for j in order[:seat]]
            after = tuple(a_all[j] for j in order[seat:])
            atom, cells = _constraint_distribution(before, edges, mids)
            total += _responder_value(after, atom, cells, mids, u, n_players)
            count += 1
    return total / count


def _constraint_distribution(before, edges, mids):
    atom = 1.0
    cells = np.zeros(mids.size)
    for a in before:
        src_t = np.concatenate([[0.0], mids])
        src_w = np.concatenate([[atom], cells])
        k = np.maximum(src_t, a)
        stay = 1.0 - (1.0 - k) * np.exp(k)
        new_atom = src_w[0] * stay[0]
        new_cells = src_w[1:] * stay[1:]
        # mass spread uniformly with density e^k on (k, 1]
        overlap = np.clip(edges[1:][None, :] - np.maximum(edges[:-1][None, :], k[:, None]), 0.0, None)
        new_cells = new_cells + (src_w * np.exp(k)) @ overlap
        atom, cells = new_atom, new_cells
    return atom, cells


def _responder_value(after, atom, cells, mids, u, n_players):
    if after:
        a_star = best_response_adaptive_thresholds(after)
        env = np.ones_like(u)
        for a in after:
            x = np.maximum(u, a)
            env *= 1.0 - (1.0 - x) * np.exp(x)
        du = u[1] - u[0]
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (env[1:] + env[:-1]) * du)])
        tail = cum[-1] - cum
        all_bust_after = float(np.prod([bust_probability(a) for a in after]))
    else:
        a_star = 0.0
        tail = 1.0 - u
        all_bust_after = 1.0

    def win(thr):
        return np.exp(thr) * np.interp(thr, u, tail)

    thr0 = a_star
    value = atom * (win(thr0) + bust_probability(thr0) * all_bust_after / n_players)
    thr = np.maximum(mids, a_star)
    value += float(np.dot(cells, win(thr)))
    return float(value)
