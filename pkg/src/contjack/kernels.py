"""Exact kernels of the continuous-blackjack game and the payoff integrals built on them.

Notation follows the code, not any single symbol table:

* ``bust_kernel_F(x, y)``  probability that hitting until the sum exceeds ``x``
  ends at or below ``y``; equals ``(y - x) * exp(x)``.
* ``response_kernel_G(t, k)``  probability that an opponent with fixed threshold
  ``k`` does not beat a score of ``t``.
* ``product_H(t, ks)``  product of ``G`` over opponents.

Two payoff routes exist on purpose. :func:`payoff_pure` integrates ``H`` with
adaptive Simpson and is the high-accuracy reference; :func:`payoff_envelope`
works on an :class:`EnvelopeFunction` (or a product of them), which is what a
learner can estimate from observed play.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .numerics import (
    DEFAULT_ABS_TOL,
    DEFAULT_ROOT_TOL,
    adaptive_simpson,
    bisect_decreasing,
    check_unit,
    check_unit_all,
)

E = math.e


def bust_kernel_F(x: float, y: float) -> float:
    if not (0.0 <= x <= y <= 1.0):
        raise ValueError(f"bust_kernel_F needs 0 <= x <= y <= 1, got x={x!r}, y={y!r}")
    return (y - x) * math.exp(x)


def stay_probability(x: float) -> float:
    """``F(x, 1)``: probability of not busting with threshold ``x``."""
    return (1.0 - x) * math.exp(x)


def bust_probability(x: float) -> float:
    return 1.0 - (1.0 - x) * math.exp(x)


def response_kernel_G(t: float, k: float) -> float:
    check_unit("t", t)
    check_unit("k", k)
    return _G(t, k)


def _G(t: float, k: float) -> float:
    ek = math.exp(k)
    if t < k:
        return 1.0 - (1.0 - k) * ek
    return 1.0 - (1.0 - t) * ek


def product_H(t: float, profile: Sequence[float]) -> float:
    check_unit("t", t)
    check_unit_all("profile", profile)
    return _H(t, profile)


def _H(t: float, profile: Sequence[float]) -> float:
    out = 1.0
    for k in profile:
        out *= _G(t, k)
    return out


def payoff_pure(A: float, profile: Sequence[float], abs_tol: float = DEFAULT_ABS_TOL) -> float:
    """Expected payoff of seat one with threshold ``A`` against fixed thresholds.

    Ties at score zero (everybody busts) are not counted; see
    :func:`all_bust_share` for that term.
    """
    check_unit("A", A)
    ks = check_unit_all("profile", profile)
    if A >= 1.0:
        return 0.0
    integral = adaptive_simpson(lambda t: _H(t, ks), A, 1.0, abs_tol, kinks=ks)
    return math.exp(A) * integral


def all_bust_share(A: float, profile: Sequence[float]) -> float:
    """Expected share seat one collects from rounds where every player busts."""
    check_unit("A", A)
    p = bust_probability(A)
    for k in check_unit_all("profile", profile):
        p *= bust_probability(k)
    return p / (len(profile) + 1)


# ---------------------------------------------------------------------------
# Envelope functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnvelopeFunction:
    """A function on ``[0, 1]`` stored on a grid.

    ``kind == "constant"``: ``grid`` holds the ``m + 1`` bucket edges and
    ``values`` the ``m`` bucket levels; bucket ``i`` is ``[grid[i], grid[i+1])``.

    ``kind == "linear"``: ``grid`` holds the knots and ``values`` the function
    values there; linear in between.
    """

    grid: np.ndarray
    values: np.ndarray
    kind: str = "constant"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if self.kind not in ("constant", "linear"):
            raise ValueError(f"unknown interpolation {self.kind!r}")
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing with at least two points")
        if grid[0] < 0.0 or grid[-1] > 1.0:
            raise ValueError("grid must lie in [0, 1]")
        expected = grid.size - 1 if self.kind == "constant" else grid.size
        if values.shape != (expected,):
            raise ValueError(f"expected {expected} values for kind {self.kind!r}, got {values.shape}")
        if np.any(values < 0.0) or np.any(values > 1.0) or np.any(np.isnan(values)):
            raise ValueError("envelope values must lie in [0, 1]")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def buckets(cls, values) -> "EnvelopeFunction":
        values = np.asarray(values, dtype=float)
        return cls(np.linspace(0.0, 1.0, values.size + 1), values, "constant")

    @classmethod
    def constant_one(cls) -> "EnvelopeFunction":
        return cls(np.array([0.0, 1.0]), np.array([1.0]), "constant")

    @classmethod
    def from_function(cls, f, m: int = 256, kind: str = "constant") -> "EnvelopeFunction":
        """Discretize ``f``: bucket means for ``constant``, knot samples for ``linear``."""
        if kind == "linear":
            knots = np.linspace(0.0, 1.0, m + 1)
            return cls(knots, np.clip([f(t) for t in knots], 0.0, 1.0), "linear")
        edges = np.linspace(0.0, 1.0, m + 1)
        nodes, weights = np.polynomial.legendre.leggauss(8)
        half = 0.5 / m
        vals = np.empty(m)
        for i in range(m):
            mid = edges[i] + half
            vals[i] = 0.5 * np.dot(weights, [f(mid + half * x) for x in nodes])
        return cls(edges, np.clip(vals, 0.0, 1.0), "constant")

    @property
    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0.0))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "linear":
            return np.interp(t, self.grid, self.values)
        idx = np.clip(np.searchsorted(self.grid, t, side="right") - 1, 0, self.values.size - 1)
        out = self.values[idx]
        return out if out.ndim else float(out)

    def pieces(self):
        """Yield ``(lo, hi, coeffs)`` with coefficients in ``u = t - lo``."""
        g, v = self.grid, self.values
        for i in range(g.size - 1):
            if self.kind == "constant":
                yield g[i], g[i + 1], np.array([v[i]])
            else:
                slope = (v[i + 1] - v[i]) / (g[i + 1] - g[i])
                yield g[i], g[i + 1], np.array([v[i], slope])

    def integral(self, a: float, b: float = 1.0) -> float:
        return _integrate_pieces(self.pieces(), a, b)


class ProductEnvelope:
    """Pointwise product of envelope factors, integrated exactly."""

    def __init__(self, factors: Sequence[EnvelopeFunction]):
        self.factors = tuple(factors)

    def __call__(self, t):
        out = np.ones_like(np.asarray(t, dtype=float))
        for f in self.factors:
            out = out * f(t)
        return out if np.ndim(out) else float(out)

    def pieces(self):
        if not self.factors:
            yield 0.0, 1.0, np.array([1.0])
            return
        breaks = np.unique(np.concatenate([f.grid for f in self.factors]))
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            if lo < 0.0 or hi > 1.0:
                continue
            coeffs = np.array([1.0])
            for f in self.factors:
                coeffs = P.polymul(coeffs, _local_piece(f, lo, hi))
            yield lo, hi, coeffs

    def integral(self, a: float, b: float = 1.0) -> float:
        return _integrate_pieces(self.pieces(), a, b)


Envelope = Union[EnvelopeFunction, ProductEnvelope]


def _local_piece(f: EnvelopeFunction, lo: float, hi: float) -> np.ndarray:
    """Coefficients (in ``u = t - lo``) of the factor on a sub-interval of one of its pieces."""
    mid = 0.5 * (lo + hi)
    g = f.grid
    if mid < g[0] or mid > g[-1]:
        return np.array([0.0])
    i = min(int(np.searchsorted(g, mid, side="right")) - 1, g.size - 2)
    if f.kind == "constant":
        return np.array([f.values[i]])
    slope = (f.values[i + 1] - f.values[i]) / (g[i + 1] - g[i])
    return np.array([f.values[i] + slope * (lo - g[i]), slope])


def _integrate_pieces(pieces, a: float, b: float) -> float:
    total = 0.0
    for lo, hi, coeffs in pieces:
        x0, x1 = max(lo, a), min(hi, b)
        if x1 <= x0:
            continue
        anti = P.polyint(coeffs)
        total += P.polyval(x1 - lo, anti) - P.polyval(x0 - lo, anti)
    return float(total)


def g_envelope(k: float) -> EnvelopeFunction:
    """``G(., k)`` as an exact piecewise-linear envelope."""
    k = check_unit("k", k)
    ek = math.exp(k)
    low = 1.0 - (1.0 - k) * ek
    if k <= 0.0:
        return EnvelopeFunction(np.array([0.0, 1.0]), np.array([low, 1.0]), "linear")
    if k >= 1.0:
        return EnvelopeFunction(np.array([0.0, 1.0]), np.array([low, low]), "linear")
    # the kink is continuous: G(k-, k) == G(k, k)
    return EnvelopeFunction(np.array([0.0, k, 1.0]), np.array([low, low, 1.0]), "linear")


def envelope_from_profile(profile: Sequence[float]) -> ProductEnvelope:
    return ProductEnvelope([g_envelope(k) for k in profile])


def payoff_envelope(A: float, M: Envelope) -> float:
    check_unit("A", A)
    if A >= 1.0:
        return 0.0
    return math.exp(A) * M.integral(A, 1.0)


def _breakpoints(M: Envelope) -> np.ndarray:
    if isinstance(M, ProductEnvelope):
        return np.unique(np.concatenate([f.grid for f in M.factors])) if M.factors else np.array([0.0, 1.0])
    return M.grid


def discretized_payoff(A: float, M: Envelope, edges: Sequence[float]) -> float:
    """Cell average of the payoff over the partition cell ``[x_i, x_{i+1})`` holding ``A``.

    ``edges`` must be strictly increasing and cover ``A``. Since the payoff
    slope is bounded by ``e`` in absolute value, the average differs from the
    payoff at ``A`` by at most ``e/2`` times the cell width.
    """
    check_unit("A", A)
    x = np.asarray(edges, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0.0):
        raise ValueError("edges must be a strictly increasing sequence of at least two points")
    if not x[0] <= A <= x[-1]:
        raise ValueError(f"A={A!r} lies outside the partition [{x[0]}, {x[-1]}]")
    i = min(int(np.searchsorted(x, A, side="right")) - 1, x.size - 2)
    lo, hi = float(x[i]), float(x[i + 1])
    kinks = [float(b) for b in _breakpoints(M) if lo < b < hi]
    total = adaptive_simpson(lambda a: payoff_envelope(a, M), lo, hi, DEFAULT_ABS_TOL, kinks=kinks)
    return total / (hi - lo)


class EnvelopeSolution(NamedTuple):
    threshold: float
    degenerate: bool


def solve_envelope(M: Envelope, floor: float = 0.0, tol: float = DEFAULT_ROOT_TOL) -> EnvelopeSolution:
    """Best threshold against win envelope ``M`` subject to ``threshold >= floor``.

    Piecewise-constant envelopes are solved exactly by comparing the payoff at
    every per-bucket stationary point and bucket edge above ``floor``; this is
    robust to the non-monotone envelopes a noisy estimate produces. Other
    envelopes use bisection on ``int_A^1 M - M(A)``, which is decreasing
    whenever ``M`` is non-decreasing.
    """
    floor = check_unit("floor", floor)
    if isinstance(M, EnvelopeFunction) and M.kind == "constant":
        return _solve_constant(M.grid, M.values, floor)
    if M.integral(0.0, 1.0) <= 0.0:
        return EnvelopeSolution(floor, True)

    def defining(a: float) -> float:
        return M.integral(a, 1.0) - float(M(a))

    if defining(floor) <= 0.0:
        return EnvelopeSolution(floor, False)
    return EnvelopeSolution(bisect_decreasing(defining, floor, 1.0, tol), False)


def best_response_envelope(M: Envelope, floor: float = 0.0) -> float:
    return solve_envelope(M, floor).threshold


def _solve_constant(edges: np.ndarray, values: np.ndarray, floor: float) -> EnvelopeSolution:
    widths = np.diff(edges)
    mass = values * widths
    # tails[i] = integral of M over [edges[i], 1]
    tails = np.concatenate([np.cumsum(mass[::-1])[::-1], [0.0]])
    if tails[0] <= 0.0:
        return EnvelopeSolution(floor, True)
    lo, hi = edges[:-1], edges[1:]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        stat = hi + tails[1:] / values - 1.0
    ok = (values > 0.0) & (stat > lo) & (stat < hi) & (stat >= floor)
    cands = np.concatenate([[floor], lo[lo > floor], stat[ok]])
    cands = cands[cands < 1.0]
    if cands.size == 0:
        return EnvelopeSolution(floor, False)
    idx = np.clip(np.searchsorted(edges, cands, side="right") - 1, 0, values.size - 1)
    integ = values[idx] * (hi[idx] - cands) + tails[idx + 1]
    pay = np.exp(cands) * integ
    best = np.flatnonzero(pay >= pay.max() - 1e-15)
    return EnvelopeSolution(float(cands[best].min()), False)
