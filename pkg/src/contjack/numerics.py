"""Scalar quadrature and root-finding used by the analytic kernels.

Both routines are deliberately simple: the integrands here are piecewise
smooth with known kink locations, and every defining equation is monotone,
so adaptive Simpson with explicit split points and plain bisection are
enough and easy to reason about.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

DEFAULT_ABS_TOL = 1e-10
DEFAULT_ROOT_TOL = 1e-10
_MAX_DEPTH = 48


class NumericalError(RuntimeError):
    """Base class for solver / quadrature failures."""


class QuadratureError(NumericalError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


class SolverError(NumericalError):
    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(f"{message}; bracket=[{bracket[0]!r}, {bracket[1]!r}]")
        self.bracket = bracket


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = DEFAULT_ABS_TOL
    kink_points: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        object.__setattr__(self, "kink_points", tuple(sorted(set(float(k) for k in self.kink_points))))


def _simpson_piece(f, a, fa, b, fb, tol):
    # Iterative adaptive Simpson with Richardson correction; returns (value, err).
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    stack = [(a, fa, m, fm, b, fb, whole, tol, 0)]
    total = 0.0
    err_total = 0.0
    failed = False
    while stack:
        a, fa, m, fm, b, fb, whole, tol, depth = stack.pop()
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
        right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol or depth >= _MAX_DEPTH:
            if depth >= _MAX_DEPTH and abs(delta) > 15.0 * tol:
                failed = True
            total += left + right + delta / 15.0
            err_total += abs(delta) / 15.0
            continue
        half = 0.5 * tol
        stack.append((a, fa, lm, flm, m, fm, left, half, depth + 1))
        stack.append((m, fm, rm, frm, b, fb, right, half, depth + 1))
    return total, err_total, failed


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float = DEFAULT_ABS_TOL,
    kinks: Iterable[float] = (),
) -> float:
    """Integrate ``f`` over ``[a, b]``, splitting at every kink inside the interval.

    Returns 0 when ``b <= a``. The tolerance is shared between pieces in
    proportion to their length.
    Raises :class:`QuadratureError` if the recursion limit is hit before the
    local error estimate drops below tolerance.
    """
    if b <= a:
        return 0.0
    points = [a] + sorted(k for k in set(kinks) if a < k < b) + [b]
    width = b - a
    total = 0.0
    err = 0.0
    failed = False
    for lo, hi in zip(points[:-1], points[1:]):
        if hi <= lo:
            continue
        piece_tol = abs_tol * (hi - lo) / width
        value, e, bad = _simpson_piece(f, lo, f(lo), hi, f(hi), piece_tol)
        total += value
        err += e
        failed |= bad
    if failed and err > abs_tol:
        raise QuadratureError("adaptive Simpson hit recursion limit", err)
    return total


def bisect_decreasing(
    fn: Callable[[float], float],
    lo: float = 0.0,
    hi: float = 1.0,
    tol: float = DEFAULT_ROOT_TOL,
    max_iter: int = 200,
) -> float:
    """Root of a function that is positive at ``lo`` and negative at ``hi``.

    Endpoint roots are returned directly. A bracket without a sign change
    raises :class:`SolverError`.
    """
    f_lo = fn(lo)
    if f_lo == 0.0:
        return lo
    f_hi = fn(hi)
    if f_hi == 0.0:
        return hi
    if not (f_lo > 0.0 > f_hi):
        raise SolverError(f"no sign change (f(lo)={f_lo:.3e}, f(hi)={f_hi:.3e})", (lo, hi))
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid > 0.0:
            lo = mid
        elif f_mid < 0.0:
            hi = mid
        else:
            return mid
    else:
        raise SolverError("bisection did not converge", (lo, hi))
    return 0.5 * (lo + hi)


def golden_section_max(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Maximizer of a unimodal function on ``[lo, hi]``."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = fn(c), fn(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = fn(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = fn(d)
    return 0.5 * (lo + hi)


def check_unit(name: str, value: float) -> float:
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def check_unit_all(name: str, values: Sequence[float]) -> tuple[float, ...]:
    return tuple(check_unit(name, v) for v in values)
