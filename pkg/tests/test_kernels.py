import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from contjack.kernels import (
    EnvelopeFunction,
    ProductEnvelope,
    all_bust_share,
    best_response_envelope,
    bust_kernel_F,
    bust_probability,
    envelope_from_profile,
    g_envelope,
    payoff_envelope,
    payoff_pure,
    product_H,
    response_kernel_G,
    solve_envelope,
    stay_probability,
)
from contjack.numerics import (
    QuadratureSpec,
    SolverError,
    adaptive_simpson,
    bisect_decreasing,
    golden_section_max,
)

unit = st.floats(0.0, 1.0, allow_nan=False)
profiles = st.lists(unit, min_size=0, max_size=5)


def test_simpson_handles_kinks():
    f = lambda x: abs(x - 0.3) + (x > 0.7)
    exact = 0.5 * 0.3**2 + 0.5 * 0.7**2 + 0.3
    assert adaptive_simpson(f, 0.0, 1.0, kinks=(0.3, 0.7)) == pytest.approx(exact, abs=1e-10)


def test_simpson_empty_interval_is_zero():
    assert adaptive_simpson(math.exp, 1.0, 0.0) == 0.0
    assert adaptive_simpson(math.exp, 0.5, 0.5) == 0.0


def test_quadrature_spec_validates():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0.0)
    spec = QuadratureSpec(1e-8, (0.5, 0.2, 0.5))
    assert spec.kink_points == (0.2, 0.5)


def test_bisection_roots_and_errors():
    assert bisect_decreasing(lambda x: 0.25 - x * x) == pytest.approx(0.5, abs=1e-10)
    with pytest.raises(SolverError):
        bisect_decreasing(lambda x: 1.0 + x)


def test_golden_section():
    assert golden_section_max(lambda x: -((x - 0.37) ** 2), 0.0, 1.0) == pytest.approx(0.37, abs=1e-8)


def test_F_examples():
    assert bust_kernel_F(0.0, 1.0) == 1.0
    assert bust_kernel_F(0.5, 0.5) == 0.0
    assert bust_kernel_F(0.5, 1.0) == pytest.approx(0.5 * math.exp(0.5))
    with pytest.raises(ValueError):
        bust_kernel_F(0.6, 0.5)


@given(unit)
def test_stay_and_bust_partition(x):
    assert stay_probability(x) + bust_probability(x) == pytest.approx(1.0)
    assert 0.0 <= bust_probability(x) <= 1.0


@given(unit, unit)
def test_G_is_a_probability_and_flat_below_k(t, k):
    g = response_kernel_G(t, k)
    assert -1e-15 <= g <= 1.0 + 1e-15
    if t < k:
        assert g == pytest.approx(bust_probability(k))


def test_G_examples():
    assert response_kernel_G(0.2, 0.5) == pytest.approx(1 - 0.5 * math.exp(0.5))
    assert response_kernel_G(1.0, 0.3) == pytest.approx(1.0)
    assert response_kernel_G(0.7, 0.0) == pytest.approx(0.7)


@given(unit, profiles)
def test_H_is_product(t, profile):
    assert product_H(t, profile) == pytest.approx(np.prod([response_kernel_G(t, k) for k in profile]))


def test_payoff_pure_no_opponents_is_stay_probability():
    for a in (0.0, 0.3, 0.9):
        assert payoff_pure(a, []) == pytest.approx(stay_probability(a), abs=1e-10)


def test_payoff_pure_matches_scipy_quad():
    profile = [0.5, 0.6, 0.7]
    for A in (0.2, 0.55, 0.8):
        ref = math.exp(A) * quad(lambda t: product_H(t, profile), A, 1.0, points=profile, epsabs=1e-13)[0]
        assert payoff_pure(A, profile) == pytest.approx(ref, abs=1e-9)
    assert payoff_pure(0.5, profile) == pytest.approx(0.2305238616375068, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(unit, profiles)
def test_envelope_product_agrees_with_pure_payoff(A, profile):
    M = envelope_from_profile(profile)
    assert payoff_envelope(A, M) == pytest.approx(payoff_pure(A, profile), abs=1e-9)


def test_all_bust_share():
    assert all_bust_share(0.5, []) == pytest.approx(bust_probability(0.5))
    assert all_bust_share(0.5, [0.5]) == pytest.approx(bust_probability(0.5) ** 2 / 2)


def test_envelope_function_validation():
    with pytest.raises(ValueError):
        EnvelopeFunction(np.array([0.0, 0.5, 0.4]), np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        EnvelopeFunction(np.array([0.0, 1.0]), np.array([1.5]))
    f = EnvelopeFunction.buckets([0.1, 0.4, 0.2, 0.9])
    assert not f.is_monotone
    assert f(0.3) == pytest.approx(0.4)
    assert f.integral(0.0) == pytest.approx(0.4)
    assert f.integral(0.125, 0.375) == pytest.approx(0.125 * 0.1 + 0.125 * 0.4)


def test_envelope_from_function_bucket_means():
    f = EnvelopeFunction.from_function(lambda t: t * t, m=8)
    # bucket means of t^2 over [i/8, (i+1)/8]
    expect = [((i + 1) ** 3 - i**3) / (3 * 8**2) for i in range(8)]
    assert np.allclose(f.values, expect, atol=1e-12)


def test_g_envelope_is_exact():
    g = g_envelope(0.4)
    for t in np.linspace(0, 1, 23):
        assert g(t) == pytest.approx(response_kernel_G(t, 0.4), abs=1e-12)


def test_product_envelope_integral_matches_quad():
    M = ProductEnvelope([g_envelope(0.3), EnvelopeFunction.buckets([0.2, 0.5, 0.6, 1.0])])
    ref = quad(lambda t: float(M(t)), 0.1, 1.0, points=[0.25, 0.3, 0.5, 0.75], epsabs=1e-13)[0]
    assert M.integral(0.1) == pytest.approx(ref, abs=1e-10)


def test_unit_envelope_best_response_is_zero():
    # M = 1 on [0,1]: maximize e^A (1 - A), optimum at A = 0
    assert best_response_envelope(EnvelopeFunction.constant_one()) == pytest.approx(0.0)


def test_solve_envelope_zero_is_degenerate():
    sol = solve_envelope(EnvelopeFunction.buckets(np.zeros(16)), floor=0.3)
    assert sol.degenerate and sol.threshold == 0.3


@settings(max_examples=30, deadline=None)
@given(st.lists(unit, min_size=4, max_size=32), unit)
def test_constant_solver_beats_grid_search(values, floor):
    M = EnvelopeFunction.buckets(values)
    best = solve_envelope(M, floor).threshold
    assert best >= floor - 1e-15
    grid = np.linspace(floor, 1.0, 2001)
    grid_best = max(payoff_envelope(a, M) for a in grid)
    assert payoff_envelope(best, M) >= grid_best - 1e-12


def test_solver_on_product_envelope_matches_pure_best_response():
    from contjack.equilibrium import best_response_pure

    profile = [0.4, 0.7]
    a = solve_envelope(envelope_from_profile(profile)).threshold
    assert a == pytest.approx(best_response_pure(profile), abs=1e-8)
