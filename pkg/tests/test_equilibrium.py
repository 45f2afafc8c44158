import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from contjack.equilibrium import (
    FiniteMixedStrategy,
    ThresholdTable,
    adaptive_lineup_reward,
    best_response_adaptive_thresholds,
    best_response_mixed,
    best_response_pure,
    best_response_sensitivity,
    nash_thresholds,
    rational_upper_bound,
    second_derivative_at_nash,
    simple_threshold_upper_bound,
    stable_upper_bound,
    threshold_table,
)
from contjack.kernels import bust_probability, payoff_pure

from oracles import TABLE_ALPHA, TABLE_BETA, TABLE_GAMMA, alpha_oracle, gamma_oracle, grid_argmax, payoff_oracle, q

unit = st.floats(0.0, 1.0, allow_nan=False)


def test_alpha_matches_scipy_oracle():
    alpha = nash_thresholds(14)
    for n in (1, 2, 5, 14):
        assert alpha[n] == pytest.approx(alpha_oracle(n), abs=1e-9)


def test_gamma_matches_closed_form_oracle():
    gamma = rational_upper_bound(14)
    for n in (1, 3, 9, 14):
        assert gamma[n] == pytest.approx(gamma_oracle(n), abs=1e-9)


def test_tables_match_printed_values():
    for fn, printed in ((nash_thresholds, TABLE_ALPHA), (simple_threshold_upper_bound, TABLE_BETA), (rational_upper_bound, TABLE_GAMMA)):
        assert np.allclose(fn(14).values, printed, atol=5e-6)


def test_table_orderings():
    a, b, g = nash_thresholds(14), simple_threshold_upper_bound(14), rational_upper_bound(14)
    assert np.all(np.diff(a.values) > 0) and np.all(np.diff(g.values) > 0)
    for n in range(1, 15):
        assert a[n] <= b[n] and a[n] <= g[n]
    assert round(a[1], 6) == round(g[1], 6)


def test_table_indexing_and_csv():
    a = nash_thresholds(3)
    assert a[0] == 0.0
    with pytest.raises(IndexError):
        a[4]
    with pytest.raises(IndexError):
        rational_upper_bound(3)[0]
    buf = io.StringIO()
    a.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "kind,n,c,value,tol"
    assert lines[1].startswith("nash,1,,0.570556")


def test_table_kind_validation():
    with pytest.raises(ValueError):
        threshold_table("bogus", 3)
    with pytest.raises(ValueError):
        threshold_table("stable_upper", 3)
    with pytest.raises(ValueError):
        ThresholdTable("stable_upper", (0.5,))
    with pytest.raises(ValueError):
        nash_thresholds(0)


def test_stable_bound_properties():
    g5 = rational_upper_bound(5)[5]
    cs = [0.5, 1.0, math.e, 10.0, 100.0, 1e6]
    vals = [stable_upper_bound(5, c) for c in cs]
    assert all(x <= y + 1e-12 for x, y in zip(vals, vals[1:]))
    assert all(v <= g5 + 1e-10 for v in vals)
    assert vals[-1] == pytest.approx(g5, abs=1e-4)
    # Nash play is e-stable, so the e-stable cap cannot sit below alpha_5
    assert stable_upper_bound(5, math.e) >= nash_thresholds(5)[5]
    assert stable_upper_bound(1, 3.0) == pytest.approx(rational_upper_bound(1)[1], abs=1e-9)
    with pytest.raises(ValueError):
        stable_upper_bound(3, 0.0)


def test_best_response_pure_examples():
    alpha = nash_thresholds(5)
    # G(t, 0) = t, so against all-zero thresholds the root solves 1 - A^(n+1) = (n+1) A^n
    for n in (1, 3, 5):
        root = best_response_pure([0.0] * n)
        assert 1 - root ** (n + 1) == pytest.approx((n + 1) * root**n, abs=1e-8)
    assert best_response_pure([0.0, 0.0, 0.0]) == pytest.approx(0.60123, abs=1e-5)
    assert best_response_adaptive_thresholds([0.0] * 4) == pytest.approx(alpha[4], abs=1e-9)
    with pytest.raises(ValueError):
        best_response_pure([])
    with pytest.raises(ValueError):
        best_response_pure([0.5, 1.2])


@settings(max_examples=15, deadline=None)
@given(st.lists(unit, min_size=1, max_size=4))
def test_best_response_pure_matches_grid_search(profile):
    A = best_response_pure(profile)
    grid = grid_argmax(lambda a: payoff_oracle(a, profile), step=2e-3)
    assert payoff_pure(A, profile) >= payoff_oracle(grid, profile) - 1e-9


@settings(max_examples=25, deadline=None)
@given(st.lists(unit, min_size=1, max_size=5))
def test_best_response_pure_below_beta(profile):
    beta = simple_threshold_upper_bound(5)
    assert best_response_pure(profile) <= beta[len(profile)] + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.lists(unit, min_size=1, max_size=5))
def test_adaptive_best_response_below_alpha(a):
    alpha = nash_thresholds(5)
    assert best_response_adaptive_thresholds(a) <= alpha[len(a)] + 1e-9


def test_mixture_validation():
    with pytest.raises(ValueError):
        FiniteMixedStrategy.from_lists([[0.5]], [0.9])
    with pytest.raises(ValueError):
        FiniteMixedStrategy.from_lists([[0.5], [0.4, 0.3]], [0.5, 0.5])
    with pytest.raises(ValueError):
        FiniteMixedStrategy.from_lists([], [])


def test_single_atom_mixture_is_pure():
    mix = FiniteMixedStrategy.from_lists([[0.3, 0.8]], [1.0])
    assert best_response_mixed(mix) == pytest.approx(best_response_pure([0.3, 0.8]), abs=1e-10)


def test_second_derivative_signs_and_finite_difference():
    nash = nash_thresholds(3)
    for k in (1, 2, 3):
        assert second_derivative_at_nash(k, 3, nash) < 0
    # stage-1 payoff with the two earlier seats at equilibrium
    earlier = bust_probability(nash[2]) * bust_probability(nash[3])

    def stage(a):
        return earlier * math.exp(a) * quad(q, a, 1.0, epsabs=1e-14)[0]

    h = 1e-3
    a1 = nash[1]
    fd = (stage(a1 + h) - 2 * stage(a1) + stage(a1 - h)) / h**2
    assert second_derivative_at_nash(1, 3, nash) == pytest.approx(fd, rel=0.05)
    with pytest.raises(IndexError):
        second_derivative_at_nash(4, 3, nash)


def test_sensitivity_examples():
    assert best_response_sensitivity([0.2, 0.5], 0) == 1
    assert best_response_sensitivity([0.95, 0.5], 0) == -1
    base = best_response_pure([0.3, 0.6], tol=1e-14)
    bumped = best_response_pure([0.3 + 1e-5, 0.6], tol=1e-14)
    assert bumped > base


def test_adaptive_lineup_reward_is_plausible():
    r = adaptive_lineup_reward([0.55, 0.7, 0.85])
    assert r == pytest.approx(0.2685, abs=5e-4)
