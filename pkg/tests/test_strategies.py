import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contjack.engine import Observation, run_tournament
from contjack.equilibrium import best_response_adaptive_thresholds, nash_thresholds, rational_upper_bound
from contjack.kernels import bust_probability
from contjack.rng import RngStream
from contjack.strategies import (
    AdaptiveThreshold,
    BanditState,
    BanditStrategy,
    EpsilonSchedule,
    FixedThreshold,
    ModelFreeStrategy,
    NashStrategy,
    OpponentModel,
    UniformReference,
    initial_grid,
    make_strategy,
)
from contjack.strategies.model_free import isotonic_envelope


def obs(seat, n, t=0.0, seating=None):
    seating = tuple(seating or range(n))
    return Observation(0, seat, n, seating, tuple([0.0] * seat), t)


def test_registry_and_errors():
    assert isinstance(make_strategy("fixed", a=0.3), FixedThreshold)
    with pytest.raises(ValueError):
        make_strategy("nope")
    with pytest.raises(ValueError):
        make_strategy("fixed", b=1)
    with pytest.raises(ValueError):
        FixedThreshold(1.2)
    assert make_strategy("adaptive", a=0.4).spec() == {"kind": "adaptive", "a": 0.4}


def test_static_decisions():
    assert FixedThreshold(0.4).decide(obs(1, 3, t=0.9)) == 0.4
    assert AdaptiveThreshold(0.4).decide(obs(1, 3, t=0.9)) == 0.9
    assert AdaptiveThreshold(0.4).decide(obs(1, 3, t=0.1)) == 0.4


def test_nash_strategy_uses_remaining_players():
    s = NashStrategy()
    s.reset(0, 4, RngStream(0))
    alpha = nash_thresholds(3)
    assert s.decide(obs(0, 4)) == pytest.approx(alpha[3])
    assert s.decide(obs(2, 4)) == pytest.approx(alpha[1])
    assert s.decide(obs(3, 4, t=0.3)) == 0.3
    assert s.decide(obs(1, 4, t=0.95)) == 0.95
    assert np.allclose(s.decide_batch(1, 4, np.array([0.0, 0.9])), [alpha[2], 0.9])


@given(st.floats(0.0, 1.0))
def test_uniform_reference_is_rational(t):
    s = UniformReference()
    s.reset(0, 2, RngStream(1))
    x = s.decide(obs(1, 2, t=t))
    assert t <= x <= 1.0


# --- model-free -------------------------------------------------------------


def test_opponent_model_running_mean_and_indicator():
    m = OpponentModel(4)
    m.observe(1, 2, 0.1, 0.0)  # bust counts as score 0 <= t
    m.observe(1, 2, 0.2, 0.7)
    m.observe(1, 2, 0.2, 0.1)
    assert m.values(1, 2)[0] == pytest.approx(2 / 3)
    assert m.visits(1, 2)[0] == 3
    assert np.all(m.values(5, 5) == 0.0)
    m.observe(1, 2, 1.0, 1.0)
    assert m.values(1, 2)[3] == 1.0


def test_opponent_model_schedules():
    g = OpponentModel(4, "global")
    assert g.step_weight(3, 10) == pytest.approx(0.1)
    e = OpponentModel(4, "exponential", decay=0.5)
    assert e.step_weight(1, 0) == pytest.approx(1.0)
    assert e.step_weight(2, 0) == pytest.approx(0.5 / 0.75)
    with pytest.raises(ValueError):
        OpponentModel(4, "bogus")
    with pytest.raises(ValueError):
        OpponentModel(1)


def test_opponent_model_csv_roundtrip():
    m = OpponentModel(8)
    rng = np.random.default_rng(0)
    for _ in range(200):
        m.observe(int(rng.integers(3)), int(rng.integers(1, 3)), rng.random(), rng.random())
    buf = io.StringIO()
    m.write_csv(buf)
    back = OpponentModel.read_csv(io.StringIO(buf.getvalue()))
    assert back.keys() == m.keys()
    for key in m.keys():
        assert np.array_equal(back.values(*key), m.values(*key))
        assert np.array_equal(back.visits(*key), m.visits(*key))
    with pytest.raises(ValueError):
        OpponentModel.read_csv(io.StringIO("player,seat\n"))


def test_isotonic_projection_is_monotone():
    vals = np.array([0.2, 0.1, 0.5, 0.4, 0.9])
    out = isotonic_envelope(vals, np.array([1, 1, 5, 1, 0]))
    assert np.all(np.diff(out) >= 0)
    assert out[2] == pytest.approx((5 * 0.5 + 0.4) / 6)


def _exact_model(a_values, m=256):
    funcs = {}
    for pid, a in enumerate(a_values):
        for seat in range(1, len(a_values) + 1):
            funcs[(pid, seat)] = lambda t, a=a: bust_probability(max(t, a))
    return OpponentModel.from_functions(funcs, m)


def test_model_free_with_exact_model_matches_analytic_best_response():
    a = [0.55, 0.7, 0.85]
    s = ModelFreeStrategy(model=_exact_model(a, 1024), learn=False)
    s.reset(3, 4, RngStream(0))
    x = s.decide(obs(0, 4, seating=(3, 0, 1, 2)))
    assert x == pytest.approx(best_response_adaptive_thresholds(a), abs=2e-3)
    # last seat just needs to beat the constraint
    assert s.decide(obs(3, 4, t=0.42, seating=(0, 1, 2, 3))) == 0.42


def test_model_free_respects_rational_cap_and_floor():
    s = ModelFreeStrategy(m=16)
    s.reset(0, 3, RngStream(0))
    s.model.set_values(1, 1, np.ones(16))
    s.model.set_values(2, 2, np.ones(16))
    x = s.decide(obs(0, 3, seating=(0, 1, 2)))
    assert x <= rational_upper_bound(2)[2] + 1e-12
    assert s.decide(obs(1, 3, t=0.95, seating=(1, 0, 2))) >= 0.95


def test_model_free_learns_in_short_run():
    a = [0.5, 0.8]
    players = [AdaptiveThreshold(x) for x in a] + [ModelFreeStrategy(m=32)]
    run_tournament(players, 3000, 1)
    model = players[2].model
    vals, visits = model.values(0, 1), model.visits(0, 1)
    mids = (model.edges[:-1] + model.edges[1:]) / 2
    truth = np.array([bust_probability(max(t, 0.5)) for t in mids])
    ok = visits >= 200
    assert ok.any()
    assert np.max(np.abs(vals - truth)[ok]) < 0.15


# --- bandit -----------------------------------------------------------------


def test_epsilon_schedule():
    e = EpsilonSchedule(0.1, halve_every=100, zero_after=350)
    assert e(0) == 0.1 and e(150) == 0.05 and e(349) == 0.0125 and e(350) == 0.0
    with pytest.raises(ValueError):
        EpsilonSchedule(1.5)


def test_initial_grid_bounds():
    g = initial_grid(3, 32)
    assert len(g) == 32
    assert g[0] == pytest.approx(max(0.0, nash_thresholds(1)[1] - 0.1))
    assert g[-1] == pytest.approx(rational_upper_bound(3)[3])
    assert np.all(np.diff(g) > 0)


def test_sample_average_update():
    st_ = BanditState([0.2, 0.5], init_reward=1.0, init_count=10, prune_first=None)
    st_.update(("k",), 0, 0.0)
    assert st_.arms(("k",)).rewards[0] == pytest.approx(10 / 11)
    for _ in range(2000):
        st_.update(("k",), 1, 1.0)
    assert st_.arms(("k",)).rewards[1] == pytest.approx(1.0)


def test_exponential_update_tracks_recent_rewards():
    st_ = BanditState([0.5], init_count=0, step="exponential", decay=0.9, prune_first=None)
    for _ in range(200):
        st_.update(("k",), 0, 0.0)
    for _ in range(100):
        st_.update(("k",), 0, 1.0)
    assert st_.arms(("k",)).rewards[0] > 0.99


def test_prune_keeps_count_and_refines_best():
    grid = list(np.linspace(0.5, 0.8, 20))
    st_ = BanditState(grid, prune_first=None)
    arms = st_.arms(("c",))
    arms.rewards = [0.2 + 0.01 * i if i < 10 else 0.3 - 0.01 * (i - 10) for i in range(20)]
    gap = min(np.diff(arms.thresholds))
    best = arms.thresholds[10]
    worst = {arms.thresholds[0], arms.thresholds[19]}
    st_.prune(("c",))
    th = arms.thresholds
    assert len(th) == 20
    assert not worst & set(th)
    assert best not in th
    assert any(abs(x - best) == pytest.approx(gap / 4) for x in th)
    assert min(np.diff(th)) >= gap / 2 - 1e-12
    assert th == sorted(th)
    assert arms.history[0]["split"]


def test_prune_schedule_doubles_interval():
    st_ = BanditState(list(np.linspace(0.4, 0.8, 10)), prune_first=5, max_prunes=3)
    for i in range(5 + 10 + 20 + 40):
        st_.update(("c",), i % 10, float(i % 3 == 0))
    assert st_.arms(("c",)).prunes_done == 3


def test_bandit_context_keys():
    b = BanditStrategy()
    b.reset(0, 5, RngStream(0))
    assert b.context_key(obs(0, 5, seating=(0, 1, 2, 3, 4))) == (0,)
    assert b.context_key(obs(1, 5, seating=(3, 0, 4, 1, 2))) == (1, (1, 2, 4))
    assert b.context_key(obs(2, 5, seating=(3, 4, 0, 2, 1))) == (2, (1, 2))
    assert b.context_key(obs(3, 5, seating=(3, 4, 1, 0, 2))) == (3,)


def test_bandit_greedy_is_rational_and_exports():
    b = BanditStrategy(n_arms=8, epsilon=0.0)
    players = [b, NashStrategy(), NashStrategy()]
    res = run_tournament(players, 500, 3)
    assert res.completed == 500
    buf = io.StringIO()
    b.export_json(buf)
    data = json.loads(buf.getvalue())
    assert data["format"] == "contjack-bandit" and data["rounds"] == 500
    assert all(len(c["arms"]) == 8 for c in data["contexts"])
    assert b.decide(obs(1, 3, t=0.99, seating=(1, 0, 2))) == 0.99


def test_bandit_exploration_credit_goes_to_nearest_arm():
    b = BanditStrategy(n_arms=8, epsilon=1.0)
    b.reset(0, 3, RngStream(5))
    for _ in range(50):
        x, key, arm, explored = b.select(obs(0, 3))
        assert explored
        arms = b.state.arms(key)
        if arm is not None:
            assert all(abs(arms.thresholds[arm] - x) <= abs(y - x) for y in arms.thresholds)
