import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mabclip import bandit
from mabclip.errors import InvalidInput


def test_init():
    s = bandit.init_agent(200)
    assert s.pull_counts.shape == (200,) and not s.pull_counts.any()
    assert not s.q_values.any()
    assert s.epsilon == 1.0 and s.step == 0
    with pytest.raises(InvalidInput):
        bandit.init_agent(0)


def _greedy(q):
    s = bandit.init_agent(len(q))
    s.q_values[:] = q
    s.epsilon = 0.0
    return s


def test_select_argmin_and_ties():
    rng = np.random.default_rng(0)
    assert bandit.select_action(_greedy([0.3, 0.1, 0.2]), rng) == 1
    s = _greedy([0.1, 0.1])
    assert all(bandit.select_action(s, rng) == 0 for _ in range(100))
    assert bandit.select_action(bandit.init_agent(5), np.random.default_rng(3)) in range(5)


def test_select_uniform_when_exploring():
    s = bandit.init_agent(10)
    rng = np.random.default_rng(1)
    picks = np.array([bandit.select_action(s, rng) for _ in range(1_000_000)])
    freq = np.bincount(picks, minlength=10) / picks.size
    assert np.all(np.abs(freq - 0.1) <= 0.1 * 0.02)


def test_update_examples():
    s = bandit.init_agent(3, optimistic_value=0.9)
    bandit.update(s, 1, 0.07)
    assert s.q_values[1] == 0.07 and s.pull_counts[1] == 1
    assert s.q_values[0] == 0.9 and s.q_values[2] == 0.9
    s.q_values[1] = 0.5
    bandit.update(s, 1, 0.3)
    assert s.q_values[1] == pytest.approx(0.4)
    t = bandit.init_agent(1)
    for r in (0.2, 0.4, 0.6):
        bandit.update(t, 0, r)
    assert t.q_values[0] == pytest.approx(0.4, abs=1e-12)


def test_update_guards():
    s = bandit.init_agent(2)
    with pytest.raises(InvalidInput):
        bandit.update(s, 0, 1.5)
    with pytest.raises(InvalidInput):
        bandit.update(s, 0, -0.1)
    with pytest.raises(InvalidInput):
        bandit.update(s, 2, 0.1)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=400))
def test_incremental_equals_batch(regrets):
    s = bandit.init_agent(1)
    for r in regrets:
        bandit.update(s, 0, r)
    assert abs(s.q_values[0] - np.mean(regrets)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 50), st.lists(st.tuples(st.integers(0, 49), st.floats(0, 1)), max_size=300))
def test_counts_conservation_and_schedule(n, pulls):
    s = bandit.init_agent(n)
    for t, (a, r) in enumerate(pulls):
        bandit.update(s, a % n, r)
        assert s.epsilon == max(0.0, 1 - (t + 1) / (10 * n))
    assert s.pull_counts.sum() == s.step == len(pulls)


def test_schedule_reaches_zero():
    sched = bandit.EpsilonSchedule.for_actions(200)
    assert sched(0) == 1.0
    assert sched.decrement_per_step == 1 / 2000
    assert sched(1000) == 0.5 and sched(2000) == 0.0 and sched(10**6) == 0.0
    assert bandit.EpsilonSchedule(10, floor=0.05)(100) == 0.05
    with pytest.raises(InvalidInput):
        bandit.EpsilonSchedule(10, floor=2)


def test_greedy_deterministic_after_decay():
    s = bandit.init_agent(4)
    s.q_values[:] = [0.4, 0.2, 0.3, 0.2]
    s.epsilon = 0.0
    picks = {bandit.select_action(s, np.random.default_rng(k)) for k in range(50)}
    assert picks == {1}


def test_trace_hook():
    seen = []
    s = bandit.init_agent(3, on_step=seen.append)
    bandit.update(s, 2, 0.25)
    bandit.update(s, 2, 0.75)
    assert seen[0] == bandit.StepRecord(0, 1.0, 2, 0.25, 0.25)
    assert seen[1].t == 1 and seen[1].q_value == 0.5
    assert seen[1].epsilon == pytest.approx(1 - 1 / 30)


def test_constant_step_option():
    s = bandit.init_agent(1, step_size=0.5)
    bandit.update(s, 0, 1.0)
    assert s.q_values[0] == 0.5
    with pytest.raises(InvalidInput):
        bandit.init_agent(1, step_size=0.0)


def test_finds_best_arm():
    rng = np.random.default_rng(4)
    means = np.array([0.3, 0.25, 0.05, 0.2, 0.4])
    s = bandit.init_agent(5)
    for _ in range(3000):
        a = bandit.select_action(s, rng)
        bandit.update(s, a, float(np.clip(means[a] + 0.02 * rng.standard_normal(), 0, 1)))
    assert int(np.argmin(s.q_values)) == 2
