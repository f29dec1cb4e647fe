import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subsidy_bandit.core import (
    DETERMINISTIC,
    RANDOM_BERNOULLI,
    ArmSpec,
    Instance,
    PullRecord,
    RegretLedger,
    compute_benchmarks,
    draw_cost,
    draw_reward,
    instantaneous_regret,
    ledger_update,
    make_instance,
)
from subsidy_bandit.exceptions import InvalidInstanceError, SequencingError
from subsidy_bandit.instances import make_phi
from subsidy_bandit.verify import regret_oracle


def test_benchmarks_table_point():
    inst = make_instance([0.5, 0.3], [1, 0], 0.1)
    b = compute_benchmarks(inst)
    assert b.m_star == 0 and b.i_star == 0
    assert b.tolerated == pytest.approx(0.45)
    assert b.feasible_set == (0,) or set(b.feasible_set) == {0}


def test_benchmarks_tie_uses_lowest_index():
    b = compute_benchmarks(make_instance([0.5, 0.5], [1, 0], 0.0))
    assert b.m_star == 0
    assert set(b.feasible_set) == {0, 1}
    assert b.i_star == 1


def test_benchmarks_fig1(fig1):
    b = fig1.benchmarks
    assert b.m_star == 1 and b.i_star == 0
    assert b.tolerated == pytest.approx(0.45)
    assert set(b.feasible_set) == {0, 1}


def test_i_star_tiebreak_prefers_higher_mean():
    inst = make_instance([0.4, 0.5, 0.45], [0.2, 0.2, 0.2], 0.5)
    assert inst.benchmarks.i_star == 1


def test_empty_instance_rejected():
    with pytest.raises(InvalidInstanceError):
        Instance((), 0.1)


@pytest.mark.parametrize("alpha", [-0.1, 1.0, 1.5])
def test_alpha_range(alpha):
    with pytest.raises(InvalidInstanceError):
        make_instance([0.5], [0.0], alpha)


@pytest.mark.parametrize("mean,cost", [(-0.01, 0.0), (1.01, 0.0), (0.5, -0.1), (0.5, 1.1)])
def test_armspec_bounds(mean, cost):
    with pytest.raises(InvalidInstanceError):
        ArmSpec(mean, cost)


def test_instantaneous_regret_examples(table03):
    q, c, mq = instantaneous_regret(table03, 1)
    assert q == pytest.approx(0.15)
    assert c == 0.0
    phi = make_phi(theta=0.0, p=0.3, epsilon=0.05, K=3, a=2)
    q, c, mq = instantaneous_regret(phi, 0)
    assert q == pytest.approx(0.05)
    assert c == 0.0
    assert mq == pytest.approx(0.05)


def test_benchmark_arms_have_zero_regret(fig1, table03, three_arm):
    for inst in (fig1, table03, three_arm):
        b = inst.benchmarks
        assert instantaneous_regret(inst, b.i_star)[1] == 0.0
        assert instantaneous_regret(inst, b.m_star)[0] == 0.0


def test_ledger_sequencing(fig1):
    led = RegretLedger()
    led.update(fig1, PullRecord(1, 0, 1.0, 0.0))
    with pytest.raises(SequencingError):
        led.update(fig1, PullRecord(3, 0, 1.0, 0.0))
    with pytest.raises(SequencingError):
        led.update(fig1, PullRecord(1, 0, 1.0, 0.0))


def test_ledger_i_star_zero(fig1):
    led = RegretLedger()
    ledger_update(led, fig1, PullRecord(1, 0, 0.0, 0.0))
    assert (led.cum_quality, led.cum_cost) == (0.0, 0.0)


def test_ledger_additivity(fig1):
    led = RegretLedger()
    ledger_update(led, fig1, PullRecord(1, 1, 1.0, 1.0))
    ledger_update(led, fig1, PullRecord(2, 1, 1.0, 1.0))
    assert led.cum_cost == 2.0
    ledger_update(led, fig1, PullRecord(3, 1, 0.0, 1.0))
    assert led.cum_cost == 3.0


def test_full_episode_closed_form(fig1):
    T = 250
    led = RegretLedger()
    for t in range(1, T + 1):
        led.update(fig1, PullRecord(t, 1, 0.0, 1.0))
    assert led.cum_cost == T
    assert regret_oracle(led.records, fig1)[1] == T


def test_regret_uses_means_not_realizations():
    inst = make_instance([0.5, 0.2], [0.5, 0.0], 0.1, cost_model=RANDOM_BERNOULLI)
    led = RegretLedger()
    led.update(inst, PullRecord(1, 0, 0.0, 1.0))
    assert led.cum_cost == 0.0
    led.update(inst, PullRecord(2, 1, 1.0, 0.0))
    assert led.cum_quality == pytest.approx(0.25)


def test_draw_reward_models(rng):
    det = ArmSpec(0.46, 0.0, DETERMINISTIC)
    assert all(draw_reward(det, rng) == 0.46 for _ in range(20))
    assert all(draw_reward(ArmSpec(0.0, 0.0), rng) == 0.0 for _ in range(100))
    assert all(draw_reward(ArmSpec(1.0, 0.0), rng) == 1.0 for _ in range(100))
    half = ArmSpec(0.5, 0.0)
    draws = [draw_reward(half, rng) for _ in range(100_000)]
    assert abs(np.mean(draws) - 0.5) <= 0.005


def test_draw_cost_models(rng):
    assert draw_cost(ArmSpec(0.5, 0.7), rng) == 0.7
    assert all(draw_cost(ArmSpec(0.5, 0.0, cost_model=RANDOM_BERNOULLI), rng) == 0.0
               for _ in range(100))
    assert all(draw_cost(ArmSpec(0.5, 1.0, cost_model=RANDOM_BERNOULLI), rng) == 1.0
               for _ in range(100))
    arm = ArmSpec(0.5, 0.3, cost_model=RANDOM_BERNOULLI)
    draws = [draw_cost(arm, rng) for _ in range(100_000)]
    assert abs(np.mean(draws) - 0.3) <= 0.005


def test_draw_is_deterministic_given_seed():
    arm = ArmSpec(0.37, 0.0)
    a = [draw_reward(arm, np.random.default_rng(3)) for _ in range(5)]
    b = [draw_reward(arm, np.random.default_rng(3)) for _ in range(5)]
    assert a == b


unit = st.floats(0.0, 1.0, allow_nan=False)
instances = st.integers(1, 6).flatmap(
    lambda k: st.tuples(st.lists(unit, min_size=k, max_size=k),
                        st.lists(unit, min_size=k, max_size=k),
                        st.floats(0.0, 0.99))
)


@settings(max_examples=200, deadline=None)
@given(instances)
def test_benchmark_invariants(data):
    means, costs, alpha = data
    inst = make_instance(means, costs, alpha)
    b = inst.benchmarks
    assert b.m_star in b.feasible_set and b.i_star in b.feasible_set
    assert costs[b.i_star] <= costs[b.m_star]
    assert means[b.i_star] >= (1 - alpha) * means[b.m_star]
    assert b.m_star == int(np.argmax(means))


@settings(max_examples=100, deadline=None)
@given(instances, st.lists(st.integers(0, 5), min_size=1, max_size=60))
def test_ledger_monotone_and_matches_oracle(data, pulls):
    means, costs, alpha = data
    inst = make_instance(means, costs, alpha)
    led = RegretLedger()
    prev = (0.0, 0.0)
    for t, a in enumerate(pulls, start=1):
        led.update(inst, PullRecord(t, a % inst.n_arms, 0.0, 0.0))
        assert led.cum_quality >= prev[0] and led.cum_cost >= prev[1]
        assert led.cum_quality <= t and led.cum_cost <= t
        prev = (led.cum_quality, led.cum_cost)
    assert regret_oracle(led.records, inst) == led.totals()


def test_mod_quality_only_on_free_arms():
    inst = make_phi(theta=0.0, p=0.3, epsilon=0.05, K=3, a=2)
    led = RegretLedger()
    for t, a in enumerate([0, 1, 3, 0], start=1):
        led.update(inst, PullRecord(t, a, 0.0, inst.costs[a]))
    assert led.cum_mod_quality == pytest.approx(0.1)
    assert math.isclose(led.cum_quality, 0.2)
