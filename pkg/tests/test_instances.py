import math

import pytest

from subsidy_bandit.core import DETERMINISTIC, RANDOM_BERNOULLI
from subsidy_bandit.exceptions import ConfigurationError, InvalidParametersError
from subsidy_bandit.instances import (
    PhiParams,
    build_instance,
    make_fig1_example,
    make_phi,
    make_table1,
    make_ts_hard,
    with_random_costs,
)


def test_phi_example():
    inst = make_phi(theta=0.0, p=0.3, epsilon=0.05, K=3, a=2)
    assert inst.costs == (0.0, 1.0, 1.0, 1.0)
    assert inst.means == pytest.approx((0.3, 0.3, 0.35, 0.3))
    assert inst.alpha == 0.0


def test_phi_base_instance():
    inst = make_phi(theta=0.2, p=0.3, epsilon=0.05, K=4, a=0)
    assert inst.means[1:] == pytest.approx((0.375,) * 4)
    assert inst.benchmarks.i_star == 0


def test_phi_large_theta():
    inst = make_phi(PhiParams(theta=0.5, p=0.3, epsilon=0.1, K=2, a=1))
    assert inst.means == pytest.approx((0.3, 0.8, 0.6))
    assert inst.alpha == 0.5


def test_phi_costs_shared_across_family():
    costs = {make_phi(theta=0.1, p=0.3, epsilon=0.05, K=3, a=a).costs for a in range(4)}
    assert len(costs) == 1


@pytest.mark.parametrize("kw", [
    dict(theta=1.0, p=0.3, epsilon=0.05, K=2, a=1),
    dict(theta=0.0, p=0.0, epsilon=0.05, K=2, a=1),
    dict(theta=0.0, p=0.6, epsilon=0.05, K=2, a=1),
    dict(theta=0.0, p=0.3, epsilon=0.0, K=2, a=1),
    dict(theta=0.0, p=0.3, epsilon=0.05, K=2, a=3),
    dict(theta=0.5, p=0.45, epsilon=0.1, K=2, a=1),
])
def test_phi_rejects_bad_params(kw):
    with pytest.raises(InvalidParametersError):
        make_phi(**kw)


def test_phi_alpha_override_rejected():
    with pytest.raises((InvalidParametersError, ConfigurationError, TypeError)):
        make_phi(theta=0.1, p=0.3, epsilon=0.05, K=2, a=1, alpha=0.2)
    with pytest.raises((InvalidParametersError, ConfigurationError)):
        build_instance("phi", dict(theta=0.1, p=0.3, epsilon=0.05, K=2, a=1, alpha=0.2))


def test_lemma_admissible_flag():
    assert PhiParams(0.0, 0.3, 0.15, 2, 1).lemma_admissible
    assert not PhiParams(0.0, 0.3, 0.2, 2, 1).lemma_admissible


def test_ts_hard_values():
    inst = make_ts_hard(0.1, 3, 10_000, 1.0)
    assert inst.means[1] == pytest.approx(0.011111, abs=1e-6)
    assert inst.means[0] == pytest.approx(0.02)
    assert inst.costs == (0.0, 1.0, 1.0)
    assert all(a.reward_model == DETERMINISTIC for a in inst.arms)
    assert inst.benchmarks.i_star == 0


def test_ts_hard_benchmarks_follow_definitions():
    # With alpha < 1/2 the free arm has the highest mean, so it is the only feasible arm.
    inst = make_ts_hard(0.1, 5, 10_000, 1.0)
    assert inst.benchmarks.m_star == 0
    assert inst.benchmarks.feasible_set == (0,) or set(inst.benchmarks.feasible_set) == {0}


def test_ts_hard_all_feasible_for_large_alpha():
    inst = make_ts_hard(0.6, 4, 10_000, 1.0)
    assert set(inst.benchmarks.feasible_set) == set(range(4))
    for arm in range(4):
        assert inst.regret_table[arm][0] == 0.0


@pytest.mark.parametrize("d", [0.0, -1.0, 90.0, 50.0])
def test_ts_hard_d_range(d):
    with pytest.raises(InvalidParametersError):
        make_ts_hard(0.1, 3, 10_000, d)


def test_fig1_example(fig1):
    assert fig1.means == pytest.approx((0.46, 0.5))
    assert fig1.costs == (0.0, 1.0)
    assert fig1.benchmarks.i_star == 0 and fig1.benchmarks.m_star == 1
    assert all(row[0] == 0.0 for row in fig1.regret_table)


def test_table1_points():
    b = make_table1(0.3).benchmarks
    assert b.i_star == 0
    b = make_table1(0.45).benchmarks
    assert 1 in b.feasible_set and b.i_star == 1
    b = make_table1(0.6).benchmarks
    assert b.m_star == 1 and b.tolerated == pytest.approx(0.54)
    assert set(b.feasible_set) == {1} and b.i_star == 1


def test_table1_alpha():
    inst = make_table1(0.4)
    assert inst.alpha == 0.1 and inst.costs == (1.0, 0.0)


def test_random_cost_view(fig1):
    rc = with_random_costs(fig1)
    assert rc.random_costs
    assert all(a.cost_model == RANDOM_BERNOULLI for a in rc.arms)
    assert rc.means == fig1.means and rc.costs == fig1.costs


def test_build_instance_registry():
    inst = build_instance("fig1", {"T": 10_000, "alpha": 0.1})
    assert inst.means == pytest.approx((0.46, 0.5))
    assert build_instance("table1", {"mu2": 0.33}).means == (0.5, 0.33)
    custom = build_instance("custom", {"means": [0.2, 0.3], "costs": [0, 1], "alpha": 0.2})
    assert custom.n_arms == 2
    assert build_instance("fig1", {"T": 100}, random_costs=True).random_costs
    with pytest.raises(InvalidParametersError):
        build_instance("nope", {})
    with pytest.raises((ConfigurationError, InvalidParametersError)):
        build_instance("table1", {"mu2": 0.3, "extra": 1})


def test_fig1_mean_formula():
    inst = make_fig1_example(2500, 0.2)
    assert inst.means[0] == pytest.approx(0.5 * 0.8 + 1 / math.sqrt(2500))
