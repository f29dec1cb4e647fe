import math

import numpy as np
import pytest

from subsidy_bandit.core import PullRecord, RegretLedger
from subsidy_bandit.instances import make_ts_hard
from subsidy_bandit.runner import run_episode
from subsidy_bandit.verify import (
    REPORT_COLUMNS,
    anticoncentration_probe,
    check_log_inequalities,
    check_pinsker_bound,
    clean_event_mask,
    factory_trial,
    kl_bernoulli,
    log_grid,
    log_inequality_margins,
    pinsker_grid,
    reduction_stream_check,
    regret_oracle,
    run_suite,
    tail_frequency,
    write_report,
)


def test_kl_values():
    assert kl_bernoulli(0.3, 0.3) == 0.0
    assert kl_bernoulli(0.25, 0.375) == pytest.approx(0.035375, abs=1e-6)
    assert kl_bernoulli(0.0, 0.5) == pytest.approx(math.log(2))
    assert kl_bernoulli(1.0, 0.5) == pytest.approx(math.log(2))


def test_kl_unbounded():
    assert kl_bernoulli(0.5, 0.0) == math.inf
    assert kl_bernoulli(0.5, 1.0) == math.inf
    assert kl_bernoulli(0.0, 0.0) == 0.0


def test_kl_nonnegative_zero_iff_equal():
    xs = np.linspace(0.05, 0.95, 19)
    for x in xs:
        for y in xs:
            v = kl_bernoulli(x, y)
            assert v >= 0.0
            assert (v == 0.0) == (x == y)


def test_pinsker_examples():
    assert check_pinsker_bound(0.25, 0.125)
    assert check_pinsker_bound(0.5, 0.25)
    assert kl_bernoulli(0.5, 0.75) == pytest.approx(0.143841, abs=1e-6)
    assert check_pinsker_bound(0.3, 1e-9)


@pytest.mark.parametrize("p,eps", [(0.0, 0.01), (0.6, 0.1), (0.2, 0.2)])
def test_pinsker_preconditions(p, eps):
    with pytest.raises(ValueError):
        check_pinsker_bound(p, eps)


def test_pinsker_grid():
    grid = pinsker_grid()
    assert len(grid) >= 500
    assert all(check_pinsker_bound(p, e) for p, e in grid)


def test_log_inequalities():
    lo1, lo2 = log_inequality_margins(0.5)
    assert math.log(1.5) - (0.5 - 0.25 / 0.75) == pytest.approx(lo1)
    assert math.log(0.5) - (-0.5 - 0.25 / 0.5) == pytest.approx(lo2)
    assert check_log_inequalities(0.5)
    assert check_log_inequalities(1e-8)
    grid = log_grid()
    assert len(grid) == 99 and grid[0] == pytest.approx(0.01) and grid[-1] == pytest.approx(0.99)
    assert all(check_log_inequalities(x) for x in grid)


def test_oracle_empty_and_closed_form(fig1):
    assert regret_oracle([], fig1) == (0.0, 0.0, 0.0)
    traj, led = run_episode(fig1, "cs-ucb", 2000, 3)
    pulls1 = sum(r.arm == 1 for r in traj.records)
    assert regret_oracle(traj.records, fig1)[1] == float(pulls1)
    assert regret_oracle(traj.records, fig1) == led.totals()


def test_oracle_detects_injected_mismatch(three_arm):
    traj, led = run_episode(three_arm, "round-robin", 30, 0)
    tampered = list(traj.records)
    tampered[4] = PullRecord(5, (tampered[4].arm + 1) % 3, 0.0, 0.0)
    assert regret_oracle(tampered, three_arm) != led.totals()


def test_clean_event_mask_prefix_closed(fig1):
    traj, _ = run_episode(fig1, "cs-etc", 2000, 0)
    mask = clean_event_mask(traj.records, fig1, 2000)
    assert mask[0]
    # once violated, stays violated
    if not mask.all():
        first = int(np.argmin(mask))
        assert not mask[first:].any()


def test_clean_event_mask_detects_violation():
    from subsidy_bandit.core import make_instance
    inst = make_instance([0.1, 0.9], [0.0, 1.0], 0.1)
    recs = [PullRecord(t, 0, 1.0, 0.0) for t in range(1, 40)]
    mask = clean_event_mask(recs, inst, 100)
    assert mask[0] and not mask[-1]


def test_probe_single_arm_is_zero():
    inst = make_ts_hard(0.1, 1, 1000, 1.0)
    freq = anticoncentration_probe(1.0, 1.0, inst, 1000, 2)
    assert freq.shape == (1000,) and not freq.any()


def test_probe_ts_vs_etc():
    inst = make_ts_hard(0.1, 5, 10_000, 1.0)
    ts = anticoncentration_probe(1.0, 1.0, inst, 10_000, 5)
    etc = anticoncentration_probe(None, 1.0, inst, 10_000, 5, policy="cs-etc")
    assert tail_frequency(ts) >= 0.05
    assert tail_frequency(etc) <= 0.01


def test_factory_trial_quick():
    stats = factory_trial(2.0, 0.25, 0.5, n=20_000, seed=1)
    assert stats.p_value > 0.001
    assert stats.mean_flips <= stats.flip_bound
    zero = factory_trial(2.0, 0.0, 0.5, n=1000)
    assert zero.ones == 0 and zero.p_value == 1.0


def test_reduction_stream_short():
    out = reduction_stream_check(L=2000, seed=3)
    assert out["target"] == pytest.approx(0.35 / 0.9)
    assert abs(out["z"]) <= 3.5
    assert out["conserved"] == 1.0


def test_suite_quick_and_report(tmp_path):
    results = run_suite(quick=True)
    assert results and all(r.passed for r in results)
    path = write_report(results, tmp_path / "report.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(REPORT_COLUMNS)
    assert len(lines) == len(results) + 1


def test_ledger_oracle_bit_exact_accumulation(three_arm):
    rng = np.random.default_rng(0)
    led = RegretLedger()
    for t in range(1, 5001):
        led.update(three_arm, PullRecord(t, int(rng.integers(3)), 0.0, 0.0))
    assert regret_oracle(led.records, three_arm) == led.totals()
