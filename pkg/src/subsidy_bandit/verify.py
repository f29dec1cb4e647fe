"""Independent oracles and numeric checks.

Everything here recomputes quantities along a separate code path from the
simulator so that the two can be cross-checked: the regret oracle rebuilds
benchmarks from raw means, the clean-event mask rebuilds empirical means from
raw pull records, and the KL / log-inequality checks are evaluated directly.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .bernoulli_factory import FactoryConfig, derived_pi0, factory_sample
from .core import Instance, PullRecord
from .instances import make_fig1_example, make_phi, make_table1, make_ts_hard
from .policies import make_policy
from .runner import episode_rngs, run_episode

SIGNIFICANCE = 0.001
FACTORY_CASES = ((1.0 / 0.9, 0.45, 0.1), (2.0, 0.25, 0.5), (1.5, 0.3, 0.5))
FACTORY_SAMPLES = 100_000
FLIP_SLACK = 1.05


def kl_bernoulli(x: float, y: float) -> float:
    """KL(Ber(x) || Ber(y)) in nats, with 0 ln 0 = 0; ``inf`` when unbounded."""
    if not 0.0 <= x <= 1.0 or not 0.0 <= y <= 1.0:
        raise ValueError("Bernoulli parameters must lie in [0, 1]")
    total = 0.0
    for a, b in ((x, y), (1.0 - x, 1.0 - y)):
        if a == 0.0:
            continue
        if b == 0.0:
            return math.inf
        total += a * math.log(a / b)
    return total


def check_pinsker_bound(p: float, eps: float, slack: float = 1e-12) -> bool:
    """KL(Ber(p) || Ber(p + eps)) <= 4 eps^2 / p for 0 < p <= 1/2, 0 < eps <= p/2."""
    if not (0.0 < p <= 0.5 and 0.0 < eps <= p / 2.0 and p + eps < 1.0):
        raise ValueError(f"(p, eps) = ({p}, {eps}) outside the lemma's range")
    return kl_bernoulli(p, p + eps) <= 4.0 * eps * eps / p + slack


def log_inequality_margins(x: float) -> tuple[float, float]:
    """Slack of ln(1+x) >= x - x^2/(1-x^2) and ln(1-x) >= -x - x^2/(1-x)."""
    first = math.log1p(x) - (x - x * x / (1.0 - x * x))
    second = math.log1p(-x) - (-x - x * x / (1.0 - x))
    return first, second


def check_log_inequalities(x: float, slack: float = 1e-12) -> bool:
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie in (0, 1)")
    a, b = log_inequality_margins(x)
    return a >= -slack and b >= -slack


def pinsker_grid() -> list[tuple[float, float]]:
    """50 values p = 0.01..0.50 times 10 evenly spaced eps in [p/10, p/2]."""
    pts = []
    for i in range(1, 51):
        p = i / 100
        for j in range(10):
            eps = p / 10 + (p / 2 - p / 10) * j / 9
            pts.append((p, min(eps, p / 2)))
    return pts


def log_grid() -> list[float]:
    return [i / 100 for i in range(1, 100)]


def regret_oracle(
    records: Sequence[PullRecord], instance: Instance
) -> tuple[float, float, float]:
    """Recompute cumulative quality, cost and modified-quality regret from raw records."""
    means = [a.mean for a in instance.arms]
    costs = [a.cost for a in instance.arms]
    top = max(means)
    best = min(i for i, m in enumerate(means) if m == top)
    floor = (1.0 - instance.alpha) * means[best]
    eligible = [i for i in range(len(means)) if means[i] >= floor]
    cheapest = sorted(eligible, key=lambda i: (costs[i], -means[i], i))[0]
    quality = cost = modified = 0.0
    for rec in records:
        mu = means[rec.arm]
        quality += max(floor - mu, 0.0)
        cost += max(costs[rec.arm] - costs[cheapest], 0.0)
        modified += max(means[best] - mu, 0.0) if costs[rec.arm] == 0.0 else 0.0
    return quality, cost, modified


def clean_event_mask(records: Sequence[PullRecord], instance: Instance, horizon: int) -> np.ndarray:
    """``mask[t-1]`` is True iff every pulled arm's empirical mean stayed within
    sqrt(2 ln T / T_i) of its true mean at the start of every round up to ``t``."""
    k = instance.n_arms
    means = [a.mean for a in instance.arms]
    counts = [0] * k
    sums = [0.0] * k
    lt2 = 2.0 * math.log(horizon)
    ok = True
    out = np.zeros(len(records), dtype=bool)
    for idx, rec in enumerate(records):
        if ok:
            for i in range(k):
                n = counts[i]
                if n and abs(sums[i] / n - means[i]) > math.sqrt(lt2 / n):
                    ok = False
                    break
        out[idx] = ok
        counts[rec.arm] += 1
        sums[rec.arm] += rec.reward
    return out


def anticoncentration_probe(
    sigma0_sq: float | None,
    sigman_sq: float,
    instance: Instance,
    T: int,
    n: int,
    policy: str = "cs-ts-gauss",
    base_seed: int = 0,
) -> np.ndarray:
    """Per-round fraction of ``n`` runs that pulled an arm costlier than ``i_star``."""
    costs = instance.costs
    floor = costs[instance.benchmarks.i_star]
    pricey = np.array([c > floor for c in costs])
    spec = {"name": policy, "params": {}}
    if policy == "cs-ts-gauss":
        spec["params"] = {"sigma0_sq": sigma0_sq, "sigman_sq": sigman_sq}
    hits = np.zeros(T)
    for j in range(n):
        traj, _ = run_episode(instance, spec, T, base_seed + j, j)
        arms = np.fromiter((r.arm for r in traj.records), dtype=int, count=T)
        hits += pricey[arms]
    return hits / n


def tail_frequency(freq: np.ndarray, fraction: float = 0.1) -> float:
    tail = max(1, int(round(len(freq) * fraction)))
    return float(np.mean(freq[-tail:]))


# ---------------------------------------------------------------------------
# Bernoulli factory checks


@dataclass
class FactoryStats:
    C: float
    r: float
    delta: float
    n: int
    ones: int
    mean_flips: float
    p_value: float

    @property
    def mean(self) -> float:
        return self.ones / self.n

    @property
    def flip_bound(self) -> float:
        return 9.5 * self.C / self.delta


def factory_trial(C: float, r: float, delta: float, n: int = FACTORY_SAMPLES,
                  seed: int = 0) -> FactoryStats:
    """Draw ``n`` factory outputs and chi-square them against Ber(C r)."""
    cfg = FactoryConfig(C, delta)
    rng = np.random.default_rng(seed)
    uni = rng.random

    def coin():
        return uni() < r

    ones = 0
    flips = 0
    for _ in range(n):
        bit, used = factory_sample(cfg, coin, rng)
        ones += bit
        flips += used
    target = C * r
    if 0.0 < target < 1.0:
        expected = [n * (1.0 - target), n * target]
        p_value = float(stats.chisquare([n - ones, ones], expected).pvalue)
    else:
        p_value = 1.0 if ones == round(n * target) else 0.0
    return FactoryStats(C, r, delta, n, ones, flips / n, p_value)


def reduction_stream_check(
    alpha: float = 0.1, p: float = 0.3, eps: float = 0.05, K: int = 1, a: int = 1,
    L: int = 10_000, seed: int = 0, delta: float = 0.5,
) -> dict[str, float]:
    """Feed a policy that always requests arm ``a`` through the reduction and compare
    the synthesized reward mean to mu_a / (1 - alpha)."""
    env = make_phi(theta=0.0, p=p, epsilon=eps, K=K, a=a)
    inner_view = make_phi(theta=alpha, p=p, epsilon=eps, K=K, a=a)
    env_rng, alg_rng = episode_rngs(seed)
    inner = make_policy({"name": "fixed-arm", "params": {"arm": a}}, inner_view, L, alg_rng)
    tr = derived_pi0(inner, env, L, alpha, alg_rng, delta, env_rng)
    target = env.arms[a].mean / (1.0 - alpha)
    mean = float(np.mean(tr.synthesized))
    sigma = math.sqrt(target * (1.0 - target) / L)
    return {"mean": mean, "target": target, "sigma": sigma,
            "z": (mean - target) / sigma, "T": tr.T, "L": tr.L,
            "conserved": float(tr.conserved())}


# ---------------------------------------------------------------------------
# suite


@dataclass
class CheckResult:
    check: str
    params: str
    value: float
    bound: float
    passed: bool

    def as_tuple(self):
        return (self.check, self.params, self.value, self.bound, self.passed)


REPORT_COLUMNS = ("check", "params", "value", "bound", "pass")


def _kl_examples() -> list[CheckResult]:
    out = []
    for x, y, want in ((0.3, 0.3, 0.0), (0.25, 0.375, 0.035375), (0.0, 0.5, math.log(2.0))):
        got = kl_bernoulli(x, y)
        out.append(CheckResult("kl_example", f"x={x};y={y}", got, want, abs(got - want) <= 1e-6))
    return out


def _pinsker() -> list[CheckResult]:
    worst = -math.inf
    fails = 0
    grid = pinsker_grid()
    for p, eps in grid:
        kl = kl_bernoulli(p, p + eps)
        worst = max(worst, kl / (4 * eps * eps / p))
        fails += not check_pinsker_bound(p, eps)
    return [CheckResult("pinsker_grid", f"points={len(grid)}", worst, 1.0, fails == 0)]


def _log_ineq() -> list[CheckResult]:
    grid = log_grid()
    margins = [min(log_inequality_margins(x)) for x in grid]
    ok = all(check_log_inequalities(x) for x in grid)
    return [CheckResult("log_inequalities", f"points={len(grid)}", min(margins), 0.0, ok)]


def _factory(n: int) -> list[CheckResult]:
    out = []
    for C, r, d in FACTORY_CASES:
        st = factory_trial(C, r, d, n)
        tag = f"C={C:.6g};r={r};delta={d};n={n}"
        out.append(CheckResult("factory_chisq_pvalue", tag, st.p_value, SIGNIFICANCE,
                               st.p_value > SIGNIFICANCE))
        out.append(CheckResult("factory_mean_flips", tag, st.mean_flips,
                               FLIP_SLACK * st.flip_bound,
                               st.mean_flips <= FLIP_SLACK * st.flip_bound))
    return out


def _reduction() -> list[CheckResult]:
    res = reduction_stream_check()
    return [
        CheckResult("reduction_stream_z", "phi[0.1,0.3,0.05]^1;L=10000", abs(res["z"]), 3.0,
                    abs(res["z"]) <= 3.0),
        CheckResult("reduction_conservation", "phi[0.1,0.3,0.05]^1;L=10000", res["T"],
                    res["T"], bool(res["conserved"])),
    ]


def _oracle() -> list[CheckResult]:
    out = []
    cases = [
        (make_fig1_example(2000, 0.1), ("cs-ucb", "cs-ts-beta", "cs-etc", "round-robin")),
        (make_table1(0.45), ("cs-ucb", "cs-etc", "oracle-istar", "oracle-mstar")),
        (make_ts_hard(0.1, 3, 2000, 1.0), ("cs-ts-gauss", "cs-etc")),
        (make_phi(theta=0.0, p=0.3, epsilon=0.05, K=3, a=2), ("cs-ucb", "round-robin")),
    ]
    for inst, names in cases:
        for name in names:
            traj, led = run_episode(inst, name, 2000, 7)
            same = regret_oracle(traj.records, inst) == led.totals()
            out.append(CheckResult("regret_oracle", f"{inst.label};{name}", led.cum_cost,
                                   led.cum_cost, same))
    return out


def _probe(n: int) -> list[CheckResult]:
    inst = make_ts_hard(0.1, 5, 10_000, 1.0)
    ts = tail_frequency(anticoncentration_probe(1.0, 1.0, inst, 10_000, n))
    etc = tail_frequency(anticoncentration_probe(1.0, 1.0, inst, 10_000, n, policy="cs-etc"))
    lone = tail_frequency(anticoncentration_probe(1.0, 1.0, make_ts_hard(0.1, 1, 10_000, 1.0),
                                                  10_000, 2))
    return [
        CheckResult("probe_ts_tail_freq", f"K=5;T=10000;n={n}", ts, 0.05, ts >= 0.05),
        CheckResult("probe_etc_tail_freq", f"K=5;T=10000;n={n}", etc, 0.01, etc <= 0.01),
        CheckResult("probe_single_arm", "K=1;T=10000", lone, 0.0, lone == 0.0),
    ]


def run_suite(quick: bool = False) -> list[CheckResult]:
    """Run every numeric check; ``quick`` shrinks the Monte Carlo sample sizes."""
    results: list[CheckResult] = []
    steps: list[Callable[[], list[CheckResult]]] = [
        _kl_examples, _pinsker, _log_ineq, _oracle, _reduction,
        lambda: _factory(10_000 if quick else FACTORY_SAMPLES),
        lambda: _probe(5 if quick else 50),
    ]
    for step in steps:
        results.extend(step())
    return results


def write_report(results: Iterable[CheckResult], path: str | os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in results:
            w.writerow([r.check, r.params, format(float(r.value), ".12g"),
                        format(float(r.bound), ".12g"), int(r.passed)])
    return path
