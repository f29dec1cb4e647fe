"""Built-in experiments and the pass/fail checks evaluated on their summaries.

Targets:

``fig1``       two-arm instance whose free arm sits just above the tolerated reward
``fig2``       sweep of the free arm's mean over the two-arm table instance
``ts-linear``  Gaussian Thompson sampling on the deterministic hard instance
``scaling``    CS-ETC total regret growth over three horizons
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .policies import PolicySpec
from .runner import ExperimentConfig, InstanceSpec, Summary, SweepSpec, export_csv, sweep

FIG1_POLICIES = ("cs-ts-beta", "cs-ucb", "cs-etc")
FIG1_T = 10_000
FIG2_T = 5_000
TS_LINEAR_T = (5_000, 20_000)
SCALING_T = (2_500, 10_000, 40_000)
REPLICATIONS = 50

SLOPE_RANGE = (0.55, 0.80)
FIG1_ETC_RANGE = (250.0, 350.0)
FIG1_FACTOR = 3.0
FIG2_QUALITY_FACTOR = 0.5
FIG2_COST_FACTOR = 2.0
TS_RATIO_SPREAD = 2.0
TS_OVER_ETC = 10.0
ZERO_QUALITY = 1e-9


@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: value={self.value:.6g} bound={self.bound:.6g} {self.detail}"


def fig2_grid() -> list[float]:
    """Free-arm means 0.30, 0.33, ..., 0.60."""
    return [round(0.30 + 0.03 * k, 10) for k in range(11)]


def _config(label, name, params, policies, horizon, n, seed, sweep_spec=None,
            random_costs=False) -> ExperimentConfig:
    return ExperimentConfig(
        instance=InstanceSpec(name, params, random_costs, sweep_spec),
        policies=tuple(PolicySpec.parse(p) for p in policies),
        horizon=horizon,
        replications=n,
        base_seed=seed,
        label=label,
        trajectory_path=None,
    )


def fig1_config(n: int = REPLICATIONS, seed: int = 0, T: int = FIG1_T) -> ExperimentConfig:
    return _config("fig1", "fig1", {"T": T, "alpha": 0.1}, FIG1_POLICIES, T, n, seed)


def fig2_config(n: int = REPLICATIONS, seed: int = 0) -> ExperimentConfig:
    return _config("fig2", "table1", {}, FIG1_POLICIES, FIG2_T, n, seed,
                   SweepSpec("mu2", tuple(fig2_grid())))


def ts_linear_config(T: int, n: int = REPLICATIONS, seed: int = 0) -> ExperimentConfig:
    gauss = {"name": "cs-ts-gauss", "params": {"sigma0_sq": 1.0, "sigman_sq": 1.0}}
    return _config(f"ts-linear-T{T}", "ts-hard", {"alpha": 0.1, "K": 5, "T": T, "d": 1.0},
                   (gauss, "cs-etc"), T, n, seed)


def scaling_config(T: int, n: int = REPLICATIONS, seed: int = 0) -> ExperimentConfig:
    return _config(f"scaling-T{T}", "fig1", {"T": T, "alpha": 0.1}, ("cs-etc",), T, n, seed)


def consistent_config(n: int = REPLICATIONS, seed: int = 0, T: int = 10_000) -> ExperimentConfig:
    params = {"means": [0.5, 0.4, 0.3], "costs": [0.5, 0.4, 0.3], "alpha": 0.1,
              "label": "consistent"}
    return _config("consistent", "custom", params, ("cs-ucb",), T, n, seed)


def unknown_cost_configs(n: int = REPLICATIONS, seed: int = 0, T: int = FIG1_T):
    known = _config("fig1-known", "fig1", {"T": T, "alpha": 0.1}, ("cs-etc",), T, n, seed)
    learned = _config("fig1-random", "fig1", {"T": T, "alpha": 0.1}, ("cs-etc-uc",), T, n,
                      seed, random_costs=True)
    return known, learned


# ---------------------------------------------------------------------------
# checks


def check_fig1(s: Summary) -> list[Check]:
    etc = s.final("cs-etc").mean_cost_regret
    lo, hi = FIG1_ETC_RANGE
    out = [Check("fig1 cs-etc mean cost regret in [250, 350]", etc, hi, lo <= etc <= hi)]
    for name in ("cs-ts-beta", "cs-ucb"):
        v = s.final(name).mean_cost_regret
        out.append(Check(f"fig1 {name} cost regret >= 3x cs-etc", v, FIG1_FACTOR * etc,
                         v >= FIG1_FACTOR * etc))
    for name in FIG1_POLICIES:
        q = s.final(name).mean_quality_regret
        out.append(Check(f"fig1 {name} quality regret ~ 0", q, ZERO_QUALITY, q <= ZERO_QUALITY))
    return out


def check_fig2(s: Summary) -> list[Check]:
    out = []
    zero_ok = True
    worst = 0.0
    for mu2 in fig2_grid():
        if mu2 > 0.42 + 1e-12:
            continue
        for name in FIG1_POLICIES:
            v = s.final(name, mu2).mean_cost_regret
            worst = max(worst, v)
            zero_ok &= v == 0.0
    out.append(Check("fig2 (a) cost regret == 0 for mu2 <= 0.42", worst, 0.0, zero_ok))
    etc_q = s.final("cs-etc", 0.3).mean_quality_regret
    for name in ("cs-ts-beta", "cs-ucb"):
        q = s.final(name, 0.3).mean_quality_regret
        out.append(Check(f"fig2 (b) {name} quality regret <= 0.5x cs-etc at mu2=0.30", q,
                         FIG2_QUALITY_FACTOR * etc_q, q <= FIG2_QUALITY_FACTOR * etc_q))
    for mu2 in (0.42, 0.45):
        etc_c = s.final("cs-etc", mu2).mean_cost_regret
        for name in ("cs-ts-beta", "cs-ucb"):
            c = s.final(name, mu2).mean_cost_regret
            out.append(Check(f"fig2 (c) {name} cost regret >= 2x cs-etc at mu2={mu2}", c,
                             FIG2_COST_FACTOR * etc_c, c >= FIG2_COST_FACTOR * etc_c))
    return out


def check_ts_linear(summaries: dict[int, Summary]) -> list[Check]:
    ratios = {T: s.final("cs-ts-gauss").mean_cost_regret / T for T, s in summaries.items()}
    lo, hi = min(ratios.values()), max(ratios.values())
    spread = hi / lo if lo > 0 else math.inf
    out = [Check("ts-linear cost_regret/T agrees across horizons within 2x", spread,
                 TS_RATIO_SPREAD, spread <= TS_RATIO_SPREAD,
                 " ".join(f"T={T}:{r:.4f}" for T, r in sorted(ratios.items())))]
    T = max(summaries)
    etc = summaries[T].final("cs-etc").mean_cost_regret / T
    out.append(Check(f"ts-linear cs-ts-gauss ratio > 10x cs-etc at T={T}", ratios[T],
                     TS_OVER_ETC * etc, ratios[T] > TS_OVER_ETC * etc))
    return out


def loglog_slope(horizons, values) -> float:
    x = np.log(np.asarray(horizons, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def check_scaling(summaries: dict[int, Summary]) -> list[Check]:
    Ts = sorted(summaries)
    totals = [summaries[T].final("cs-etc").mean_quality_regret
              + summaries[T].final("cs-etc").mean_cost_regret for T in Ts]
    slope = loglog_slope(Ts, totals)
    lo, hi = SLOPE_RANGE
    return [Check("scaling cs-etc log-log slope in [0.55, 0.80]", slope, hi, lo <= slope <= hi,
                  " ".join(f"T={T}:{v:.1f}" for T, v in zip(Ts, totals)))]


def consistent_bound(K: int, T: int) -> float:
    return math.sqrt(8.0 * K * T * math.log(T))


def check_consistent(s: Summary, K: int = 3, delta: float = 1.0) -> list[Check]:
    runs = s.runs[("cs-ucb", None)][:, -1, :]
    T = s.checkpoints[-1]
    bound = consistent_bound(K, T)
    ok = int(np.sum((runs[:, 0] <= bound) & (runs[:, 1] <= delta * bound)))
    need = len(runs) - 1 if len(runs) > 1 else 1
    return [Check("consistent cs-ucb within sqrt(8KT ln T) bounds", ok, need, ok >= need,
                  f"bound={bound:.1f} max_q={runs[:, 0].max():.1f} max_c={runs[:, 1].max():.1f}")]


def check_unknown_cost(known: Summary, learned: Summary) -> list[Check]:
    a = known.final("cs-etc").mean_cost_regret
    b = learned.final("cs-etc-uc").mean_cost_regret
    rel = abs(b - a) / a
    return [Check("cs-etc-uc cost regret within 20% of cs-etc", rel, 0.2, rel <= 0.2,
                  f"known={a:.1f} random={b:.1f}")]


# ---------------------------------------------------------------------------
# driver


def _run(cfg: ExperimentConfig, out: Path | None, jobs: int, written: list[Path]) -> Summary:
    s = sweep(cfg, jobs)
    if out is not None:
        written.append(export_csv(s, out / f"{cfg.label}_summary.csv"))
    return s


def _fig1(seed, out, jobs, written):
    return check_fig1(_run(fig1_config(seed=seed), out, jobs, written))


def _fig2(seed, out, jobs, written):
    return check_fig2(_run(fig2_config(seed=seed), out, jobs, written))


def _ts_linear(seed, out, jobs, written):
    return check_ts_linear({T: _run(ts_linear_config(T, seed=seed), out, jobs, written)
                            for T in TS_LINEAR_T})


def _scaling(seed, out, jobs, written):
    return check_scaling({T: _run(scaling_config(T, seed=seed), out, jobs, written)
                          for T in SCALING_T})


TARGETS: dict[str, Callable] = {
    "fig1": _fig1,
    "fig2": _fig2,
    "ts-linear": _ts_linear,
    "scaling": _scaling,
}


def reproduce(target: str, out_dir: str | Path | None = None, jobs: int = 1,
              seed: int = 0) -> tuple[list[Check], list[Path]]:
    if target not in TARGETS:
        raise KeyError(target)
    out = None if out_dir is None else Path(out_dir)
    written: list[Path] = []
    checks = TARGETS[target](seed, out, jobs, written)
    return checks, written
