"""Episode execution, seeded replication, parameter sweeps and CSV export."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .core import Instance, PullRecord, RegretLedger, draw_cost, draw_reward
from .exceptions import ConfigurationError, SubsidyBanditError
from .instances import build_instance
from .policies import PolicySpec, make_policy

log = logging.getLogger(__name__)

CONFIG_VERSION = 1

TRAJECTORY_COLUMNS = (
    "run_id", "t", "policy", "instance", "arm", "reward", "observed_cost",
    "inst_quality_regret", "inst_cost_regret", "cum_quality_regret", "cum_cost_regret",
)
SUMMARY_COLUMNS = (
    "policy", "instance", "grid_param", "grid_value", "checkpoint_t", "n",
    "mean_quality_regret", "std_quality_regret", "mean_cost_regret", "std_cost_regret",
)


def fmt(x: Any) -> str:
    """Serialize numbers with 12 significant digits; pass other values through."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return "" if x is None else str(x)


# ---------------------------------------------------------------------------
# episodes


@dataclass
class Trajectory:
    policy: str
    instance: str
    seed: int
    records: list[PullRecord]
    ledger: RegretLedger
    run_id: int = 0

    def rows(self, rounds: Iterable[int] | None = None) -> list[tuple]:
        return trajectory_rows(self, rounds)


def episode_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent environment and policy streams derived from one seed."""
    env_ss, pol_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(env_ss), np.random.default_rng(pol_ss)


def run_episode(
    instance: Instance,
    policy: PolicySpec | str | Mapping[str, Any],
    horizon: int,
    seed: int,
    run_id: int = 0,
) -> tuple[Trajectory, RegretLedger]:
    """Play ``horizon`` rounds of ``policy`` on ``instance``; deterministic given ``seed``."""
    spec = PolicySpec.parse(policy)
    if horizon < instance.n_arms:
        raise ConfigurationError(
            f"horizon T={horizon} is smaller than arm count K={instance.n_arms}"
        )
    env_rng, pol_rng = episode_rngs(seed)
    agent = make_policy(spec, instance, horizon, pol_rng)
    arms = instance.arms
    learns_cost = instance.random_costs
    ledger = RegretLedger()
    select, update, record = agent.select, agent.update, ledger.update
    for t in range(1, horizon + 1):
        arm = select(t)
        spec_i = arms[arm]
        reward = draw_reward(spec_i, env_rng)
        cost = draw_cost(spec_i, env_rng)
        update(arm, reward, cost if learns_cost else None)
        record(instance, PullRecord(t, arm, reward, cost))
    traj = Trajectory(spec.name, instance.label, seed, ledger.records, ledger, run_id)
    return traj, ledger


def trajectory_rows(traj: Trajectory, rounds: Iterable[int] | None = None) -> list[tuple]:
    led = traj.ledger
    idx = range(len(traj.records)) if rounds is None else [
        t - 1 for t in rounds if 1 <= t <= len(traj.records)
    ]
    out = []
    for k in idx:
        rec = traj.records[k]
        out.append((
            traj.run_id, rec.t, traj.policy, traj.instance, rec.arm, rec.reward,
            rec.observed_cost, led.inst_quality[k], led.inst_cost[k],
            led.quality_trace[k], led.cost_trace[k],
        ))
    return out


def default_checkpoints(horizon: int, count: int = 100) -> list[int]:
    """``count`` log-spaced rounds in ``[1, T]`` plus ``T`` itself."""
    pts = np.unique(np.round(np.logspace(0.0, math.log10(horizon), count)).astype(int))
    pts = [int(p) for p in pts if 1 <= p <= horizon]
    if pts[-1] != horizon:
        pts.append(horizon)
    return pts


def resolve_checkpoints(spec: str | Sequence[int], horizon: int) -> list[int]:
    if spec == "log":
        return default_checkpoints(horizon)
    if spec == "per-round":
        return list(range(1, horizon + 1))
    pts = sorted({int(t) for t in spec})
    if not pts or pts[0] < 1 or pts[-1] > horizon:
        raise ConfigurationError(f"checkpoints must lie in [1, {horizon}]")
    return pts


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ConfigurationError("sweep grid must be nonempty")


@dataclass(frozen=True)
class InstanceSpec:
    name: str
    params: Mapping[str, Any] = field(default_factory=dict)
    random_costs: bool = False
    sweep: SweepSpec | None = None

    def grid(self) -> list[Any]:
        return [None] if self.sweep is None else list(self.sweep.values)

    def build(self, grid_value: Any = None) -> Instance:
        params = dict(self.params)
        if self.sweep is not None:
            if grid_value is None:
                raise ConfigurationError("swept instance needs a grid value")
            params[self.sweep.param] = grid_value
        return build_instance(self.name, params, self.random_costs)


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment (optionally a sweep)."""

    instance: InstanceSpec
    policies: tuple[PolicySpec, ...]
    horizon: int
    replications: int = 50
    base_seed: int = 0
    checkpoints: Any = "log"
    label: str = "experiment"
    summary_path: str | None = "summary.csv"
    trajectory_path: str | None = "trajectory.csv"
    trajectory_granularity: str = "checkpoints"

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigurationError("replications must be at least 1")
        if self.horizon < 1:
            raise ConfigurationError("horizon must be positive")
        if not self.policies:
            raise ConfigurationError("at least one policy is required")
        if self.trajectory_granularity not in ("checkpoints", "per-round"):
            raise ConfigurationError("trajectory granularity must be 'checkpoints' or 'per-round'")
        resolve_checkpoints(self.checkpoints, self.horizon)

    @property
    def is_sweep(self) -> bool:
        return self.instance.sweep is not None

    def validate(self) -> None:
        """Build every instance and policy once so errors surface before running."""
        for value in self.instance.grid():
            inst = self.instance.build(value)
            if self.horizon < inst.n_arms:
                raise ConfigurationError(
                    f"horizon T={self.horizon} < arm count K={inst.n_arms} "
                    f"(need K <= T) for {inst.label}"
                )
            for spec in self.policies:
                make_policy(spec, inst, self.horizon, np.random.default_rng(0))

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ExperimentConfig":
        _check_keys(doc, {"version", "label", "instance", "policies", "horizon",
                          "replications", "base_seed", "checkpoints", "output"}, "config")
        if doc.get("version") != CONFIG_VERSION:
            raise ConfigurationError(f"config 'version' must be {CONFIG_VERSION}")
        for key in ("instance", "policies", "horizon"):
            if key not in doc:
                raise ConfigurationError(f"config missing required key {key!r}")
        inst = doc["instance"]
        _check_keys(inst, {"name", "params", "random_costs", "sweep"}, "instance")
        sweep = None
        if inst.get("sweep") is not None:
            _check_keys(inst["sweep"], {"param", "values"}, "instance.sweep")
            sweep = SweepSpec(inst["sweep"]["param"], tuple(inst["sweep"]["values"]))
        ispec = InstanceSpec(inst["name"], dict(inst.get("params", {})),
                             bool(inst.get("random_costs", False)), sweep)
        out = doc.get("output", {})
        _check_keys(out, {"summary", "trajectory", "trajectory_granularity"}, "output")
        return cls(
            instance=ispec,
            policies=tuple(PolicySpec.parse(p) for p in doc["policies"]),
            horizon=int(doc["horizon"]),
            replications=int(doc.get("replications", 50)),
            base_seed=int(doc.get("base_seed", 0)),
            checkpoints=doc.get("checkpoints", "log"),
            label=str(doc.get("label", "experiment")),
            summary_path=out.get("summary", "summary.csv"),
            trajectory_path=out.get("trajectory", "trajectory.csv"),
            trajectory_granularity=out.get("trajectory_granularity", "checkpoints"),
        )

    def to_dict(self) -> dict:
        inst: dict[str, Any] = {"name": self.instance.name, "params": dict(self.instance.params),
                                "random_costs": self.instance.random_costs}
        if self.instance.sweep is not None:
            inst["sweep"] = {"param": self.instance.sweep.param,
                             "values": list(self.instance.sweep.values)}
        return {
            "version": CONFIG_VERSION,
            "label": self.label,
            "instance": inst,
            "policies": [p.to_json() for p in self.policies],
            "horizon": self.horizon,
            "replications": self.replications,
            "base_seed": self.base_seed,
            "checkpoints": self.checkpoints,
            "output": {"summary": self.summary_path, "trajectory": self.trajectory_path,
                       "trajectory_granularity": self.trajectory_granularity},
        }


def _check_keys(doc: Any, allowed: set[str], where: str) -> None:
    if not isinstance(doc, Mapping):
        raise ConfigurationError(f"{where} must be a JSON object")
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigurationError(f"unknown keys in {where}: {sorted(unknown)}")


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return ExperimentConfig.from_dict(doc)


# ---------------------------------------------------------------------------
# replication and aggregation


@dataclass
class SummaryRow:
    policy: str
    instance: str
    grid_param: str
    grid_value: Any
    checkpoint_t: int
    n: int
    mean_quality_regret: float
    std_quality_regret: float
    mean_cost_regret: float
    std_cost_regret: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in SUMMARY_COLUMNS)


@dataclass
class Summary:
    """Aggregated regret statistics plus the raw per-replication checkpoint values.

    ``runs[(policy, grid_value)]`` has shape ``(n, len(checkpoints), 2)`` with
    cumulative quality regret in ``[..., 0]`` and cost regret in ``[..., 1]``.
    """

    checkpoints: list[int]
    rows: list[SummaryRow] = field(default_factory=list)
    runs: dict[tuple[str, Any], np.ndarray] = field(default_factory=dict)
    trajectory: list[tuple] = field(default_factory=list)

    def select(self, policy: str, grid_value: Any = None, t: int | None = None) -> SummaryRow:
        t = self.checkpoints[-1] if t is None else t
        for row in self.rows:
            if row.policy == policy and row.grid_value == grid_value and row.checkpoint_t == t:
                return row
        raise KeyError((policy, grid_value, t))

    def final(self, policy: str, grid_value: Any = None) -> SummaryRow:
        return self.select(policy, grid_value)

    def extend(self, other: "Summary") -> None:
        self.rows.extend(other.rows)
        self.runs.update(other.runs)
        self.trajectory.extend(other.trajectory)


def _episode_task(args):
    instance, spec, horizon, seed, run_id, checkpoints, rows_at = args
    try:
        traj, ledger = run_episode(instance, spec, horizon, seed, run_id)
    except SubsidyBanditError as exc:
        raise type(exc)(f"replication {run_id} ({PolicySpec.parse(spec).name}): {exc}") from exc
    idx = [t - 1 for t in checkpoints]
    q = [ledger.quality_trace[i] for i in idx]
    c = [ledger.cost_trace[i] for i in idx]
    rows = [] if rows_at is None else trajectory_rows(
        traj, None if rows_at == "per-round" else checkpoints)
    return q, c, rows


def _map(tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [_episode_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_episode_task, tasks, chunksize=chunk))


def default_jobs() -> int:
    return os.cpu_count() or 1


def aggregate(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and population standard deviation across replications (axis 0)."""
    return values.mean(axis=0), values.std(axis=0)


def run_replications(
    config: ExperimentConfig,
    jobs: int = 1,
    grid_value: Any = None,
    keep_trajectory: bool | None = None,
) -> Summary:
    """Replicate every policy ``n`` times on one grid point; replica ``j`` uses ``base_seed + j``."""
    instance = config.instance.build(grid_value)
    horizon = config.horizon
    if horizon < instance.n_arms:
        raise ConfigurationError(f"horizon T={horizon} < arm count K={instance.n_arms}")
    checkpoints = resolve_checkpoints(config.checkpoints, horizon)
    if keep_trajectory is None:
        keep_trajectory = config.trajectory_path is not None
    rows_at = config.trajectory_granularity if keep_trajectory else None
    grid_param = config.instance.sweep.param if config.instance.sweep else ""
    summary = Summary(checkpoints)
    tasks = [
        (instance, spec, horizon, config.base_seed + j, j, checkpoints, rows_at)
        for spec in config.policies
        for j in range(config.replications)
    ]
    results = _map(tasks, jobs)
    n = config.replications
    for p, spec in enumerate(config.policies):
        chunk = results[p * n:(p + 1) * n]
        vals = np.array([[q, c] for q, c, _ in chunk]).transpose(0, 2, 1)
        summary.runs[(spec.name, grid_value)] = vals
        mean, std = aggregate(vals)
        for k, t in enumerate(checkpoints):
            summary.rows.append(SummaryRow(
                spec.name, instance.label, grid_param, grid_value, t, n,
                float(mean[k, 0]), float(std[k, 0]), float(mean[k, 1]), float(std[k, 1]),
            ))
        for _, _, rows in chunk:
            summary.trajectory.extend(rows)
    log.info("%s: %d policies x %d replications done", instance.label,
             len(config.policies), n)
    return summary


def sweep(config: ExperimentConfig, jobs: int = 1, keep_trajectory: bool | None = None) -> Summary:
    """Run :func:`run_replications` at every grid point, in grid order."""
    out: Summary | None = None
    for value in config.instance.grid():
        part = run_replications(config, jobs, value, keep_trajectory)
        if out is None:
            out = part
        else:
            out.extend(part)
    return out


# ---------------------------------------------------------------------------
# CSV persistence


def _write_rows(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def export_csv(obj, path: str | os.PathLike) -> Path:
    """Write a :class:`Summary`, a :class:`Trajectory` or raw trajectory rows as CSV."""
    if isinstance(obj, Summary):
        _write_rows(path, SUMMARY_COLUMNS, (r.as_tuple() for r in obj.rows))
    elif isinstance(obj, Trajectory):
        _write_rows(path, TRAJECTORY_COLUMNS, obj.rows())
    else:
        _write_rows(path, TRAJECTORY_COLUMNS, obj)
    return Path(path)


def read_csv(path: str | os.PathLike) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def read_summary_csv(path: str | os.PathLike) -> list[dict[str, Any]]:
    out = []
    for row in read_csv(path):
        rec: dict[str, Any] = dict(row)
        for key in ("checkpoint_t", "n"):
            rec[key] = int(row[key])
        for key in SUMMARY_COLUMNS[6:]:
            rec[key] = float(row[key])
        rec["grid_value"] = float(row["grid_value"]) if row["grid_value"] else None
        out.append(rec)
    return out
