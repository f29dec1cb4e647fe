"""Problem representation, benchmark arms and the quality/cost regret ledger.

Arms carry a reward model (Bernoulli or deterministic) and a cost model
(known scalar, or Bernoulli with unknown mean).  An :class:`Instance` bundles
the arms with the subsidy factor ``alpha`` and derives the two benchmark arms:

* ``m_star``: the arm with the highest mean reward,
* ``i_star``: the cheapest arm whose mean reward is at least the smallest
  tolerated reward ``(1 - alpha) * mu[m_star]``.

Regret is always measured against true means and mean costs, never against
sampled realizations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import InvalidInstanceError, SequencingError

BERNOULLI = "bernoulli"
DETERMINISTIC = "deterministic"
KNOWN = "known"
RANDOM_BERNOULLI = "bernoulli"

REWARD_MODELS = (BERNOULLI, DETERMINISTIC)
COST_MODELS = (KNOWN, RANDOM_BERNOULLI)


@dataclass(frozen=True)
class ArmSpec:
    """One arm: a reward distribution on [0, 1] and a cost model on [0, 1]."""

    mean: float
    cost: float
    reward_model: str = BERNOULLI
    cost_model: str = KNOWN

    def __post_init__(self):
        if self.reward_model not in REWARD_MODELS:
            raise InvalidInstanceError(f"unknown reward model {self.reward_model!r}")
        if self.cost_model not in COST_MODELS:
            raise InvalidInstanceError(f"unknown cost model {self.cost_model!r}")
        if not 0.0 <= self.mean <= 1.0:
            raise InvalidInstanceError(f"mean reward {self.mean} outside [0, 1]")
        if not 0.0 <= self.cost <= 1.0:
            raise InvalidInstanceError(f"cost {self.cost} outside [0, 1]")

    @property
    def random_cost(self) -> bool:
        return self.cost_model != KNOWN


class Benchmarks(NamedTuple):
    m_star: int
    i_star: int
    tolerated: float
    feasible_set: tuple[int, ...]


@dataclass(frozen=True)
class Instance:
    """A full problem: ordered arms plus the subsidy factor."""

    arms: tuple[ArmSpec, ...]
    alpha: float
    label: str = "instance"

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        if len(self.arms) == 0:
            raise InvalidInstanceError("instance needs at least one arm")
        for arm in self.arms:
            if not isinstance(arm, ArmSpec):
                raise InvalidInstanceError(f"expected ArmSpec, got {type(arm).__name__}")
        if not 0.0 <= self.alpha < 1.0:
            raise InvalidInstanceError(f"subsidy factor {self.alpha} outside [0, 1)")

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def means(self) -> tuple[float, ...]:
        return tuple(a.mean for a in self.arms)

    @property
    def costs(self) -> tuple[float, ...]:
        """Mean costs (the known cost for known-cost arms)."""
        return tuple(a.cost for a in self.arms)

    @property
    def random_costs(self) -> bool:
        return any(a.random_cost for a in self.arms)

    @cached_property
    def benchmarks(self) -> Benchmarks:
        return compute_benchmarks(self)

    @cached_property
    def regret_table(self) -> tuple[tuple[float, float, float], ...]:
        """Per-arm ``(quality, cost, modified quality)`` instantaneous regrets."""
        return tuple(instantaneous_regret(self, i) for i in range(self.n_arms))


def compute_benchmarks(instance: Instance) -> Benchmarks:
    """Return ``m_star``, ``i_star``, the tolerated reward and the feasible set.

    Ties: ``m_star`` is the lowest index among reward maximizers; ``i_star``
    is the lowest cost, then highest mean, then lowest index.
    """
    if not instance.arms:
        raise InvalidInstanceError("instance needs at least one arm")
    means = instance.means
    costs = instance.costs
    best = max(means)
    m_star = means.index(best)
    tolerated = (1.0 - instance.alpha) * means[m_star]
    feasible = tuple(i for i, mu in enumerate(means) if mu >= tolerated)
    i_star = min(feasible, key=lambda i: (costs[i], -means[i], i))
    return Benchmarks(m_star, i_star, tolerated, feasible)


def instantaneous_regret(instance: Instance, arm: int) -> tuple[float, float, float]:
    """Per-round quality, cost and modified-quality regret of pulling ``arm``."""
    if not 0 <= arm < instance.n_arms:
        raise IndexError(f"arm {arm} out of range for {instance.n_arms} arms")
    m_star, i_star, tolerated, _ = instance.benchmarks
    means = instance.means
    costs = instance.costs
    q = max(tolerated - means[arm], 0.0)
    c = max(costs[arm] - costs[i_star], 0.0)
    mq = max(means[m_star] - means[arm], 0.0) if costs[arm] == 0.0 else 0.0
    return q, c, mq


@dataclass(frozen=True, slots=True)
class PullRecord:
    t: int
    arm: int
    reward: float
    observed_cost: float


@dataclass
class RegretLedger:
    """Cumulative quality, cost and modified-quality regret of one episode.

    ``quality_trace[t-1]`` and ``cost_trace[t-1]`` hold the cumulative totals
    after round ``t``.
    """

    cum_quality: float = 0.0
    cum_cost: float = 0.0
    cum_mod_quality: float = 0.0
    records: list[PullRecord] = field(default_factory=list)
    inst_quality: list[float] = field(default_factory=list)
    inst_cost: list[float] = field(default_factory=list)
    inst_mod_quality: list[float] = field(default_factory=list)
    quality_trace: list[float] = field(default_factory=list)
    cost_trace: list[float] = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.records)

    def update(self, instance: Instance, record: PullRecord) -> "RegretLedger":
        if record.t != len(self.records) + 1:
            raise SequencingError(
                f"expected round {len(self.records) + 1}, got {record.t}"
            )
        if not 0 <= record.arm < instance.n_arms:
            raise IndexError(f"arm {record.arm} out of range")
        q, c, mq = instance.regret_table[record.arm]
        self.cum_quality += q
        self.cum_cost += c
        self.cum_mod_quality += mq
        self.records.append(record)
        self.inst_quality.append(q)
        self.inst_cost.append(c)
        self.inst_mod_quality.append(mq)
        self.quality_trace.append(self.cum_quality)
        self.cost_trace.append(self.cum_cost)
        return self

    def totals(self) -> tuple[float, float, float]:
        return self.cum_quality, self.cum_cost, self.cum_mod_quality


def ledger_update(ledger: RegretLedger, instance: Instance, record: PullRecord) -> RegretLedger:
    return ledger.update(instance, record)


def draw_reward(arm: ArmSpec, rng: np.random.Generator) -> float:
    if arm.reward_model == DETERMINISTIC:
        return arm.mean
    return 1.0 if rng.random() < arm.mean else 0.0


def draw_cost(arm: ArmSpec, rng: np.random.Generator) -> float:
    if arm.cost_model == KNOWN:
        return arm.cost
    return 1.0 if rng.random() < arm.cost else 0.0


def make_instance(
    means: Sequence[float],
    costs: Sequence[float],
    alpha: float,
    label: str = "custom",
    reward_model: str = BERNOULLI,
    cost_model: str = KNOWN,
) -> Instance:
    """Build an instance from parallel mean/cost lists."""
    if len(means) != len(costs):
        raise InvalidInstanceError("means and costs must have equal length")
    arms = tuple(
        ArmSpec(float(m), float(c), reward_model, cost_model) for m, c in zip(means, costs)
    )
    return Instance(arms, float(alpha), label)
