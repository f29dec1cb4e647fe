"""Cost-subsidized bandit policies.

Every policy is a small state machine driven by the episode loop::

    arm = policy.select(t)          # t is 1-based
    policy.update(arm, reward, cost)

Policies:

``cs-ucb``       clipped UCB index, pull the cheapest arm whose index is within
                 ``1 - alpha`` of the best index.
``cs-ts-beta``   same feasibility rule with Beta(1 + S, 1 + F) posterior samples.
``cs-ts-gauss``  Gaussian posterior samples, prior N(0, sigma0_sq), noise
                 variance sigman_sq (``sigma0_sq=None`` means a flat prior).
``cs-etc``       round-robin exploration for ``tau`` pulls per arm, then
                 UCB/LCB feasibility with known costs.
``cs-etc-uc``    as ``cs-etc`` but with unknown random costs; picks the lowest
                 cost lower confidence bound among feasible arms.
``oracle-istar``, ``oracle-mstar``, ``round-robin``  reference baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .core import Instance
from .exceptions import ConfigurationError

FORCED_INIT = "forced-init"
EXPLORATION = "exploration"
UCB = "ucb"
COMMITTED = "committed"


def confidence_radius(count: int, horizon: int) -> float:
    """Half-width sqrt(2 ln T / T_i) shared by every UCB/LCB construction."""
    if count < 1:
        raise ValueError("confidence radius needs at least one pull")
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    return math.sqrt(2.0 * math.log(horizon) / count)


def default_tau(horizon: int, n_arms: int) -> int:
    """Exploration pulls per arm: ceil((T/K)^(2/3)), clamped so K*tau <= T."""
    if n_arms < 1:
        raise ConfigurationError("need at least one arm")
    if n_arms > horizon:
        raise ConfigurationError(
            f"arm count K={n_arms} exceeds horizon T={horizon}; need K <= T"
        )
    # smallest tau with tau^3 >= (T/K)^2, in exact integer arithmetic
    tau = max(1, int(math.ceil((horizon / n_arms) ** (2.0 / 3.0))))
    while tau > 1 and (tau - 1) ** 3 * n_arms**2 >= horizon**2:
        tau -= 1
    while tau**3 * n_arms**2 < horizon**2:
        tau += 1
    return min(tau, horizon // n_arms)


def gaussian_posterior(
    reward_sum: float, count: int, sigma0_sq: float | None, sigman_sq: float
) -> tuple[float, float]:
    """Posterior mean and variance of a N(0, sigma0_sq) prior after ``count`` pulls.

    ``sigma0_sq=None`` (or ``inf``) is the flat-prior limit: mean ``sum/count``,
    variance ``sigman_sq/count``.
    """
    if sigma0_sq is None or math.isinf(sigma0_sq):
        return reward_sum / count, sigman_sq / count
    mean = reward_sum / (sigman_sq / sigma0_sq + count)
    var = 1.0 / (1.0 / sigma0_sq + count / sigman_sq)
    return mean, var


def cheapest_feasible(
    scores: Sequence[float], alpha: float, costs: Sequence[float]
) -> tuple[int, list[int]]:
    """Pick the cheapest arm whose score is within ``1 - alpha`` of the best.

    Returns ``(arm, feasible)``.  The best-scoring arm is always feasible; with
    negative scores the literal threshold would otherwise exclude every arm.
    Ties: lowest cost, then highest score, then lowest index.
    """
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    threshold = (1.0 - alpha) * scores[best]
    feasible = [i for i, s in enumerate(scores) if s - threshold >= 0.0]
    if best not in feasible:
        feasible.append(best)
        feasible.sort()
    arm = min(feasible, key=lambda i: (costs[i], -scores[i], i))
    return arm, feasible


def etc_feasible(
    means: Sequence[float], radii: Sequence[float], alpha: float
) -> tuple[list[int], int, list[float], list[float]]:
    """UCB-phase feasible set: arms whose UCB reaches (1-alpha) * LCB of the LCB leader."""
    ucb = [min(m + b, 1.0) for m, b in zip(means, radii)]
    lcb = [max(m - b, 0.0) for m, b in zip(means, radii)]
    leader = 0
    for i in range(1, len(lcb)):
        if lcb[i] > lcb[leader]:
            leader = i
    threshold = (1.0 - alpha) * lcb[leader]
    feasible = [i for i, u in enumerate(ucb) if u >= threshold]
    return feasible, leader, ucb, lcb


@dataclass
class PolicyState:
    """Per-episode state shared by all policies."""

    n_arms: int
    horizon: int
    alpha: float
    counts: list[int] = field(default_factory=list)
    reward_sums: list[float] = field(default_factory=list)
    cost_sums: list[float] = field(default_factory=list)
    phase: str = FORCED_INIT
    tau: int | None = None
    t: int = 1

    def __post_init__(self):
        if not self.counts:
            self.counts = [0] * self.n_arms
            self.reward_sums = [0.0] * self.n_arms
            self.cost_sums = [0.0] * self.n_arms

    def means(self) -> list[float]:
        return [s / n for s, n in zip(self.reward_sums, self.counts)]

    def radii(self) -> list[float]:
        lt2 = 2.0 * math.log(self.horizon)
        return [math.sqrt(lt2 / n) for n in self.counts]


class Policy:
    """Base class: bookkeeping of counts and sums plus round sequencing."""

    name = "policy"
    #: ``True`` for policies that learn costs, ``False`` for ones that need them known.
    random_costs: bool | None = False

    def __init__(self, instance: Instance, horizon: int, rng: np.random.Generator | None = None):
        if horizon < 1:
            raise ConfigurationError("horizon must be positive")
        self.instance = instance
        self.costs = instance.costs
        self.rng = rng if rng is not None else np.random.default_rng()
        self.state = PolicyState(instance.n_arms, horizon, instance.alpha)
        self.last_feasible: list[int] = []

    @property
    def n_arms(self) -> int:
        return self.state.n_arms

    def select(self, t: int) -> int:
        raise NotImplementedError

    def update(self, arm: int, reward: float, cost: float | None = None) -> None:
        st = self.state
        st.counts[arm] += 1
        st.reward_sums[arm] += reward
        if cost is not None:
            st.cost_sums[arm] += cost
        st.t += 1


class _IndexPolicy(Policy):
    """Forced initialization, then cheapest arm among near-best scores."""

    def select(self, t: int) -> int:
        if t <= self.n_arms:
            self.state.phase = FORCED_INIT
            self.last_feasible = []
            return t - 1
        self.state.phase = UCB
        arm, self.last_feasible = cheapest_feasible(self.scores(), self.state.alpha, self.costs)
        return arm

    def scores(self) -> list[float]:
        raise NotImplementedError


class CSUCB(_IndexPolicy):
    name = "cs-ucb"

    def scores(self) -> list[float]:
        st = self.state
        lt2 = 2.0 * math.log(st.horizon)
        return [
            min(s / n + math.sqrt(lt2 / n), 1.0) for s, n in zip(st.reward_sums, st.counts)
        ]


class CSTSBeta(_IndexPolicy):
    """Beta-Bernoulli Thompson sampling with a uniform prior.

    Non-binary rewards are rejected unless ``binarize`` is set, in which case a
    reward ``r`` is replaced by a Bernoulli(r) draw before the posterior update.
    """

    name = "cs-ts-beta"

    def __init__(self, instance, horizon, rng=None, binarize: bool = False):
        super().__init__(instance, horizon, rng)
        self.binarize = bool(binarize)
        self.successes = [0.0] * self.n_arms

    def scores(self) -> list[float]:
        beta = self.rng.beta
        return [
            beta(1.0 + s, 1.0 + n - s) for s, n in zip(self.successes, self.state.counts)
        ]

    def update(self, arm, reward, cost=None):
        if reward != 0.0 and reward != 1.0:
            if not self.binarize:
                raise ConfigurationError(
                    f"Beta posterior got non-binary reward {reward}; enable binarize"
                )
            reward = 1.0 if self.rng.random() < reward else 0.0
        self.successes[arm] += reward
        super().update(arm, reward, cost)


class CSTSGauss(_IndexPolicy):
    """Gaussian Thompson sampling; samples are left unclipped."""

    name = "cs-ts-gauss"

    def __init__(self, instance, horizon, rng=None, sigma0_sq: float | None = 1.0,
                 sigman_sq: float = 1.0):
        super().__init__(instance, horizon, rng)
        if sigma0_sq is not None and not sigma0_sq > 0:
            raise ConfigurationError("sigma0_sq must be positive (or None for a flat prior)")
        if not sigman_sq > 0:
            raise ConfigurationError("sigman_sq must be positive")
        self.sigma0_sq = sigma0_sq
        self.sigman_sq = sigman_sq

    def posterior(self, arm: int) -> tuple[float, float]:
        st = self.state
        return gaussian_posterior(st.reward_sums[arm], st.counts[arm], self.sigma0_sq,
                                  self.sigman_sq)

    def scores(self) -> list[float]:
        z = self.rng.standard_normal(self.n_arms)
        out = []
        for i in range(self.n_arms):
            mean, var = self.posterior(i)
            out.append(mean + math.sqrt(var) * z[i])
        return out


class CSETC(Policy):
    """Round-robin exploration for ``tau`` pulls per arm, then UCB/LCB feasibility."""

    name = "cs-etc"

    def __init__(self, instance, horizon, rng=None, tau: int | None = None):
        super().__init__(instance, horizon, rng)
        k = self.n_arms
        if tau is None:
            tau = default_tau(horizon, k)
        tau = int(tau)
        if tau < 1:
            raise ConfigurationError("tau must be at least 1")
        if k * tau > horizon:
            raise ConfigurationError(
                f"exploration budget K*tau={k * tau} exceeds horizon T={horizon}"
            )
        self.state.tau = tau
        self.state.phase = EXPLORATION
        self._explore_until = k * tau

    @property
    def tau(self) -> int:
        return self.state.tau

    def select(self, t: int) -> int:
        if t <= self._explore_until:
            self.state.phase = EXPLORATION
            self.last_feasible = []
            return (t - 1) % self.n_arms
        st = self.state
        st.phase = UCB
        feasible, _, ucb, _ = etc_feasible(st.means(), st.radii(), st.alpha)
        self.last_feasible = feasible
        return self._pick(feasible, ucb)

    def _pick(self, feasible: list[int], ucb: list[float]) -> int:
        costs = self.costs
        means = self.state.means()
        return min(feasible, key=lambda i: (costs[i], -means[i], i))


class CSETCUnknownCost(CSETC):
    """CS-ETC for random costs: minimize the cost lower confidence bound."""

    name = "cs-etc-uc"
    random_costs = True

    def _pick(self, feasible, ucb):
        st = self.state
        radii = st.radii()
        cost_lcb = [max(c / n - b, 0.0) for c, n, b in zip(st.cost_sums, st.counts, radii)]
        return min(feasible, key=lambda i: (cost_lcb[i], i))

    def update(self, arm, reward, cost=None):
        if cost is None:
            raise ConfigurationError("cs-etc-uc needs the observed cost on every update")
        super().update(arm, reward, cost)


class FixedArm(Policy):
    """Always pull one arm."""

    random_costs = None

    def __init__(self, instance, horizon, rng=None, arm: int = 0):
        super().__init__(instance, horizon, rng)
        if not 0 <= arm < self.n_arms:
            raise ConfigurationError(f"arm {arm} out of range")
        self.arm = arm
        self.state.phase = COMMITTED

    def select(self, t):
        return self.arm


class OracleIStar(FixedArm):
    name = "oracle-istar"

    def __init__(self, instance, horizon, rng=None):
        super().__init__(instance, horizon, rng, arm=instance.benchmarks.i_star)


class OracleMStar(FixedArm):
    name = "oracle-mstar"

    def __init__(self, instance, horizon, rng=None):
        super().__init__(instance, horizon, rng, arm=instance.benchmarks.m_star)


class RoundRobin(Policy):
    name = "round-robin"
    random_costs = None

    def select(self, t):
        self.state.phase = EXPLORATION
        return (t - 1) % self.n_arms


POLICIES: dict[str, Callable[..., Policy]] = {
    "cs-ucb": CSUCB,
    "cs-ts-beta": CSTSBeta,
    "cs-ts-gauss": CSTSGauss,
    "cs-etc": CSETC,
    "cs-etc-uc": CSETCUnknownCost,
    "oracle-istar": OracleIStar,
    "oracle-mstar": OracleMStar,
    "round-robin": RoundRobin,
    "fixed-arm": FixedArm,
}

_PARAMS = {
    "cs-ucb": set(),
    "cs-ts-beta": {"binarize"},
    "cs-ts-gauss": {"sigma0_sq", "sigman_sq"},
    "cs-etc": {"tau"},
    "cs-etc-uc": {"tau"},
    "oracle-istar": set(),
    "oracle-mstar": set(),
    "round-robin": set(),
    "fixed-arm": {"arm"},
}


@dataclass(frozen=True)
class PolicySpec:
    """A policy identifier plus its parameters, as named in configs."""

    name: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in POLICIES:
            raise ConfigurationError(
                f"unknown policy {self.name!r}; choose from {sorted(POLICIES)}"
            )
        unknown = set(self.params) - _PARAMS[self.name]
        if unknown:
            raise ConfigurationError(f"policy {self.name!r} got unknown params {sorted(unknown)}")

    @classmethod
    def parse(cls, obj: "str | Mapping[str, Any] | PolicySpec") -> "PolicySpec":
        if isinstance(obj, PolicySpec):
            return obj
        if isinstance(obj, str):
            return cls(obj)
        extra = set(obj) - {"name", "params"}
        if extra:
            raise ConfigurationError(f"unknown policy keys {sorted(extra)}")
        if "name" not in obj:
            raise ConfigurationError("policy entry needs a 'name'")
        return cls(obj["name"], dict(obj.get("params", {})))

    def to_json(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


def check_compatible(policy_cls, instance: Instance) -> None:
    needs = getattr(policy_cls, "random_costs", False)
    if needs is None:
        return
    if needs and not all(a.random_cost for a in instance.arms):
        raise ConfigurationError(
            f"{policy_cls.name} learns costs and needs random-cost arms; use cs-etc for known costs"
        )
    if not needs and instance.random_costs:
        raise ConfigurationError(
            f"{policy_cls.name} needs known costs but instance {instance.label!r} has random costs"
        )


def make_policy(
    spec: "PolicySpec | str | Mapping[str, Any]",
    instance: Instance,
    horizon: int,
    rng: np.random.Generator | None = None,
) -> Policy:
    spec = PolicySpec.parse(spec)
    cls = POLICIES[spec.name]
    check_compatible(cls, instance)
    return cls(instance, horizon, rng, **dict(spec.params))
