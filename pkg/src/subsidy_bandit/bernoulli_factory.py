"""Exact linear Bernoulli factory and the subsidy-removing reduction built on it.

Factory
-------
Given a coin with unknown bias ``r`` and a constant ``C > 1`` with
``C * r <= 1 - delta``, :func:`factory_sample` returns an exact Ber(C r) bit.

The sampler is a skip-free random walk on ``i >= 0`` started at ``i = 1``.
Each step flips the coin once:

* heads:  ``i -> i - 1``
* tails:  ``i -> i - 1 + G``  with ``G ~ Geometric((C - 1)/C)`` on ``{1, 2, ...}``

From state ``i`` the walk reaches 0 with probability ``(C r)^i``; reaching 0
outputs 1.  Because the walk drifts upwards when ``C r < 1``, it is cut at a
level ``k``: from state ``i >= k`` the remaining success probability
``(C r)^i`` is rewritten as ``g^{-i} * (g C r)^i`` with ``g = 1 + delta/2``.
A known-probability ``g^{-i}`` thinning either outputs 0 or continues the walk
with ``C <- g C`` and ``delta <- 1 - (1 - delta) g``, which keeps
``g C r <= 1 - delta'``.  Every branch preserves the exact output law.

Reduction
---------
:func:`derived_pi0` runs a policy designed for subsidy ``alpha`` against an
environment with subsidy 0: pulls of the free arm 0 pass straight through;
any other arm is sampled repeatedly and the factory with ``C = 1/(1 - alpha)``
turns those pulls into one reward for the inner policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Instance, PullRecord, RegretLedger, draw_cost, draw_reward
from .exceptions import ConfigurationError, FactoryExhaustedError, ProtocolError

# Cut level is ceil(LEVEL_SCALE / delta); continuation then has probability ~exp(-2.3).
LEVEL_SCALE = 4.6


@dataclass(frozen=True)
class FactoryConfig:
    C: float
    delta: float = 0.5

    def __post_init__(self):
        if not self.C > 1.0:
            raise ConfigurationError(f"scale factor C={self.C} must exceed 1")
        if not 0.0 < self.delta < 1.0:
            raise ConfigurationError(f"delta={self.delta} outside (0, 1)")

    @property
    def flip_bound(self) -> float:
        """Bound on expected coin flips for admissible biases, 9.5 C / delta."""
        return 9.5 * self.C / self.delta

    def admissible(self, r: float) -> bool:
        return 0.0 <= r <= (1.0 - self.delta) / self.C


def factory_sample(
    config: FactoryConfig,
    coin: Callable[[], float],
    rng: np.random.Generator,
) -> tuple[int, int]:
    """Draw one Ber(C r) bit from a Ber(r) ``coin``; returns ``(bit, flips)``.

    ``coin`` may raise :class:`StopIteration` (finite tapes), which is reported
    as :class:`FactoryExhaustedError`.
    """
    C, delta = config.C, config.delta
    level = math.ceil(LEVEL_SCALE / delta)
    i = 1
    flips = 0
    while True:
        geo_p = (C - 1.0) / C
        while 0 < i < level:
            try:
                heads = coin()
            except StopIteration as exc:
                raise FactoryExhaustedError(f"coin exhausted after {flips} flips") from exc
            flips += 1
            if heads:
                i -= 1
            else:
                i += int(rng.geometric(geo_p)) - 1
        if i == 0:
            return 1, flips
        g = 1.0 + delta / 2.0
        if rng.random() >= g ** (-i):
            return 0, flips
        C *= g
        delta = 1.0 - (1.0 - delta) * g
        level = max(level, math.ceil(LEVEL_SCALE / delta))


def tape_coin(bits) -> Callable[[], float]:
    """Coin that replays a finite sequence of bits, then raises StopIteration."""
    it = iter(bits)
    return lambda: next(it)


@dataclass
class ReductionTranscript:
    """Record of one derived-policy run.

    ``inner_arms[l]``, ``synthesized[l]`` and ``consumed[l]`` describe inner
    round ``l + 1``; ``outer`` holds every real pull in order.
    """

    inner_arms: list[int] = field(default_factory=list)
    synthesized: list[float] = field(default_factory=list)
    consumed: list[int] = field(default_factory=list)
    outer: list[PullRecord] = field(default_factory=list)

    @property
    def L(self) -> int:
        return len(self.inner_arms)

    @property
    def T(self) -> int:
        return len(self.outer)

    def conserved(self) -> bool:
        """Sum of consumed pulls equals outer rounds; free-arm rounds consume one pull."""
        if sum(self.consumed) != self.T:
            return False
        t = 0
        for arm, s in zip(self.inner_arms, self.consumed):
            if arm == 0 and s != 1:
                return False
            if any(rec.arm != arm for rec in self.outer[t:t + s]):
                return False
            t += s
        return t == self.T


def derived_pi0(
    inner,
    environment: Instance,
    L: int,
    alpha: float,
    rng: np.random.Generator,
    delta: float = 0.5,
    env_rng: np.random.Generator | None = None,
) -> ReductionTranscript:
    """Run ``inner`` (a policy for subsidy ``alpha``) for ``L`` rounds on ``environment``.

    ``environment`` is the zero-subsidy instance whose arm 0 is the free arm.
    Real pulls draw from ``env_rng`` (default: ``rng``); the factory's own
    randomness draws from ``rng``.
    """
    if env_rng is None:
        env_rng = rng
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError("the reduction needs 0 < alpha < 1")
    config = FactoryConfig(1.0 / (1.0 - alpha), delta)
    inner_costs = inner.costs
    arms = environment.arms
    out = ReductionTranscript()
    t = 0
    for l in range(1, L + 1):
        choice = inner.select(l)
        if not 0 <= choice < len(arms):
            raise ProtocolError(f"inner policy asked for arm {choice} of {len(arms)}")
        spec = arms[choice]
        if choice == 0:
            t += 1
            reward = draw_reward(spec, env_rng)
            out.outer.append(PullRecord(t, 0, reward, draw_cost(spec, env_rng)))
            used = 1
        else:
            start = len(out.outer)

            def coin():
                nonlocal t
                t += 1
                r = draw_reward(spec, env_rng)
                out.outer.append(PullRecord(t, choice, r, draw_cost(spec, env_rng)))
                return r

            bit, used = factory_sample(config, coin, rng)
            assert len(out.outer) - start == used
            reward = float(bit)
        out.inner_arms.append(choice)
        out.synthesized.append(reward)
        out.consumed.append(used)
        inner.update(choice, reward, inner_costs[choice])
    return out


def transcript_regrets(
    transcript: ReductionTranscript,
    environment: Instance,
    inner_view: Instance,
    delta: float = 0.5,
) -> dict[str, float]:
    """Both sides of the regret-transfer relation for one transcript.

    Outer side: modified-quality plus cost regret of the real pulls on
    ``environment``.  Inner side: quality plus cost regret of the inner
    choices on ``inner_view``.  ``factor`` is 9.5 / (delta (1 - alpha)).
    """
    outer = RegretLedger()
    for rec in transcript.outer:
        outer.update(environment, rec)
    inner = RegretLedger()
    for l, arm in enumerate(transcript.inner_arms, start=1):
        inner.update(inner_view, PullRecord(l, arm, transcript.synthesized[l - 1],
                                            inner_view.costs[arm]))
    return {
        "outer_T": float(transcript.T),
        "inner_L": float(transcript.L),
        "outer_mod_quality": outer.cum_mod_quality,
        "outer_cost": outer.cum_cost,
        "inner_quality": inner.cum_quality,
        "inner_cost": inner.cum_cost,
        "factor": 9.5 / (delta * (1.0 - inner_view.alpha)),
    }
