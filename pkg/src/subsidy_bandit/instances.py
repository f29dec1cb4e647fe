"""Constructors for the problem instances used in the experiments and lower bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .core import (
    BERNOULLI,
    DETERMINISTIC,
    RANDOM_BERNOULLI,
    ArmSpec,
    Instance,
    make_instance,
)
from .exceptions import InvalidInstanceError, InvalidParametersError


@dataclass(frozen=True)
class PhiParams:
    """Parameters of the lower-bound family: one free arm and K unit-cost arms.

    ``a = 0`` is the base member; ``1 <= a <= K`` lifts arm ``a`` by ``epsilon``.
    """

    theta: float
    p: float
    epsilon: float
    K: int
    a: int = 0

    def __post_init__(self):
        if not 0.0 <= self.theta < 1.0:
            raise InvalidParametersError(f"theta={self.theta} outside [0, 1)")
        if not 0.0 < self.p <= 0.5:
            raise InvalidParametersError(f"p={self.p} outside (0, 1/2]")
        if not self.epsilon > 0.0:
            raise InvalidParametersError("epsilon must be positive")
        if self.K < 1:
            raise InvalidParametersError("K must be at least 1")
        if not 0 <= self.a <= self.K:
            raise InvalidParametersError(f"a={self.a} outside 0..{self.K}")
        if not (self.p + self.epsilon) / (1.0 - self.theta) < 1.0:
            raise InvalidParametersError("need (p + epsilon) / (1 - theta) < 1")

    @property
    def lemma_admissible(self) -> bool:
        """Whether epsilon <= p/2, as the KL bound requires."""
        return self.epsilon <= self.p / 2


def make_phi(params: PhiParams | None = None, **kwargs) -> Instance:
    """Member ``a`` of the family with subsidy bound to ``theta``."""
    if params is None:
        if "alpha" in kwargs:
            raise InvalidParametersError("the phi family's subsidy is fixed to theta")
        params = PhiParams(**kwargs)
    th, p, eps, k, a = params.theta, params.p, params.epsilon, params.K, params.a
    arms = [ArmSpec(p, 0.0)]
    for j in range(1, k + 1):
        mean = (p + eps) / (1.0 - th) if j == a else p / (1.0 - th)
        arms.append(ArmSpec(mean, 1.0))
    label = f"phi[theta={th:g},p={p:g},eps={eps:g},K={k},a={a}]"
    return Instance(tuple(arms), th, label)


def make_ts_hard(alpha: float, K: int, T: int, d: float) -> Instance:
    """Deterministic-reward instance for the Gaussian Thompson sampling hardness result.

    Arm 0 is free with mean ``(1 - alpha) q + d / sqrt(T)``; arms ``1..K-1``
    cost 1 with mean ``q = d / ((1 - alpha) sqrt(T))``.
    """
    if K < 1:
        raise InvalidParametersError("K must be at least 1")
    if T < 1:
        raise InvalidParametersError("T must be positive")
    if not 0.0 <= alpha < 1.0:
        raise InvalidParametersError(f"alpha={alpha} outside [0, 1)")
    root = math.sqrt(T)
    if not 0.0 < d < min(root / 2.0, (1.0 - alpha) * root):
        raise InvalidParametersError(
            f"d={d} must lie in (0, min(sqrt(T)/2, (1-alpha) sqrt(T)))"
        )
    q = d / ((1.0 - alpha) * root)
    arms = [ArmSpec((1.0 - alpha) * q + d / root, 0.0, DETERMINISTIC)]
    arms += [ArmSpec(q, 1.0, DETERMINISTIC) for _ in range(K - 1)]
    return Instance(tuple(arms), alpha, f"ts-hard[alpha={alpha:g},K={K},T={T},d={d:g}]")


def make_fig1_example(T: int, alpha: float = 0.1) -> Instance:
    """Two Bernoulli arms, free arm just above the tolerated reward."""
    if T < 1:
        raise InvalidParametersError("T must be positive")
    mu0 = 0.5 * (1.0 - alpha) + 1.0 / math.sqrt(T)
    if mu0 > 1.0:
        raise InvalidParametersError("free-arm mean exceeds 1")
    return make_instance([mu0, 0.5], [0.0, 1.0], alpha, f"fig1[T={T},alpha={alpha:g}]")


def make_table1(mu2: float) -> Instance:
    """Expensive arm with mean 0.5 against a free arm of mean ``mu2``; alpha = 0.1."""
    if not 0.0 <= mu2 <= 1.0:
        raise InvalidParametersError(f"mu2={mu2} outside [0, 1]")
    return make_instance([0.5, mu2], [1.0, 0.0], 0.1, f"table1[mu2={mu2:g}]")


def make_custom(
    means: Sequence[float],
    costs: Sequence[float],
    alpha: float,
    reward_model: str = BERNOULLI,
    label: str = "custom",
) -> Instance:
    try:
        return make_instance(means, costs, alpha, label, reward_model)
    except InvalidInstanceError as exc:
        raise InvalidParametersError(str(exc)) from exc


def with_random_costs(instance: Instance) -> Instance:
    """Same arms, but each cost becomes an unknown Bernoulli with that mean."""
    arms = tuple(
        ArmSpec(a.mean, a.cost, a.reward_model, RANDOM_BERNOULLI) for a in instance.arms
    )
    return Instance(arms, instance.alpha, instance.label + "[random-costs]")


def _phi_from_params(**params):
    return make_phi(**params)


CONSTRUCTORS = {
    "phi": _phi_from_params,
    "ts-hard": make_ts_hard,
    "fig1": make_fig1_example,
    "table1": make_table1,
    "custom": make_custom,
}


def build_instance(name: str, params: Mapping[str, Any], random_costs: bool = False) -> Instance:
    """Construct a named instance from a parameter map (config entry point)."""
    if name not in CONSTRUCTORS:
        raise InvalidParametersError(
            f"unknown instance {name!r}; choose from {sorted(CONSTRUCTORS)}"
        )
    try:
        inst = CONSTRUCTORS[name](**dict(params))
    except TypeError as exc:
        raise InvalidParametersError(f"bad parameters for {name!r}: {exc}") from exc
    return with_random_costs(inst) if random_costs else inst
