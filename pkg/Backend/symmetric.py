# -*- coding: utf-8 -*-
"""
Symmetric scenario - closed-form optimal joint caching and offloading
All viewpoints share (I, O, w, tau) and P_i = 1/N
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from .errors import NotLocallyComputableError, NotSymmetric, SolverConsistencyError
from .logger import Logger
from .model import (
    NOT_LOCALLY_COMPUTABLE,
    Policy,
    Scenario,
    average_rate,
    device_rate_floor,
    floor_count,
    server_rate_floor,
    task_energy,
)

CONSISTENCY_RTOL = 1e-9


class Regime(str, Enum):
    """Which case of the optimal offloading rule fired"""

    ENERGY_LIMITED_CACHED = "ENERGY_LIMITED_CACHED"
    ENERGY_LIMITED_UNCACHED = "ENERGY_LIMITED_UNCACHED"
    CACHE_LIMITED = "CACHE_LIMITED"


@dataclass(frozen=True)
class SymmetricSolution:
    offload_count: int
    cache_count: int
    policy: Policy
    min_rate: float
    regime: Regime
    gain_no_cache: float
    gain_with_cache: float
    server_rate: float
    device_rate: float
    max_offload: int
    cache_capacity: int

    @property
    def gain_fraction(self) -> float:
        """1 - R*/R0"""
        return 1.0 - self.min_rate / self.server_rate


def _require_symmetric(scenario: Scenario):
    if not scenario.is_symmetric:
        raise NotSymmetric("operation needs a symmetric scenario")


def _floors(scenario: Scenario) -> Tuple[float, float]:
    task = scenario.tasks[0]
    r0 = server_rate_floor(task, scenario.config.server_freq)
    r1 = device_rate_floor(task, scenario.config.device_freq)
    if r1 is NOT_LOCALLY_COMPUTABLE:
        raise NotLocallyComputableError(
            f"f1={scenario.config.device_freq:.6g} does not exceed "
            f"f_min={task.cycles / task.deadline:.6g}"
        )
    return r0, r1


def _cache_capacity(scenario: Scenario) -> int:
    return min(scenario.cache_count, scenario.n)


def max_offload_count(scenario: Scenario) -> int:
    """d_max = floor(N E / (k f1^2 I w)) clamped to [0, N]"""
    _require_symmetric(scenario)
    energy = task_energy(scenario.tasks[0], scenario.config)
    d_max = floor_count(scenario.n * scenario.config.energy_budget / energy)
    return max(0, min(d_max, scenario.n))


def optimal_offload_count(scenario: Scenario) -> Tuple[int, Regime]:
    """
    Optimal number of locally computed projections

    d* = d_max if d_max <= C; d_max if R0 > R1; C otherwise. At R0 == R1
    the last case wins: same rate, less energy.
    """
    _require_symmetric(scenario)
    r0, r1 = _floors(scenario)
    d_max = max_offload_count(scenario)
    cache = _cache_capacity(scenario)
    if d_max <= cache:
        return d_max, Regime.ENERGY_LIMITED_CACHED
    if r0 > r1:
        return d_max, Regime.ENERGY_LIMITED_UNCACHED
    return cache, Regime.CACHE_LIMITED


def min_average_rate(scenario: Scenario) -> Tuple[float, Regime]:
    """
    Minimum average rate R* by case, with the energy fraction replaced by d_max/N
    so that R* always belongs to an achievable policy
    """
    _require_symmetric(scenario)
    r0, r1 = _floors(scenario)
    n = scenario.n
    d_max = max_offload_count(scenario)
    cache = _cache_capacity(scenario)
    _, regime = optimal_offload_count(scenario)

    if regime is Regime.ENERGY_LIMITED_CACHED:
        rate = r0 * (1.0 - d_max / n)
    elif regime is Regime.ENERGY_LIMITED_UNCACHED:
        rate = r0 - (r0 - r1) * (d_max / n) - r1 * cache / n
    else:
        rate = r0 * (1.0 - cache / n)
    return rate, regime


def gain_decomposition(scenario: Scenario) -> Tuple[float, float]:
    """(gain of local computing without caching, gain of local computing with caching)"""
    _require_symmetric(scenario)
    r0, r1 = _floors(scenario)
    n = scenario.n
    d_star, _ = optimal_offload_count(scenario)
    cache = _cache_capacity(scenario)
    return (r0 - r1) / n * d_star, r1 / n * min(d_star, cache)


def objective_at(scenario: Scenario, offload_count: int) -> float:
    """f(d, c*) = R0 - (R0 - R1) d/N - R1 min(d, C)/N"""
    _require_symmetric(scenario)
    r0, r1 = _floors(scenario)
    n = scenario.n
    cache = _cache_capacity(scenario)
    return r0 - (r0 - r1) * offload_count / n - r1 * min(offload_count, cache) / n


def canonical_policy(n: int, offload_count: int, cache_count: int) -> Policy:
    """d_i = 1 for the first d viewpoints, c_i = 1 for the first min(C, d)"""
    cached = min(cache_count, offload_count)
    offload = (1,) * offload_count + (0,) * (n - offload_count)
    cache = (1,) * cached + (0,) * (n - cached)
    return Policy(cache, offload)


def optimal_policy(scenario: Scenario) -> SymmetricSolution:
    """Optimal policy in the canonical layout, checked against the evaluated objective"""
    _require_symmetric(scenario)
    r0, r1 = _floors(scenario)
    n = scenario.n
    d_max = max_offload_count(scenario)
    cache = _cache_capacity(scenario)
    d_star, regime = optimal_offload_count(scenario)
    rate, _ = min_average_rate(scenario)
    gain_no_cache, gain_with_cache = gain_decomposition(scenario)

    policy = canonical_policy(n, d_star, cache)
    evaluated = average_rate(scenario, policy)
    if not math.isclose(evaluated, rate, rel_tol=CONSISTENCY_RTOL, abs_tol=CONSISTENCY_RTOL * r0):
        Logger.log(f"Closed-form R*={rate!r} disagrees with policy rate {evaluated!r}", "ERROR")
        raise SolverConsistencyError(
            f"closed-form R*={rate!r} differs from the emitted policy's rate {evaluated!r}"
        )

    Logger.log(
        f"Symmetric optimum: N={n}, d*={d_star}, c*={min(cache, d_star)}, "
        f"R*={rate:.9g} bit/s, regime={regime.value}",
        "SYMMETRIC",
    )
    return SymmetricSolution(
        offload_count=d_star,
        cache_count=min(cache, d_star),
        policy=policy,
        min_rate=rate,
        regime=regime,
        gain_no_cache=gain_no_cache,
        gain_with_cache=gain_with_cache,
        server_rate=r0,
        device_rate=r1,
        max_offload=d_max,
        cache_capacity=cache,
    )
