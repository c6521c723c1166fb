# -*- coding: utf-8 -*-
"""
System model - projection tasks, platform config, policies
Rate floors, objective evaluation and feasibility checks shared by every solver

Units: bits, cycles/bit, cycles/s, seconds, Joules. k is whatever makes
k * f1^2 * I * w come out in Joules.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Tuple, Union

import numpy as np

from .errors import (
    InfeasibleServerCompute,
    LengthMismatch,
    NotLocallyComputableError,
    ScenarioError,
)
from .logger import Logger

FEASIBILITY_RTOL = 1e-9
PROBABILITY_ATOL = 1e-9
STEREO_RATIO = 2.0


class _NotLocallyComputable:
    """Marker returned when the device cannot finish the projection before the deadline"""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NOT_LOCALLY_COMPUTABLE"

    def __bool__(self):
        return False


NOT_LOCALLY_COMPUTABLE = _NotLocallyComputable()
DeviceRate = Union[float, _NotLocallyComputable]


def within_budget(used: float, limit: float) -> bool:
    """used <= limit up to FEASIBILITY_RTOL relative slack"""
    return used <= limit + FEASIBILITY_RTOL * abs(limit)


def floor_count(x: float) -> int:
    """floor() that does not lose integers to rounding (4*5/10.000000000000002 -> 2)"""
    return int(math.floor(x + FEASIBILITY_RTOL * max(1.0, abs(x))))


@dataclass(frozen=True)
class ProjectionTask:
    """Per-viewpoint projection parameters (I, O, w, tau) and request probability P"""

    input_bits: float
    output_bits: float
    cycles_per_bit: float
    deadline: float
    probability: float = 1.0

    def __post_init__(self):
        for name in ("input_bits", "output_bits", "cycles_per_bit", "deadline"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ScenarioError(f"{name} must be a finite positive number, got {value!r}")
        if not (0.0 <= self.probability <= 1.0):
            raise ScenarioError(f"probability must lie in [0, 1], got {self.probability!r}")

    @property
    def cycles(self) -> float:
        """Total projection workload I*w"""
        return self.input_bits * self.cycles_per_bit

    @property
    def stereo_ratio_ok(self) -> bool:
        return self.output_bits / self.input_bits >= STEREO_RATIO

    def projection_key(self) -> Tuple[float, float, float, float]:
        return (self.input_bits, self.output_bits, self.cycles_per_bit, self.deadline)


@dataclass(frozen=True)
class SystemConfig:
    """Platform resources: f0, f1, k, energy budget per deadline period, cache size in bits"""

    server_freq: float
    device_freq: float
    energy_coeff: float
    energy_budget: float = 0.0
    cache_bits: float = 0.0

    def __post_init__(self):
        for name in ("server_freq", "device_freq", "energy_coeff"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ScenarioError(f"{name} must be a finite positive number, got {value!r}")
        for name in ("energy_budget", "cache_bits"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ScenarioError(f"{name} must be a finite non-negative number, got {value!r}")

    @property
    def energy_per_cycle(self) -> float:
        """k * f1^2"""
        return self.energy_coeff * self.device_freq ** 2


class ScenarioKind(str, Enum):
    SYMMETRIC = "symmetric"
    HETEROGENEOUS = "heterogeneous"


@dataclass(frozen=True)
class TaskArrays:
    """Column view of a scenario's tasks"""

    input_bits: np.ndarray
    output_bits: np.ndarray
    cycles_per_bit: np.ndarray
    deadline: np.ndarray
    probability: np.ndarray


@dataclass(frozen=True)
class Scenario:
    """A task set plus the platform it runs on"""

    tasks: Tuple[ProjectionTask, ...]
    config: SystemConfig
    kind: ScenarioKind = ScenarioKind.HETEROGENEOUS

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        n = len(self.tasks)
        if n < 1:
            raise ScenarioError("a scenario needs at least one viewpoint")

        total = math.fsum(t.probability for t in self.tasks)
        if abs(total - 1.0) > PROBABILITY_ATOL:
            raise ScenarioError(f"viewpoint probabilities must sum to 1, got {total!r}")

        if self.kind is ScenarioKind.SYMMETRIC:
            key = self.tasks[0].projection_key()
            for i, task in enumerate(self.tasks):
                if task.projection_key() != key:
                    raise ScenarioError(f"symmetric scenario: viewpoint {i} differs from viewpoint 0")
                if abs(task.probability - 1.0 / n) > PROBABILITY_ATOL:
                    raise ScenarioError(f"symmetric scenario: viewpoint {i} probability is not 1/N")

    @classmethod
    def symmetric(cls, task: ProjectionTask, n: int, config: SystemConfig,
                  cache_count: int = None) -> "Scenario":
        """
        Build a symmetric scenario of n identical viewpoints with P_i = 1/n

        Args:
            task: shared projection parameters (its probability is replaced)
            n: number of viewpoints
            config: platform; its cache_bits is replaced when cache_count is given
            cache_count: cache capacity C counted in 2D FOVs
        """
        if n < 1:
            raise ScenarioError(f"viewpoint count must be >= 1, got {n}")
        if cache_count is not None:
            if cache_count < 0:
                raise ScenarioError(f"cache_count must be >= 0, got {cache_count}")
            config = SystemConfig(
                server_freq=config.server_freq,
                device_freq=config.device_freq,
                energy_coeff=config.energy_coeff,
                energy_budget=config.energy_budget,
                cache_bits=cache_count * task.input_bits,
            )
        shared = ProjectionTask(task.input_bits, task.output_bits, task.cycles_per_bit,
                                task.deadline, 1.0 / n)
        return warn_low_stereo_ratio(cls(tasks=(shared,) * n, config=config, kind=ScenarioKind.SYMMETRIC))

    @property
    def n(self) -> int:
        return len(self.tasks)

    @property
    def is_symmetric(self) -> bool:
        return self.kind is ScenarioKind.SYMMETRIC

    @property
    def cache_count(self) -> int:
        """Symmetric cache capacity C = C' div I"""
        return floor_count(self.config.cache_bits / self.tasks[0].input_bits)

    @cached_property
    def arrays(self) -> TaskArrays:
        tasks = self.tasks
        return TaskArrays(
            input_bits=np.array([t.input_bits for t in tasks], dtype=float),
            output_bits=np.array([t.output_bits for t in tasks], dtype=float),
            cycles_per_bit=np.array([t.cycles_per_bit for t in tasks], dtype=float),
            deadline=np.array([t.deadline for t in tasks], dtype=float),
            probability=np.array([t.probability for t in tasks], dtype=float),
        )


def warn_low_stereo_ratio(scenario: Scenario) -> Scenario:
    """Log one warning for viewpoints with O/I < 2; called where scenarios are built or loaded"""
    low_ratio = sum(1 for t in scenario.tasks if not t.stereo_ratio_ok)
    if low_ratio:
        Logger.log(
            f"{low_ratio} of {scenario.n} viewpoints have O/I < {STEREO_RATIO:g} "
            "(stereo output is normally at least twice the input)",
            "WARNING",
        )
    return scenario


@dataclass(frozen=True)
class Policy:
    """Caching indicators c and offloading indicators d over viewpoints"""

    cache: Tuple[int, ...]
    offload: Tuple[int, ...]

    def __post_init__(self):
        cache = tuple(int(v) for v in self.cache)
        offload = tuple(int(v) for v in self.offload)
        if len(cache) != len(offload):
            raise LengthMismatch(f"cache has {len(cache)} entries, offload has {len(offload)}")
        if not set(cache) <= {0, 1} or not set(offload) <= {0, 1}:
            raise ScenarioError("policy indicators must be 0 or 1")
        object.__setattr__(self, "cache", cache)
        object.__setattr__(self, "offload", offload)

    @classmethod
    def from_arrays(cls, cache: np.ndarray, offload: np.ndarray) -> "Policy":
        return cls(tuple(np.asarray(cache, dtype=np.int8).tolist()),
                   tuple(np.asarray(offload, dtype=np.int8).tolist()))

    @classmethod
    def zeros(cls, n: int) -> "Policy":
        return cls((0,) * n, (0,) * n)

    def __len__(self):
        return len(self.cache)

    @property
    def cache_array(self) -> np.ndarray:
        return np.asarray(self.cache, dtype=bool)

    @property
    def offload_array(self) -> np.ndarray:
        return np.asarray(self.offload, dtype=bool)

    @property
    def is_normalized(self) -> bool:
        return all(c <= d for c, d in zip(self.cache, self.offload))


@dataclass(frozen=True)
class FeasibilityReport:
    cache_ok: bool
    cache_used: float
    cache_limit: float
    energy_ok: bool
    energy_used: float
    energy_limit: float
    per_viewpoint_latency_ok: Tuple[bool, ...] = field(repr=False)

    @property
    def latency_ok(self) -> bool:
        return all(self.per_viewpoint_latency_ok)

    @property
    def overall(self) -> bool:
        return self.cache_ok and self.energy_ok and self.latency_ok

    @property
    def cache_slack(self) -> float:
        return self.cache_limit - self.cache_used

    @property
    def energy_slack(self) -> float:
        return self.energy_limit - self.energy_used


@dataclass(frozen=True)
class RateFloors:
    """
    Vectorized R0/R1 tables

    server[i] is nan where tau_i <= I_i w_i / f0; device[i] is inf where
    tau_i <= I_i w_i / f1.
    """

    server: np.ndarray
    device: np.ndarray
    server_ok: np.ndarray
    local_ok: np.ndarray


# --- Rate floors ---

def server_rate_floor(task: ProjectionTask, f0: float) -> float:
    """R0 = O / (tau - Iw/f0)"""
    slack = task.deadline - task.cycles / f0
    if slack <= 0:
        raise InfeasibleServerCompute(
            f"server compute time Iw/f0={task.cycles / f0:.6g}s "
            f"does not fit the deadline tau={task.deadline:.6g}s"
        )
    return task.output_bits / slack


def device_rate_floor(task: ProjectionTask, f1: float) -> DeviceRate:
    """R1 = I / (tau - Iw/f1), or NOT_LOCALLY_COMPUTABLE when the device misses the deadline"""
    slack = task.deadline - task.cycles / f1
    if slack <= 0:
        return NOT_LOCALLY_COMPUTABLE
    return task.input_bits / slack


def min_device_frequency(task: ProjectionTask) -> float:
    """f_min = Iw / tau"""
    return task.cycles / task.deadline


def task_energy(task: ProjectionTask, config: SystemConfig) -> float:
    """Energy of one local projection, k f1^2 I w (Joules)"""
    return config.energy_per_cycle * task.cycles


def rate_floors(scenario: Scenario) -> RateFloors:
    arr = scenario.arrays
    cfg = scenario.config
    cycles = arr.input_bits * arr.cycles_per_bit
    server_slack = arr.deadline - cycles / cfg.server_freq
    device_slack = arr.deadline - cycles / cfg.device_freq
    server_ok = server_slack > 0
    local_ok = device_slack > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        server = np.where(server_ok, arr.output_bits / np.where(server_ok, server_slack, 1.0), np.nan)
        device = np.where(local_ok, arr.input_bits / np.where(local_ok, device_slack, 1.0), np.inf)
    return RateFloors(server=server, device=device, server_ok=server_ok, local_ok=local_ok)


def energy_weights(scenario: Scenario) -> np.ndarray:
    """Per-viewpoint expected energy P_i k f1^2 I_i w_i"""
    arr = scenario.arrays
    return arr.probability * scenario.config.energy_per_cycle * (arr.input_bits * arr.cycles_per_bit)


# --- Objective ---

def required_rate(task: ProjectionTask, c_i: int, d_i: int, f0: float, f1: float) -> float:
    """Tight latency rate R0(1-d) + R1(1-c)d"""
    if not d_i:
        return server_rate_floor(task, f0)
    if c_i:
        return 0.0
    r1 = device_rate_floor(task, f1)
    if r1 is NOT_LOCALLY_COMPUTABLE:
        raise NotLocallyComputableError(
            f"device compute time Iw/f1={task.cycles / f1:.6g}s "
            f"does not fit the deadline tau={task.deadline:.6g}s"
        )
    return r1


def _check_length(scenario: Scenario, policy: Policy):
    if len(policy) != scenario.n:
        raise LengthMismatch(f"policy covers {len(policy)} viewpoints, scenario has {scenario.n}")


def viewpoint_rates(scenario: Scenario, policy: Policy) -> np.ndarray:
    """Per-viewpoint required rates under the policy"""
    _check_length(scenario, policy)
    floors = rate_floors(scenario)
    c = policy.cache_array
    d = policy.offload_array

    bad_server = ~d & ~floors.server_ok
    if bad_server.any():
        i = int(np.argmax(bad_server))
        raise InfeasibleServerCompute(
            f"viewpoint {i} is served by the MEC server "
            "but tau <= Iw/f0", viewpoint=i)
    bad_local = d & ~c & ~floors.local_ok
    if bad_local.any():
        i = int(np.argmax(bad_local))
        raise NotLocallyComputableError(
            f"viewpoint {i} is computed on the device "
            "but tau <= Iw/f1", viewpoint=i)

    rates = np.zeros(scenario.n, dtype=float)
    rates[~d] = floors.server[~d]
    uncached = d & ~c
    rates[uncached] = floors.device[uncached]
    return rates


def average_rate(scenario: Scenario, policy: Policy) -> float:
    """sum_i P_i R_i"""
    rates = viewpoint_rates(scenario, policy)
    return math.fsum(scenario.arrays.probability * rates)


def check_feasibility(scenario: Scenario, policy: Policy) -> FeasibilityReport:
    """Cache (bits), energy (Joules) and per-viewpoint latency checks; never raises on infeasibility"""
    _check_length(scenario, policy)
    floors = rate_floors(scenario)
    c = policy.cache_array
    d = policy.offload_array

    cache_used = math.fsum(scenario.arrays.input_bits[c])
    energy_used = math.fsum(energy_weights(scenario)[d])
    latency = np.where(d, floors.local_ok, floors.server_ok)

    return FeasibilityReport(
        cache_ok=within_budget(cache_used, scenario.config.cache_bits),
        cache_used=cache_used,
        cache_limit=scenario.config.cache_bits,
        energy_ok=within_budget(energy_used, scenario.config.energy_budget),
        energy_used=energy_used,
        energy_limit=scenario.config.energy_budget,
        per_viewpoint_latency_ok=tuple(latency.tolist()),
    )


def normalize_policy(policy: Policy) -> Policy:
    """Drop cache entries of viewpoints computed at the server (c_i <= d_i)"""
    return Policy(tuple(c & d for c, d in zip(policy.cache, policy.offload)), policy.offload)


def closed_form_objective(scenario: Scenario, policy: Policy) -> float:
    """sum P R0 - sum P (R0 - R1) d - sum P R1 c d (needs every floor defined)"""
    _check_length(scenario, policy)
    floors = rate_floors(scenario)
    p = scenario.arrays.probability
    c = policy.cache_array.astype(float)
    d = policy.offload_array.astype(float)
    r0, r1 = floors.server, floors.device
    return float(np.sum(p * r0) - np.sum(p * (r0 - r1) * d) - np.sum(p * r1 * c * d))
