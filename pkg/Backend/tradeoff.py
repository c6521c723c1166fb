# -*- coding: utf-8 -*-
"""
Trade-off analysis - sweeps of R* over cache, energy and device frequency,
minimum sufficient cache size, optimal device frequency without caching and
f1 regime classification
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from . import settings
from .errors import DomainError, EmptyGrid, NotLocallyComputableError, NotSymmetric, ScenarioError
from .hetero import greedy_solve
from .logger import Logger
from .model import (
    NOT_LOCALLY_COMPUTABLE,
    ProjectionTask,
    Scenario,
    device_rate_floor,
    energy_weights,
    floor_count,
    min_device_frequency,
    rate_floors,
    server_rate_floor,
    task_energy,
    within_budget,
)
from .symmetric import Regime, max_offload_count, optimal_offload_count, optimal_policy

F1_POLE_MARGIN = 1e-6
NOT_LOCALLY_COMPUTABLE_LABEL = "NOT_LOCALLY_COMPUTABLE"


class SweepAxis(str, Enum):
    CACHE_FRACTION = "cache-fraction"
    ENERGY_FRACTION = "energy-fraction"
    DEVICE_FREQ = "device-freq"
    ENERGY = "energy"


class F1Regime(str, Enum):
    MONOTONE_INCREASING = "MONOTONE_INCREASING"
    UNIMODAL = "UNIMODAL"
    FLAT_THEN_CACHE_LIMITED = "FLAT_THEN_CACHE_LIMITED"


@dataclass(frozen=True)
class SweepSpec:
    axis: SweepAxis
    grid: Tuple[float, ...]
    base: Scenario
    relaxed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "axis", SweepAxis(self.axis))
        grid = tuple(float(x) for x in self.grid)
        object.__setattr__(self, "grid", grid)
        _validate_grid(self.axis, grid)
        if not self.base.is_symmetric:
            raise NotSymmetric("SweepSpec needs a symmetric base scenario; use sweep_heterogeneous")


@dataclass(frozen=True)
class TradeoffPoint:
    axis_value: float
    min_rate: float
    regime: Optional[Regime]
    gain_fraction: float
    offload_count: int = 0
    cache_count: int = 0
    energy_used: float = 0.0
    cache_used: float = 0.0
    locally_computable: bool = True
    label: str = ""

    @property
    def regime_label(self) -> str:
        if self.label:
            return self.label
        if not self.locally_computable:
            return NOT_LOCALLY_COMPUTABLE_LABEL
        return self.regime.value if self.regime else ""


def _validate_grid(axis: SweepAxis, grid: Sequence[float]):
    if not grid:
        raise EmptyGrid("sweep grid has no points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ScenarioError("sweep grid must be strictly increasing")
    if any(not math.isfinite(x) for x in grid):
        raise ScenarioError("sweep grid values must be finite")
    if axis is SweepAxis.DEVICE_FREQ:
        if grid[0] <= 0:
            raise ScenarioError("device frequency grid must be positive")
    elif grid[0] < 0:
        raise ScenarioError(f"{axis.value} grid must be non-negative")


def _with_config(scenario: Scenario, **changes) -> Scenario:
    return replace(scenario, config=replace(scenario.config, **changes))


def apply_axis(scenario: Scenario, axis: SweepAxis, value: float) -> Scenario:
    """
    Scenario with one resource set from a sweep value

    CACHE_FRACTION sets C' to value * sum I_i (C = floor(value N) FOVs when
    symmetric); ENERGY_FRACTION sets E to value * sum P_i k f1^2 I_i w_i, which
    is E/(k f1^2 I w) when symmetric.
    """
    axis = SweepAxis(axis)
    if axis is SweepAxis.CACHE_FRACTION:
        if scenario.is_symmetric:
            count = floor_count(value * scenario.n)
            return _with_config(scenario, cache_bits=count * scenario.tasks[0].input_bits)
        return _with_config(scenario, cache_bits=value * math.fsum(scenario.arrays.input_bits))
    if axis is SweepAxis.ENERGY_FRACTION:
        if scenario.is_symmetric:
            return _with_config(scenario, energy_budget=value * task_energy(scenario.tasks[0], scenario.config))
        return _with_config(scenario, energy_budget=value * math.fsum(energy_weights(scenario)))
    if axis is SweepAxis.DEVICE_FREQ:
        return _with_config(scenario, device_freq=value)
    return _with_config(scenario, energy_budget=value)


def continuous_min_rate(scenario: Scenario) -> Tuple[float, Regime]:
    """
    R* on the continuous relaxation: the energy fraction E/(k f1^2 I w) is not
    floored (capped at 1) and the case test compares N E/(k f1^2 I w) with C
    """
    if not scenario.is_symmetric:
        raise NotSymmetric("continuous_min_rate needs a symmetric scenario")
    task = scenario.tasks[0]
    cfg = scenario.config
    r0 = server_rate_floor(task, cfg.server_freq)
    r1 = device_rate_floor(task, cfg.device_freq)
    n = scenario.n
    cache = min(scenario.cache_count, n)
    if r1 is NOT_LOCALLY_COMPUTABLE:
        return r0, None
    fraction = min(cfg.energy_budget / task_energy(task, cfg), 1.0)
    if n * fraction <= cache:
        return r0 * (1.0 - fraction), Regime.ENERGY_LIMITED_CACHED
    if r0 > r1:
        return r0 - (r0 - r1) * fraction - r1 * cache / n, Regime.ENERGY_LIMITED_UNCACHED
    return r0 * (1.0 - cache / n), Regime.CACHE_LIMITED


def _evaluate_point(spec: SweepSpec, value: float) -> TradeoffPoint:
    scenario = apply_axis(spec.base, spec.axis, value)
    task = scenario.tasks[0]
    r0 = server_rate_floor(task, scenario.config.server_freq)

    f_min = min_device_frequency(task)
    if scenario.config.device_freq <= f_min * (1.0 + F1_POLE_MARGIN):
        # no local projection possible: everything served by the MEC server
        return TradeoffPoint(axis_value=value, min_rate=r0, regime=None, gain_fraction=0.0,
                             locally_computable=False)

    if spec.relaxed:
        rate, regime = continuous_min_rate(scenario)
        energy = task_energy(task, scenario.config)
        fraction = min(scenario.config.energy_budget / energy, 1.0)
        return TradeoffPoint(axis_value=value, min_rate=rate, regime=regime,
                             gain_fraction=_gain_fraction(rate, r0),
                             energy_used=fraction * energy)

    solution = optimal_policy(scenario)
    energy_used = solution.offload_count * task_energy(task, scenario.config) / scenario.n
    return TradeoffPoint(
        axis_value=value,
        min_rate=solution.min_rate,
        regime=solution.regime,
        gain_fraction=_gain_fraction(solution.min_rate, r0),
        offload_count=solution.offload_count,
        cache_count=solution.cache_count,
        energy_used=energy_used,
        cache_used=solution.cache_count * task.input_bits,
    )


def _gain_fraction(rate: float, baseline: float) -> float:
    return min(1.0, max(0.0, 1.0 - rate / baseline))


def _run_ordered(fn, values: Sequence[float], workers: Optional[int]) -> List[TradeoffPoint]:
    workers = settings.sweep_workers() if workers is None else max(1, workers)
    if workers > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map keeps grid order whatever the completion order
            return list(pool.map(fn, values))
    return [fn(v) for v in values]


def sweep(spec: SweepSpec, workers: Optional[int] = None) -> List[TradeoffPoint]:
    """One TradeoffPoint per grid point, in grid order"""
    Logger.log_solver_call("sweep", {
        "axis": spec.axis.value, "points": len(spec.grid), "relaxed": spec.relaxed,
    })
    points = _run_ordered(lambda v: _evaluate_point(spec, v), spec.grid, workers)
    Logger.log(f"Sweep over {spec.axis.value}: {len(points)} points", "TRADEOFF")
    return points


def surface(spec: SweepSpec, outer_axis: SweepAxis, outer_grid: Sequence[float],
            workers: Optional[int] = None) -> List[Tuple[float, TradeoffPoint]]:
    """Two-axis grid: for each outer value, a sweep of spec.axis on the adjusted base"""
    outer_axis = SweepAxis(outer_axis)
    outer_grid = tuple(float(x) for x in outer_grid)
    _validate_grid(outer_axis, outer_grid)
    rows = []
    for outer in outer_grid:
        inner = replace(spec, base=apply_axis(spec.base, outer_axis, outer))
        rows.extend((outer, point) for point in sweep(inner, workers))
    return rows


def sweep_heterogeneous(scenario: Scenario, axis: SweepAxis, grid: Sequence[float],
                        workers: Optional[int] = None) -> List[TradeoffPoint]:
    """GA evaluated at every grid point; gain is measured against sum P_i R0_i"""
    axis = SweepAxis(axis)
    grid = tuple(float(x) for x in grid)
    _validate_grid(axis, grid)
    Logger.log_solver_call("sweep_heterogeneous", {"axis": axis.value, "points": len(grid)})

    def evaluate(value: float) -> TradeoffPoint:
        point_scenario = apply_axis(scenario, axis, value)
        baseline = math.fsum(point_scenario.arrays.probability * rate_floors(point_scenario).server)
        result = greedy_solve(point_scenario)
        return TradeoffPoint(
            axis_value=value,
            min_rate=result.objective,
            regime=None,
            gain_fraction=_gain_fraction(result.objective, baseline),
            offload_count=result.offloaded,
            cache_count=result.cached,
            energy_used=result.diagnostics.energy_used,
            cache_used=result.diagnostics.cache_used,
            label=result.method.value,
        )

    return _run_ordered(evaluate, grid, workers)


def surface_heterogeneous(scenario: Scenario, axis: SweepAxis, grid: Sequence[float],
                          outer_axis: SweepAxis, outer_grid: Sequence[float],
                          workers: Optional[int] = None) -> List[Tuple[float, TradeoffPoint]]:
    """sweep_heterogeneous repeated for every value of a second axis"""
    outer_axis = SweepAxis(outer_axis)
    outer_grid = tuple(float(x) for x in outer_grid)
    _validate_grid(outer_axis, outer_grid)
    rows = []
    for outer in outer_grid:
        points = sweep_heterogeneous(apply_axis(scenario, outer_axis, outer), axis, grid, workers)
        rows.extend((outer, point) for point in points)
    return rows


def min_cache_size(scenario: Scenario) -> int:
    """C* = floor(N E / (k f1^2 I w)) clamped to [0, N]; R* is flat for C >= C*"""
    optimal_offload_count(scenario)  # validates the floors
    return max_offload_count(scenario)


def stationary_device_frequency(a: float, f_r: float, f_min: float) -> float:
    """a f_R + sqrt(a^2 f_R^2 - f_min f_R); a vanishing discriminant leaves a f_R"""
    linear = a * f_r
    discriminant = linear ** 2 - f_min * f_r
    if discriminant < 0:
        if discriminant < -1e-12 * linear ** 2:
            raise DomainError("discriminant", f"negative discriminant {discriminant:.6g}")
        discriminant = 0.0
    return linear + math.sqrt(discriminant)


def optimal_f1_no_cache(task: ProjectionTask, f0: float) -> float:
    """
    Device frequency minimizing R* when C = 0

    f1* = a f_R + sqrt(a^2 f_R^2 - (Iw/tau) f_R), a = 1 - I/(4 R0 tau),
    f_R = Iw / (tau - I/R0)
    """
    r0 = server_rate_floor(task, f0)
    tau = task.deadline
    slack = tau - task.input_bits / r0
    if slack <= 0:
        raise DomainError("f_R", "tau must exceed I/R0 (needs O > I with server slack)")
    f_r = task.cycles / slack
    a = 1.0 - task.input_bits / (4.0 * r0 * tau)
    f_min = min_device_frequency(task)
    f1 = stationary_device_frequency(a, f_r, f_min)
    if not f1 > f_min:
        raise DomainError("f1*", f"f1*={f1:.6g} does not exceed f_min={f_min:.6g}")
    return f1


def numeric_optimal_f1(task: ProjectionTask, f0: float, points: int = 20001) -> float:
    """
    Dense geometric grid search refined by bounded scalar minimization

    Minimizes the continuous C = 0 rate. Any positive E/k only scales the
    offloading gain (R0 - R1)/f1^2, so the gain is maximized directly to keep
    R0 from swamping it numerically.
    """
    f_min = min_device_frequency(task)
    r0 = server_rate_floor(task, f0)
    slack = task.deadline - task.input_bits / r0
    upper = 20.0 * (task.cycles / slack if slack > 0 else f_min)
    upper = max(upper, 100.0 * f_min)

    def loss(f: float) -> float:
        r1 = device_rate_floor(task, f)
        if r1 is NOT_LOCALLY_COMPUTABLE:
            return math.inf
        return -(r0 - r1) * (f_min / f) ** 2

    grid = np.geomspace(f_min * (1.0 + F1_POLE_MARGIN), upper, points)
    values = np.array([loss(f) for f in grid])
    i = int(np.argmin(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, points - 1)]
    refined = minimize_scalar(loss, bounds=(lo, hi), method="bounded",
                              options={"xatol": lo * 1e-10})
    if refined.success and refined.fun <= values[i]:
        return float(refined.x)
    return float(grid[i])


def classify_f1_regime(scenario: Scenario) -> F1Regime:
    """
    How R* moves with f1 around the scenario's current f1

    Compares the unfloored, unclamped N E / (k f1^2 I w) with C: a budget
    worth 1.5 projections against one cache slot is already past the edge.
    """
    if not scenario.is_symmetric:
        raise NotSymmetric("classify_f1_regime needs a symmetric scenario")
    task = scenario.tasks[0]
    cfg = scenario.config
    r0 = server_rate_floor(task, cfg.server_freq)
    r1 = device_rate_floor(task, cfg.device_freq)
    if r1 is NOT_LOCALLY_COMPUTABLE:
        raise NotLocallyComputableError(
            f"f1={cfg.device_freq:.6g} does not exceed f_min={min_device_frequency(task):.6g}"
        )
    affordable = scenario.n * cfg.energy_budget / task_energy(task, cfg)
    if within_budget(affordable, min(scenario.cache_count, scenario.n)):
        return F1Regime.MONOTONE_INCREASING
    if r0 > r1:
        return F1Regime.UNIMODAL
    return F1Regime.FLAT_THEN_CACHE_LIMITED


def direction_changes(values: Sequence[float], tol: float = 0.0) -> List[str]:
    """
    Sign changes of the first difference, ignoring steps within tol

    Returns a list such as ["-+"] for a single descent-then-ascent.
    """
    signs = []
    for a, b in zip(values, values[1:]):
        step = b - a
        if abs(step) <= tol:
            continue
        sign = "+" if step > 0 else "-"
        if not signs or signs[-1] != sign:
            signs.append(sign)
    return [signs[i] + signs[i + 1] for i in range(len(signs) - 1)]
