# -*- coding: utf-8 -*-
"""
Heterogeneous scenario solvers
Greedy two-stage allocation (GA), mountain-climbing alternating knapsack (MCA),
exhaustive oracle and the Zipf scenario generator
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from . import settings
from .errors import (
    InfeasibleInitial,
    InfeasibleServerCompute,
    NotHeterogeneous,
    ScenarioError,
    SolverConsistencyError,
    TooLarge,
)
from .knapsack import KnapsackInstance, knapsack_max
from .logger import Logger
from .model import (
    FEASIBILITY_RTOL,
    FeasibilityReport,
    Policy,
    ProjectionTask,
    Scenario,
    ScenarioKind,
    SystemConfig,
    average_rate,
    check_feasibility,
    energy_weights,
    normalize_policy,
    rate_floors,
    viewpoint_rates,
    warn_low_stereo_ratio,
)

ORACLE_CHUNK = 1 << 15


class SolveMethod(str, Enum):
    GA = "GA"
    MCA = "MCA"
    ORACLE = "ORACLE"


@dataclass(frozen=True)
class HeteroSolveResult:
    policy: Policy
    objective: float
    method: SolveMethod
    iterations: int
    diagnostics: FeasibilityReport
    rates: Tuple[float, ...] = ()
    history: Tuple[float, ...] = ()

    @property
    def offloaded(self) -> int:
        return sum(self.policy.offload)

    @property
    def cached(self) -> int:
        return sum(self.policy.cache)


def _require_server_floors(scenario: Scenario):
    floors = rate_floors(scenario)
    if not floors.server_ok.all():
        i = int(np.argmin(floors.server_ok))
        raise InfeasibleServerCompute(
            f"viewpoint {i} cannot be served by the MEC server "
            "within its deadline (tau <= Iw/f0)", viewpoint=i)
    return floors


def _finish(scenario: Scenario, policy: Policy, method: SolveMethod,
            iterations: int = 0, history: Tuple[float, ...] = ()) -> HeteroSolveResult:
    policy = normalize_policy(policy)
    report = check_feasibility(scenario, policy)
    if not report.overall:
        Logger.log(f"{method.value} produced an infeasible policy: {report}", "ERROR")
        raise SolverConsistencyError(f"{method.value} produced an infeasible policy")
    rates = viewpoint_rates(scenario, policy)
    objective = math.fsum(scenario.arrays.probability * rates)
    return HeteroSolveResult(
        policy=policy,
        objective=objective,
        method=method,
        iterations=iterations,
        diagnostics=report,
        rates=tuple(rates.tolist()),
        history=history,
    )


def _prefix_count(cumulative: np.ndarray, limit: float) -> int:
    """Length of the longest prefix whose running total stays within the limit"""
    bound = limit + FEASIBILITY_RTOL * abs(limit)
    return int(np.searchsorted(cumulative, bound, side="right"))


def _descending_order(key: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Candidates sorted by key descending, ties by ascending index"""
    return candidates[np.lexsort((candidates, -key[candidates]))]


def greedy_solve(scenario: Scenario) -> HeteroSolveResult:
    """
    Greedy Algorithm (GA)

    Stage 1 sorts viewpoints by P_i R0_i / I_i, caches the prefix that fits C'
    and offloads the prefix that fits both C' and the energy budget. Stage 2
    (only when the energy prefix is longer than the cache prefix) offloads
    further viewpoints with R0_i > R1_i by (R0_i - R1_i) / (k I_i w_i f1^2)
    while the committed energy stays within the budget.
    """
    if scenario.kind is not ScenarioKind.HETEROGENEOUS:
        raise NotHeterogeneous("greedy_solve needs a heterogeneous scenario")
    Logger.log_solver_call("greedy_solve", {"viewpoints": scenario.n})

    floors = _require_server_floors(scenario)
    arr = scenario.arrays
    cfg = scenario.config
    n = scenario.n
    energy = energy_weights(scenario)

    # device-infeasible viewpoints take part in neither stage
    eligible = np.flatnonzero(floors.local_ok)

    # Stage 1: joint greedy allocation
    order = _descending_order(arr.probability * floors.server / arr.input_bits, eligible)
    cache_prefix = _prefix_count(np.cumsum(arr.input_bits[order]), cfg.cache_bits)
    energy_prefix = _prefix_count(np.cumsum(energy[order]), cfg.energy_budget)

    cache = np.zeros(n, dtype=bool)
    offload = np.zeros(n, dtype=bool)
    cache[order[:cache_prefix]] = True
    offload[order[:min(energy_prefix, cache_prefix)]] = True

    # Stage 2: additional offloading greedy allocation
    if energy_prefix > cache_prefix:
        committed = math.fsum(energy[offload])
        extra = np.flatnonzero(floors.local_ok & ~offload & (floors.server > floors.device))
        unit_energy = cfg.energy_per_cycle * arr.input_bits * arr.cycles_per_bit
        with np.errstate(invalid="ignore"):
            key = (floors.server - floors.device) / unit_energy
        extra = _descending_order(key, extra)
        count = _prefix_count(committed + np.cumsum(energy[extra]), cfg.energy_budget)
        offload[extra[:count]] = True

    result = _finish(scenario, Policy.from_arrays(cache, offload), SolveMethod.GA)
    Logger.log_solver_result("greedy_solve", {
        "objective": result.objective,
        "offloaded": result.offloaded,
        "cached": result.cached,
        "stage2": bool(energy_prefix > cache_prefix),
    })
    return result


def _gain(probability, r0, r1, cache, offload) -> float:
    """Local computing gain sum P (R0 - R1) d + sum P R1 c d"""
    d = offload.astype(float)
    c = cache.astype(float)
    return math.fsum(probability * ((r0 - r1) * d + r1 * c * d))


def mca_solve(scenario: Scenario, initial: Optional[Policy] = None,
              resolution: Optional[int] = None,
              max_iterations: Optional[int] = None) -> HeteroSolveResult:
    """
    Mountain-climbing local search for the bilinear knapsack form

    Alternates (a) the cache knapsack with d fixed and (b) the offload knapsack
    with c fixed. A step is only accepted when it raises the gain, so the
    objective never increases. Stops when an iteration improves by less than
    1e-12 relative or after max_iterations.

    Args:
        scenario: any scenario (symmetric ones are solved as general instances)
        initial: feasible starting policy, default greedy_solve's output
        resolution: knapsack grid size Q
        max_iterations: iteration cap
    """
    resolution = settings.knapsack_resolution() if resolution is None else resolution
    max_iterations = settings.mca_max_iterations() if max_iterations is None else max_iterations
    Logger.log_solver_call("mca_solve", {
        "viewpoints": scenario.n, "resolution": resolution, "max_iterations": max_iterations,
    })

    if initial is None:
        initial = greedy_solve(scenario).policy
    report = check_feasibility(scenario, initial)
    if not report.overall:
        raise InfeasibleInitial(
            f"initial policy is infeasible (cache_ok={report.cache_ok}, "
            f"energy_ok={report.energy_ok}, latency_ok={report.latency_ok})"
        )

    floors = _require_server_floors(scenario)
    arr = scenario.arrays
    cfg = scenario.config
    p = arr.probability
    r0 = floors.server
    r1 = np.where(floors.local_ok, floors.device, 0.0)
    energy = energy_weights(scenario)
    cache_weights = tuple(arr.input_bits.tolist())
    energy_tuple = tuple(energy.tolist())

    policy = normalize_policy(initial)
    cache = policy.cache_array
    offload = policy.offload_array
    gain = _gain(p, r0, r1, cache, offload)
    objective = average_rate(scenario, policy)
    history = [objective]
    iterations = 0

    while iterations < max_iterations:
        iterations += 1
        previous = gain

        # (a) fix d, choose c
        values = np.where(offload, p * r1, 0.0)
        picked = knapsack_max(KnapsackInstance(tuple(values.tolist()), cache_weights,
                                               cfg.cache_bits, resolution))
        candidate = np.asarray(picked.selection, dtype=bool) & offload
        candidate_gain = _gain(p, r0, r1, candidate, offload)
        if candidate_gain > gain:
            cache, gain = candidate, candidate_gain

        # (b) fix c, choose d; negative-value viewpoints are never offloaded
        values = np.where(floors.local_ok, np.maximum(p * (r0 - r1 + r1 * cache), 0.0), 0.0)
        picked = knapsack_max(KnapsackInstance(tuple(values.tolist()), energy_tuple,
                                               cfg.energy_budget, resolution))
        candidate = np.asarray(picked.selection, dtype=bool) & floors.local_ok
        candidate_gain = _gain(p, r0, r1, cache & candidate, candidate)
        if candidate_gain > gain:
            offload, gain = candidate, candidate_gain
            cache = cache & offload

        objective = average_rate(scenario, Policy.from_arrays(cache, offload))
        history.append(objective)
        if gain - previous <= 1e-12 * max(abs(previous), abs(objective), 1e-300):
            break

    result = _finish(scenario, Policy.from_arrays(cache, offload), SolveMethod.MCA,
                     iterations=iterations, history=tuple(history))
    Logger.log_solver_result("mca_solve", {
        "objective": result.objective, "iterations": iterations,
    })
    return result


def _lex_weights(n: int) -> np.ndarray:
    """Bit weights ranking (d, c) vectors lexicographically, d first"""
    return np.concatenate([2 ** np.arange(2 * n - 1, n - 1, -1), 2 ** np.arange(n - 1, -1, -1)])


def _oracle_chunk(start: int, stop: int, n: int, digits_base: np.ndarray, p_gain_d, p_gain_c,
                  energy, input_bits, local_ok, energy_budget, cache_bits, lex_weights):
    codes = np.arange(start, stop, dtype=np.int64)
    # state per viewpoint: 0 server, 1 local uncached, 2 local cached
    states = (codes[:, None] // digits_base[None, :]) % 3
    d = states >= 1
    c = states == 2

    feasible = ~(d & ~local_ok[None, :]).any(axis=1)
    feasible &= d @ energy <= energy_budget + FEASIBILITY_RTOL * abs(energy_budget)
    feasible &= c @ input_bits <= cache_bits + FEASIBILITY_RTOL * abs(cache_bits)
    if not feasible.any():
        return None

    gain = d @ p_gain_d + c @ p_gain_c
    gain = np.where(feasible, gain, -np.inf)
    best = gain.max()
    ties = np.flatnonzero(gain >= best - 1e-12 * abs(best))
    keys = np.concatenate([d[ties], c[ties]], axis=1).astype(np.int64) @ lex_weights
    pick = ties[int(np.argmin(keys))]
    return float(best), int(keys.min()), d[pick].copy(), c[pick].copy()


def brute_force_solve(scenario: Scenario, max_viewpoints: Optional[int] = None,
                      workers: int = 1) -> HeteroSolveResult:
    """
    Exact minimizer over all 3^N normalized policies

    Ties are broken by the lexicographically smallest (d, c). Enumeration is
    split into chunks; with workers > 1 chunks run on a thread pool and are
    reduced in chunk order.
    """
    cap = settings.oracle_max_viewpoints() if max_viewpoints is None else max_viewpoints
    n = scenario.n
    if n > cap:
        Logger.log_solver_status("brute_force_solve", "capped", f"N={n} > {cap}")
        raise TooLarge(f"oracle enumerates 3^N policies; N={n} exceeds the cap of {cap}")
    Logger.log_solver_call("brute_force_solve", {"viewpoints": n, "workers": workers})

    floors = _require_server_floors(scenario)
    p = scenario.arrays.probability
    r0 = floors.server
    r1 = np.where(floors.local_ok, floors.device, 0.0)
    args = dict(
        n=n,
        digits_base=3 ** np.arange(n - 1, -1, -1, dtype=np.int64),
        p_gain_d=p * (r0 - r1),
        p_gain_c=p * r1,
        energy=energy_weights(scenario),
        input_bits=scenario.arrays.input_bits,
        local_ok=floors.local_ok,
        energy_budget=scenario.config.energy_budget,
        cache_bits=scenario.config.cache_bits,
        lex_weights=_lex_weights(n),
    )
    total = 3 ** n
    bounds = [(s, min(s + ORACLE_CHUNK, total)) for s in range(0, total, ORACLE_CHUNK)]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(lambda b: _oracle_chunk(b[0], b[1], **args), bounds))
    else:
        partials = [_oracle_chunk(s, e, **args) for s, e in bounds]

    best = None
    for part in partials:
        if part is None:
            continue
        if best is None:
            best = part
            continue
        gain, key = part[0], part[1]
        scale = max(abs(gain), abs(best[0]))
        if gain > best[0] + 1e-12 * scale:
            best = part
        elif gain >= best[0] - 1e-12 * scale and key < best[1]:
            best = part

    # the all-server policy is always feasible, so best is set
    _, _, d, c = best
    result = _finish(scenario, Policy.from_arrays(c, d), SolveMethod.ORACLE)
    Logger.log_solver_result("brute_force_solve", {"objective": result.objective})
    return result


def _per_viewpoint(value: Union[float, Sequence[float]], n: int, name: str) -> np.ndarray:
    if np.isscalar(value):
        return np.full(n, float(value))
    values = np.asarray(value, dtype=float)
    if values.shape != (n,):
        raise ScenarioError(f"{name} override needs {n} entries, got {values.size}")
    return values


def zipf_probabilities(n: int, gamma: float) -> np.ndarray:
    """P_i = i^-gamma / sum_j j^-gamma"""
    weights = np.arange(1, n + 1, dtype=float) ** (-gamma)
    return weights / weights.sum()


def zipf_scenario(n: int, gamma: float, input_range: Tuple[float, float], output_ratio: float,
                  cycles_per_bit: Union[float, Sequence[float]],
                  deadline: Union[float, Sequence[float]],
                  config: SystemConfig, seed: int) -> Scenario:
    """
    Heterogeneous scenario with Zipf popularity and uniform input sizes

    Args:
        n: number of viewpoints
        gamma: Zipf exponent (0 gives uniform popularity)
        input_range: (min, max) 2D FOV size in bits
        output_ratio: O_i / I_i
        cycles_per_bit: w, shared or one value per viewpoint
        deadline: tau, shared or one value per viewpoint
        config: platform
        seed: RNG seed; the same seed gives the same scenario
    """
    lo, hi = float(input_range[0]), float(input_range[1])
    if n < 1:
        raise ScenarioError(f"viewpoint count must be >= 1, got {n}")
    if not gamma >= 0:
        raise ScenarioError(f"gamma must be >= 0, got {gamma}")
    if not (0 < lo <= hi and math.isfinite(hi)):
        raise ScenarioError(f"input range must satisfy 0 < min <= max, got ({lo}, {hi})")
    if not output_ratio > 0:
        raise ScenarioError(f"output ratio must be > 0, got {output_ratio}")

    rng = np.random.default_rng(seed)
    input_bits = rng.uniform(lo, hi, size=n)
    probability = zipf_probabilities(n, gamma)
    w = _per_viewpoint(cycles_per_bit, n, "cycles_per_bit")
    tau = _per_viewpoint(deadline, n, "deadline")

    tasks = tuple(
        ProjectionTask(i_bits, output_ratio * i_bits, w_i, tau_i, p_i)
        for i_bits, w_i, tau_i, p_i in zip(input_bits.tolist(), w.tolist(), tau.tolist(),
                                          probability.tolist())
    )
    Logger.log(f"Generated Zipf scenario: N={n}, gamma={gamma:g}, seed={seed}", "HETERO")
    return warn_low_stereo_ratio(Scenario(tasks=tasks, config=config, kind=ScenarioKind.HETEROGENEOUS))
