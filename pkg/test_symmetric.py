# -*- coding: utf-8 -*-
"""
Tests for Backend.symmetric: closed-form optimum against exhaustive search
"""

import math

import numpy as np
import pytest

from Backend.errors import InfeasibleServerCompute, NotLocallyComputableError, NotSymmetric
from Backend.hetero import brute_force_solve
from Backend.model import (
    Policy,
    ProjectionTask,
    Scenario,
    SystemConfig,
    average_rate,
    check_feasibility,
)
from Backend.symmetric import (
    Regime,
    canonical_policy,
    gain_decomposition,
    max_offload_count,
    min_average_rate,
    objective_at,
    optimal_offload_count,
    optimal_policy,
)
from conftest import WORKED_RATE, random_symmetric, worked_scenario, worked_task


# ============================================================
# Worked instance
# ============================================================

class TestWorkedInstance:

    def test_offload_count_and_regime(self, worked):
        assert max_offload_count(worked) == 2
        assert optimal_offload_count(worked) == (2, Regime.ENERGY_LIMITED_UNCACHED)

    def test_min_rate(self, worked):
        rate, regime = min_average_rate(worked)
        assert abs(rate - 77631579) <= 1.0
        assert rate == pytest.approx(WORKED_RATE, rel=1e-12)
        assert regime is Regime.ENERGY_LIMITED_UNCACHED

    def test_policy(self, worked):
        solution = optimal_policy(worked)
        assert solution.offload_count == 2
        assert solution.cache_count == 1
        assert solution.policy == Policy((1, 0, 0, 0), (1, 1, 0, 0))
        assert check_feasibility(worked, solution.policy).overall

    def test_gain_decomposition(self, worked):
        no_cache, with_cache = gain_decomposition(worked)
        r0 = 2e6 / 0.019
        assert no_cache == pytest.approx((r0 - 1e8) / 2)
        assert with_cache == pytest.approx(25e6)
        assert r0 - no_cache - with_cache == pytest.approx(WORKED_RATE, rel=1e-12)

    def test_zero_energy(self):
        scenario = worked_scenario(energy_budget=0.0)
        solution = optimal_policy(scenario)
        assert solution.offload_count == 0
        assert solution.min_rate == solution.server_rate
        assert solution.regime is Regime.ENERGY_LIMITED_CACHED

    def test_cache_beyond_viewpoints_is_clamped(self):
        scenario = worked_scenario(energy_budget=100.0, cache_count=9)
        solution = optimal_policy(scenario)
        assert solution.offload_count == 4
        assert solution.cache_count == 4
        assert solution.min_rate == 0.0

    def test_objective_at_matches_policy(self, worked):
        for d in range(worked.n + 1):
            policy = canonical_policy(worked.n, d, worked.cache_count)
            assert objective_at(worked, d) == pytest.approx(average_rate(worked, policy), rel=1e-12)


# ============================================================
# Edge cases
# ============================================================

class TestEdgeCases:

    def test_equal_floors_pick_cache_limited(self):
        # R0 = 1 / (1 - 1/2) = 2 = 1 / (1 - 1/2) = R1
        task = ProjectionTask(1.0, 1.0, 1.0, 1.0)
        config = SystemConfig(server_freq=2.0, device_freq=2.0, energy_coeff=0.25, energy_budget=0.75)
        scenario = Scenario.symmetric(task, 4, config, cache_count=1)
        assert max_offload_count(scenario) == 3
        d_star, regime = optimal_offload_count(scenario)
        assert regime is Regime.CACHE_LIMITED
        assert d_star == 1
        assert min_average_rate(scenario)[0] == pytest.approx(1.5)

    def test_device_faster_floor_than_server(self):
        # R1 > R0: offloading beyond the cache only hurts
        task = ProjectionTask(1e6, 1e6, 100.0, 0.02)
        config = SystemConfig(server_freq=1e11, device_freq=5.5e9, energy_coeff=1e-27, energy_budget=100.0)
        scenario = Scenario.symmetric(task, 5, config, cache_count=2)
        solution = optimal_policy(scenario)
        assert solution.regime is Regime.CACHE_LIMITED
        assert solution.offload_count == 2
        assert solution.min_rate == pytest.approx(solution.server_rate * 3 / 5)

    def test_heterogeneous_rejected(self):
        tasks = (ProjectionTask(1e6, 2e6, 100.0, 0.02, 0.5), ProjectionTask(2e6, 4e6, 50.0, 0.02, 0.5))
        scenario = Scenario(tasks, SystemConfig(1e11, 1e10, 1e-27, 5.0, 1e6))
        with pytest.raises(NotSymmetric):
            optimal_policy(scenario)

    def test_server_infeasible(self):
        task = ProjectionTask(1e6, 2e6, 100.0, 0.0005)
        scenario = Scenario.symmetric(task, 3, SystemConfig(1e11, 1e12, 1e-27, 5.0), cache_count=1)
        with pytest.raises(InfeasibleServerCompute):
            optimal_policy(scenario)

    def test_device_infeasible(self):
        scenario = Scenario.symmetric(worked_task(), 4, SystemConfig(1e11, 4e9, 1e-27, 5.0), cache_count=1)
        with pytest.raises(NotLocallyComputableError):
            optimal_policy(scenario)


# ============================================================
# Oracle equivalence
# ============================================================

class TestOracleEquivalence:

    def test_closed_form_matches_enumeration(self, rng):
        regimes = set()
        for _ in range(1000):
            scenario = random_symmetric(rng)
            solution = optimal_policy(scenario)
            oracle = brute_force_solve(scenario)
            regimes.add(solution.regime)

            assert math.isclose(solution.min_rate, oracle.objective,
                                rel_tol=1e-9, abs_tol=1e-9 * solution.server_rate)
            assert check_feasibility(scenario, solution.policy).overall
        assert regimes == set(Regime)

    def test_rate_not_increasing_in_resources(self, rng):
        for _ in range(100):
            scenario = random_symmetric(rng)
            base, _ = min_average_rate(scenario)
            richer = Scenario.symmetric(
                scenario.tasks[0], scenario.n,
                SystemConfig(scenario.config.server_freq, scenario.config.device_freq,
                             scenario.config.energy_coeff, scenario.config.energy_budget * 2),
                cache_count=min(scenario.cache_count + 1, scenario.n),
            )
            assert min_average_rate(richer)[0] <= base * (1 + 1e-12)

    def test_offload_count_minimizes_objective(self, rng):
        for _ in range(200):
            scenario = random_symmetric(rng)
            d_star, _ = optimal_offload_count(scenario)
            d_max = max_offload_count(scenario)
            values = np.array([objective_at(scenario, d) for d in range(d_max + 1)])
            assert objective_at(scenario, d_star) <= values.min() * (1 + 1e-12) + 1e-9
