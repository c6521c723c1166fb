# -*- coding: utf-8 -*-
"""
Tests for Backend.tradeoff: sweeps, minimum cache size, optimal device frequency
"""

import numpy as np
import pytest

from Backend.errors import DomainError, EmptyGrid, NotSymmetric, ScenarioError
from Backend.hetero import zipf_scenario
from Backend.logger import Logger
from Backend.model import ProjectionTask, Scenario, SystemConfig, device_rate_floor, server_rate_floor
from Backend.symmetric import Regime, min_average_rate
from Backend.tradeoff import (
    F1Regime,
    SweepAxis,
    SweepSpec,
    apply_axis,
    classify_f1_regime,
    continuous_min_rate,
    direction_changes,
    min_cache_size,
    numeric_optimal_f1,
    optimal_f1_no_cache,
    stationary_device_frequency,
    surface,
    sweep,
    sweep_heterogeneous,
)
from conftest import random_heterogeneous, random_symmetric, worked_scenario, worked_task


def large_symmetric(cache_count: int = 0) -> Scenario:
    task = ProjectionTask(input_bits=25e6, output_bits=50e6, cycles_per_bit=1.0, deadline=0.02)
    config = SystemConfig(server_freq=1e11, device_freq=2.5e9, energy_coeff=1e-27)
    return Scenario.symmetric(task, 60_000, config, cache_count=cache_count)


def random_task(rng) -> ProjectionTask:
    return ProjectionTask(
        input_bits=float(rng.uniform(1e5, 5e6)),
        output_bits=float(rng.uniform(2.0, 4.0)) * 1e6,
        cycles_per_bit=float(rng.uniform(10.0, 200.0)),
        deadline=float(rng.uniform(0.01, 0.05)),
    )


# ============================================================
# Sweeps
# ============================================================

class TestSweep:

    def test_low_stereo_ratio_warned_once_per_sweep(self, monkeypatch):
        warnings = []
        monkeypatch.setattr(Logger, "log", classmethod(
            lambda cls, message, log_type="INFO": warnings.append(message) if log_type == "WARNING" else None))
        base = Scenario.symmetric(ProjectionTask(1e6, 1.5e6, 100.0, 0.02), 4,
                                  SystemConfig(1e11, 1e10, 1e-27, 5.0), cache_count=1)
        sweep(SweepSpec(SweepAxis.ENERGY_FRACTION, tuple(np.linspace(0.0, 1.0, 11)), base))
        assert len(warnings) == 1

    def test_energy_fraction_on_worked_instance(self):
        points = sweep(SweepSpec(SweepAxis.ENERGY_FRACTION, (0.0, 0.5, 1.0), worked_scenario()))
        r0 = 2e6 / 0.019
        assert [p.min_rate for p in points] == pytest.approx([r0, 77631578.94736842, 75e6], rel=1e-12)
        assert [p.regime for p in points] == [Regime.ENERGY_LIMITED_CACHED,
                                              Regime.ENERGY_LIMITED_UNCACHED,
                                              Regime.ENERGY_LIMITED_UNCACHED]
        assert [p.offload_count for p in points] == [0, 2, 4]
        assert points[1].energy_used == pytest.approx(5.0)

    def test_surface_corners(self):
        base = worked_scenario(cache_count=0)
        rows = surface(SweepSpec(SweepAxis.ENERGY_FRACTION, (0.0, 1.0), base),
                       SweepAxis.CACHE_FRACTION, (0.0, 1.0))
        corners = {(outer, p.axis_value): p for outer, p in rows}
        assert corners[(0.0, 0.0)].min_rate == pytest.approx(2e6 / 0.019)
        assert corners[(1.0, 1.0)].min_rate == 0.0
        assert corners[(1.0, 1.0)].gain_fraction == 1.0

    def test_device_freq_straddling_f_min(self):
        # f_min = 5e9
        grid = (3e9, 5e9, 6e9, 1e10)
        points = sweep(SweepSpec(SweepAxis.DEVICE_FREQ, grid, worked_scenario()))
        r0 = 2e6 / 0.019
        for p in points[:2]:
            assert not p.locally_computable
            assert p.regime_label == "NOT_LOCALLY_COMPUTABLE"
            assert p.min_rate == pytest.approx(r0, rel=1e-12)
            assert p.offload_count == 0
        assert all(p.locally_computable for p in points[2:])

    def test_workers_keep_order(self):
        spec = SweepSpec(SweepAxis.ENERGY, tuple(np.linspace(0.0, 20.0, 21)), worked_scenario())
        assert sweep(spec, workers=4) == sweep(spec, workers=1)

    def test_empty_grid(self):
        with pytest.raises(EmptyGrid):
            SweepSpec(SweepAxis.ENERGY, (), worked_scenario())

    def test_unsorted_grid(self):
        with pytest.raises(ScenarioError):
            SweepSpec(SweepAxis.ENERGY, (1.0, 0.5), worked_scenario())

    def test_heterogeneous_base_rejected(self):
        tasks = (ProjectionTask(1e6, 2e6, 100.0, 0.02, 0.5), ProjectionTask(2e6, 4e6, 50.0, 0.02, 0.5))
        scenario = Scenario(tasks, SystemConfig(1e11, 1e10, 1e-27, 5.0, 1e6))
        with pytest.raises(NotSymmetric):
            SweepSpec(SweepAxis.ENERGY, (1.0,), scenario)

    def test_apply_axis(self):
        base = worked_scenario()
        assert apply_axis(base, SweepAxis.CACHE_FRACTION, 0.5).cache_count == 2
        assert apply_axis(base, SweepAxis.ENERGY_FRACTION, 0.5).config.energy_budget == pytest.approx(5.0)
        assert apply_axis(base, SweepAxis.DEVICE_FREQ, 2e10).config.device_freq == 2e10
        assert apply_axis(base, SweepAxis.ENERGY, 3.0).config.energy_budget == 3.0


# ============================================================
# Published endpoints and structure
# ============================================================

class TestEndpoints:

    def test_full_cache_full_energy(self):
        point = sweep(SweepSpec(SweepAxis.ENERGY_FRACTION, (1.0,), large_symmetric(60_000)))[0]
        assert point.min_rate == 0.0
        assert point.gain_fraction == 1.0

    def test_no_cache_full_energy(self):
        scenario = large_symmetric(0)
        point = sweep(SweepSpec(SweepAxis.ENERGY_FRACTION, (1.0,), scenario))[0]
        task = scenario.tasks[0]
        r0 = server_rate_floor(task, 1e11)
        r1 = device_rate_floor(task, 2.5e9)
        assert point.gain_fraction == pytest.approx(1.0 - r1 / r0, abs=1e-9)

    def test_energy_slopes(self):
        r0 = 2e6 / 0.019
        e = 10.0

        cached = sweep(SweepSpec(SweepAxis.ENERGY, (0.5, 1.0, 1.5, 2.0), worked_scenario(), relaxed=True))
        slopes = np.diff([p.min_rate for p in cached]) / 0.5
        np.testing.assert_allclose(slopes, -r0 / e, rtol=1e-6)

        uncached = sweep(SweepSpec(SweepAxis.ENERGY, (3.0, 4.0, 5.0, 6.0), worked_scenario(), relaxed=True))
        slopes = np.diff([p.min_rate for p in uncached])
        np.testing.assert_allclose(slopes, -(r0 - 1e8) / e, rtol=1e-6)

        # R1 > R0 at f1 = 5.5e9: extra energy beyond C* buys nothing
        slow = Scenario.symmetric(worked_task(), 4, SystemConfig(1e11, 5.5e9, 1e-27), cache_count=1)
        flat = sweep(SweepSpec(SweepAxis.ENERGY, (1.0, 2.0, 3.0), slow, relaxed=True))
        assert all(p.regime is Regime.CACHE_LIMITED for p in flat)
        assert np.diff([p.min_rate for p in flat]).tolist() == [0.0, 0.0]

    def test_heterogeneous_gain_concave_in_cache(self):
        config = SystemConfig(server_freq=1e11, device_freq=2.5e9, energy_coeff=1e-27)
        scenario = zipf_scenario(2000, 0.8, (15e6, 25e6), 2.0, 1.0, 0.02, config, seed=11)
        scenario = apply_axis(scenario, SweepAxis.ENERGY_FRACTION, 1.0)
        points = sweep_heterogeneous(scenario, SweepAxis.CACHE_FRACTION, np.linspace(0.0, 1.0, 11))
        gains = np.array([p.gain_fraction for p in points])
        assert (np.diff(gains) >= -1e-12).all()
        assert (np.diff(gains, 2) <= 1e-9).all()
        assert all(p.regime_label == "GA" for p in points)


# ============================================================
# Minimum cache size
# ============================================================

class TestMinCacheSize:

    def test_worked_instance(self):
        assert min_cache_size(worked_scenario()) == 2

    def test_flat_beyond_threshold(self, rng):
        checked = 0
        for _ in range(100):
            base = random_symmetric(rng)
            c_star = min_cache_size(base)
            rates = [
                min_average_rate(Scenario.symmetric(base.tasks[0], base.n, base.config, cache_count=c))[0]
                for c in range(base.n + 1)
            ]
            assert len(set(rates[c_star:])) == 1
            assert all(b <= a for a, b in zip(rates, rates[1:]))
            if c_star >= 1:
                assert rates[c_star] < rates[c_star - 1]
                checked += 1
        assert checked > 0


# ============================================================
# Device frequency
# ============================================================

class TestDeviceFrequency:

    def test_closed_form_matches_numeric(self, rng):
        valid = 0
        while valid < 100:
            task = random_task(rng)
            f_min = task.cycles / task.deadline
            f0 = f_min * float(rng.uniform(2.0, 50.0))
            try:
                closed = optimal_f1_no_cache(task, f0)
            except DomainError:
                continue
            numeric = numeric_optimal_f1(task, f0)
            assert abs(closed - numeric) / closed <= 1e-3
            valid += 1

    def test_relaxed_sweep_is_unimodal(self):
        task = worked_task()
        f_min = 5e9
        energy = 0.5 * 1e-27 * f_min ** 2 * task.cycles
        base = Scenario.symmetric(task, 4, SystemConfig(1e11, 1e10, 1e-27, energy), cache_count=0)
        grid = tuple(np.geomspace(f_min * 1.001, f_min * 20, 2000))
        points = sweep(SweepSpec(SweepAxis.DEVICE_FREQ, grid, base, relaxed=True))
        unimodal = [p for p in points if p.regime is Regime.ENERGY_LIMITED_UNCACHED]
        rates = [p.min_rate for p in unimodal]
        r0 = server_rate_floor(task, 1e11)
        assert direction_changes(rates, tol=1e-9 * r0) == ["-+"]

        best = unimodal[int(np.argmin(rates))].axis_value
        assert best == pytest.approx(optimal_f1_no_cache(task, 1e11), rel=5e-3)

    def test_domain_error_when_output_small(self):
        task = ProjectionTask(1e6, 0.5e6, 100.0, 0.02)
        with pytest.raises(DomainError):
            optimal_f1_no_cache(task, 1e12)

    def test_worked_closed_form_value(self):
        f1 = optimal_f1_no_cache(worked_task(), 1e11)
        assert f1 == pytest.approx(1.31699905e10, rel=1e-6)
        assert f1 == pytest.approx(numeric_optimal_f1(worked_task(), 1e11), rel=1e-3)
        assert f1 > 5e9

    def test_zero_discriminant_leaves_linear_term(self):
        # (0.5 * 4e9)^2 == 1e9 * 4e9 exactly
        assert stationary_device_frequency(0.5, 4e9, 1e9) == 2e9
        assert stationary_device_frequency(0.5, 4e9, 1e9 * (1 + 1e-15)) == pytest.approx(2e9, rel=1e-12)
        with pytest.raises(DomainError):
            stationary_device_frequency(0.5, 4e9, 2e9)

    def test_classify(self):
        assert classify_f1_regime(worked_scenario()) is F1Regime.UNIMODAL
        assert classify_f1_regime(worked_scenario(cache_count=3)) is F1Regime.MONOTONE_INCREASING
        slow = Scenario.symmetric(worked_task(), 4, SystemConfig(1e11, 5.5e9, 1e-27, 100.0), cache_count=1)
        assert classify_f1_regime(slow) is F1Regime.FLAT_THEN_CACHE_LIMITED

    def test_classify_uses_unfloored_energy_ratio(self):
        # N E / e = 1.5 > C = 1 even though only one projection fits the budget
        assert classify_f1_regime(worked_scenario(energy_budget=3.75)) is F1Regime.UNIMODAL
        # ratio 40 is beyond N = C = 4
        assert classify_f1_regime(worked_scenario(energy_budget=100.0, cache_count=4)) is F1Regime.UNIMODAL
        assert classify_f1_regime(worked_scenario(energy_budget=2.5)) is F1Regime.MONOTONE_INCREASING
        slow = Scenario.symmetric(worked_task(), 4, SystemConfig(1e11, 5.5e9, 1e-27, 1.1344), cache_count=1)
        assert classify_f1_regime(slow) is F1Regime.FLAT_THEN_CACHE_LIMITED

    def test_classify_rejects_heterogeneous(self, rng):
        scenario = random_heterogeneous(rng, 5, 0.8)
        with pytest.raises(NotSymmetric):
            classify_f1_regime(scenario)

    def test_continuous_rate_agrees_on_integer_points(self):
        rate, regime = continuous_min_rate(worked_scenario())
        assert rate == pytest.approx(77631578.94736842, rel=1e-12)
        assert regime is Regime.ENERGY_LIMITED_UNCACHED

    def test_direction_changes(self):
        assert direction_changes([3, 2, 1, 2, 3]) == ["-+"]
        assert direction_changes([1, 2, 3]) == []
        assert direction_changes([1, 1, 1]) == []
        assert direction_changes([1, 2, 1, 2]) == ["+-", "-+"]
        assert direction_changes([3, 2, 2.0000001, 1], tol=1e-3) == []
