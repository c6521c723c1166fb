# -*- coding: utf-8 -*-
"""
Shared pytest fixtures: logger isolation, the worked symmetric instance and
random instance factories
"""

import os

# before Backend is imported: no log files, no console echo
os.environ["VR3C_LOG_TO_FILE"] = "0"
os.environ["VR3C_LOG_QUIET"] = "1"

import numpy as np
import pytest

from Backend.logger import Logger
from Backend.model import ProjectionTask, Scenario, ScenarioKind, SystemConfig

WORKED_RATE = 77631578.94736842


def worked_task() -> ProjectionTask:
    return ProjectionTask(input_bits=1e6, output_bits=2e6, cycles_per_bit=100.0, deadline=0.02)


def worked_config(energy_budget: float = 5.0) -> SystemConfig:
    return SystemConfig(server_freq=1e11, device_freq=1e10, energy_coeff=1e-27,
                        energy_budget=energy_budget)


def worked_scenario(energy_budget: float = 5.0, cache_count: int = 1, n: int = 4) -> Scenario:
    return Scenario.symmetric(worked_task(), n, worked_config(energy_budget), cache_count=cache_count)


def random_symmetric(rng: np.random.Generator, n_max: int = 10) -> Scenario:
    """Feasible symmetric instance; the mix of sizes makes every regime show up"""
    n = int(rng.integers(1, n_max + 1))
    input_bits = float(rng.uniform(1e5, 5e6))
    deadline = float(rng.uniform(0.01, 0.05))
    cycles_per_bit = float(rng.uniform(10.0, 200.0))
    f_min = input_bits * cycles_per_bit / deadline
    device_freq = f_min * float(rng.uniform(1.05, 5.0))
    server_freq = device_freq * float(rng.uniform(2.0, 50.0))
    output_bits = input_bits * float(rng.uniform(0.5, 4.0))
    energy_coeff = 1e-27
    per_task = energy_coeff * device_freq ** 2 * input_bits * cycles_per_bit
    energy_budget = per_task * float(rng.uniform(0.0, 1.2))
    task = ProjectionTask(input_bits, output_bits, cycles_per_bit, deadline)
    config = SystemConfig(server_freq, device_freq, energy_coeff, energy_budget)
    return Scenario.symmetric(task, n, config, cache_count=int(rng.integers(0, n + 1)))


def random_heterogeneous(rng: np.random.Generator, n: int, gamma: float) -> Scenario:
    """Zipf-weighted instance with budgets from empty to saturating"""
    weights = np.arange(1, n + 1, dtype=float) ** (-gamma)
    probability = weights / weights.sum()
    input_bits = rng.uniform(15e6, 25e6, size=n)
    cycles_per_bit = rng.uniform(0.5, 1.5, size=n)
    deadline = 0.02
    tasks = tuple(
        ProjectionTask(float(i_bits), float(rng.uniform(1.0, 3.0)) * float(i_bits), float(w), deadline, float(p))
        for i_bits, w, p in zip(input_bits, cycles_per_bit, probability)
    )
    device_freq = float(rng.uniform(1.6e9, 4e9))
    energy_coeff = 1e-27
    full_energy = float(np.sum(probability * energy_coeff * device_freq ** 2 * input_bits * cycles_per_bit))
    config = SystemConfig(
        server_freq=1e11,
        device_freq=device_freq,
        energy_coeff=energy_coeff,
        energy_budget=full_energy * float(rng.uniform(0.0, 1.1)),
        cache_bits=float(np.sum(input_bits)) * float(rng.uniform(0.0, 1.1)),
    )
    return Scenario(tasks=tasks, config=config, kind=ScenarioKind.HETEROGENEOUS)


@pytest.fixture(autouse=True)
def quiet_logger():
    Logger.quiet = True
    yield
    Logger.close()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def worked():
    return worked_scenario()
