"""Backend package for the vr3c solver"""

__version__ = "1.0.0"
__author__ = "vr3c Team"

from .logger import Logger
from .model import Policy, ProjectionTask, Scenario, SystemConfig
from .symmetric import optimal_policy
from .hetero import brute_force_solve, greedy_solve, mca_solve, zipf_scenario
from .tradeoff import SweepAxis, SweepSpec, sweep

__all__ = [
    "Logger",
    "Policy",
    "ProjectionTask",
    "Scenario",
    "SystemConfig",
    "optimal_policy",
    "brute_force_solve",
    "greedy_solve",
    "mca_solve",
    "zipf_scenario",
    "SweepAxis",
    "SweepSpec",
    "sweep",
]
