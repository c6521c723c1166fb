# -*- coding: utf-8 -*-
"""
0/1 knapsack kernel - dynamic programming over integer-scaled weights
Real weights are mapped onto a Q-point grid by ceiling, so every selection that
fits the scaled budget also fits the real one.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ScenarioError, TooLarge
from .logger import Logger
from . import settings


@dataclass(frozen=True)
class KnapsackInstance:
    values: Tuple[float, ...]
    weights: Tuple[float, ...]
    budget: float
    resolution: int = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        weights = tuple(float(w) for w in self.weights)
        if len(values) != len(weights):
            raise ScenarioError(f"{len(values)} values but {len(weights)} weights")
        if any(w < 0 or not math.isfinite(w) for w in weights):
            raise ScenarioError("knapsack weights must be finite and non-negative")
        if not (self.budget >= 0 and math.isfinite(self.budget)):
            raise ScenarioError(f"knapsack budget must be finite and >= 0, got {self.budget!r}")
        resolution = settings.knapsack_resolution() if self.resolution is None else int(self.resolution)
        if resolution < 1:
            raise ScenarioError(f"resolution Q must be >= 1, got {resolution}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "resolution", resolution)

    def scaled_weights(self) -> np.ndarray:
        """ceil(w_i Q / budget); items heavier than the budget come out above Q"""
        w = np.asarray(self.weights, dtype=float)
        if self.budget <= 0:
            return np.where(w > 0, self.resolution + 1, 0).astype(np.int64)
        scaled = w * self.resolution / self.budget
        # shave float noise so exact grid points are not pushed up a cell
        scaled = np.ceil(scaled - 1e-9)
        return np.clip(scaled, 0, self.resolution + 1).astype(np.int64)


@dataclass(frozen=True)
class KnapsackSolution:
    selection: Tuple[int, ...]
    value: float
    scaled_weights: Tuple[int, ...]

    @property
    def selected(self) -> Tuple[int, ...]:
        """Indices of chosen items"""
        return tuple(i for i, s in enumerate(self.selection) if s)


def knapsack_max(inst: KnapsackInstance) -> KnapsackSolution:
    """
    Maximize sum of values subject to the scaled weight budget

    Zero-weight items with positive value are always taken; items with
    value <= 0 are never taken.
    """
    n = len(inst.values)
    values = np.asarray(inst.values, dtype=float)
    weights = inst.scaled_weights()
    capacity = inst.resolution
    selection = np.zeros(n, dtype=np.int8)

    positive = values > 0
    free = positive & (weights == 0)
    selection[free] = 1

    candidates = np.flatnonzero(positive & (weights > 0) & (weights <= capacity))
    cells = candidates.size * (capacity + 1)
    cap = settings.knapsack_max_cells()
    if cells > cap:
        Logger.log_solver_status("knapsack_max", "capped", f"{candidates.size} items x Q={capacity}")
        raise TooLarge(
            f"knapsack table needs {cells} cells ({candidates.size} items x {capacity + 1}), "
            f"cap is {cap}; lower Q or raise VR3C_KNAPSACK_MAX_CELLS"
        )
    if candidates.size:
        best = np.zeros(capacity + 1, dtype=float)
        keep = np.zeros((candidates.size, capacity + 1), dtype=bool)
        for row, item in enumerate(candidates):
            w = int(weights[item])
            take = best[:-w] + values[item]
            better = take > best[w:]
            keep[row, w:] = better
            # right-hand side is evaluated before assignment, so each item is used once
            best[w:] = np.where(better, take, best[w:])

        q = capacity
        for row in range(candidates.size - 1, -1, -1):
            if keep[row, q]:
                item = candidates[row]
                selection[item] = 1
                q -= int(weights[item])

    value = math.fsum(values[selection.astype(bool)])
    return KnapsackSolution(
        selection=tuple(selection.tolist()),
        value=value,
        scaled_weights=tuple(weights.tolist()),
    )
