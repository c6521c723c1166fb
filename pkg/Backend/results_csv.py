# -*- coding: utf-8 -*-
"""
Result CSV emission - sweep tables and solve summaries
Numbers carry 9 significant digits; files are replaced atomically
"""

import csv
import io
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .hetero import HeteroSolveResult
from .logger import Logger
from .model import Scenario, rate_floors
from .symmetric import SymmetricSolution
from .tradeoff import SweepAxis, TradeoffPoint

SIGNIFICANT_DIGITS = 9

SWEEP_COLUMNS = ("min_rate", "regime", "gain", "offload_count", "cache_count",
                 "energy_used", "cache_used")
SYMMETRIC_COLUMNS = ("offload_count", "cache_count", "min_rate", "regime", "gain_no_cache",
                     "gain_with_cache", "gain", "energy_used", "cache_used")
HETERO_COLUMNS = ("method", "objective", "baseline_rate", "gain", "iterations", "offloaded",
                  "cached", "energy_used", "energy_limit", "cache_used", "cache_limit")

Cell = Union[str, int, float]


def format_number(value: Cell) -> str:
    """Integers verbatim, floats with 9 significant digits, strings untouched"""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, f".{SIGNIFICANT_DIGITS}g")
    return str(value)


def render(header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> str:
    """CSV text with a header row and a fixed column count"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    width = len(header)
    for row in rows:
        if len(row) != width:
            raise ValueError(f"row has {len(row)} cells, header has {width}")
        writer.writerow([format_number(cell) for cell in row])
    return buffer.getvalue()


def atomic_write(path: Union[str, Path], text: str) -> Path:
    """Write text to a temp file next to path, then rename it into place"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    Logger.log(f"Wrote {path}", "CLI")
    return path


# --- Row builders ---

def _sweep_cells(point: TradeoffPoint) -> List[Cell]:
    return [
        point.min_rate,
        point.regime_label,
        point.gain_fraction,
        point.offload_count,
        point.cache_count,
        float(point.energy_used),
        float(point.cache_used),
    ]


def sweep_table(axis: SweepAxis, points: Sequence[TradeoffPoint]) -> Tuple[Tuple[str, ...], List[List[Cell]]]:
    header = (SweepAxis(axis).value,) + SWEEP_COLUMNS
    return header, [[p.axis_value] + _sweep_cells(p) for p in points]


def surface_table(outer_axis: SweepAxis, axis: SweepAxis,
                  rows: Sequence[Tuple[float, TradeoffPoint]]) -> Tuple[Tuple[str, ...], List[List[Cell]]]:
    header = (SweepAxis(outer_axis).value, SweepAxis(axis).value) + SWEEP_COLUMNS
    return header, [[outer, p.axis_value] + _sweep_cells(p) for outer, p in rows]


def symmetric_table(solution: SymmetricSolution, scenario: Scenario) -> Tuple[Tuple[str, ...], List[List[Cell]]]:
    task = scenario.tasks[0]
    energy_used = solution.offload_count * scenario.config.energy_per_cycle * task.cycles / scenario.n
    row = [
        solution.offload_count,
        solution.cache_count,
        solution.min_rate,
        solution.regime.value,
        solution.gain_no_cache,
        solution.gain_with_cache,
        solution.gain_fraction,
        energy_used,
        solution.cache_count * task.input_bits,
    ]
    return SYMMETRIC_COLUMNS, [row]


def baseline_rate(scenario: Scenario) -> float:
    """sum P_i R0_i, the rate without caching or local computing"""
    return math.fsum(scenario.arrays.probability * rate_floors(scenario).server)


def hetero_table(results: Sequence[HeteroSolveResult], scenario: Scenario,
                 baseline: Optional[float] = None) -> Tuple[Tuple[str, ...], List[List[Cell]]]:
    baseline = baseline_rate(scenario) if baseline is None else baseline
    rows = []
    for result in results:
        report = result.diagnostics
        gain = 1.0 - result.objective / baseline if baseline > 0 else 0.0
        rows.append([
            result.method.value,
            result.objective,
            baseline,
            gain,
            result.iterations,
            result.offloaded,
            result.cached,
            float(report.energy_used),
            float(report.energy_limit),
            float(report.cache_used),
            float(report.cache_limit),
        ])
    return HETERO_COLUMNS, rows
