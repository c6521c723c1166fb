# -*- coding: utf-8 -*-
"""
Command line interface - solve-symmetric, solve-hetero, sweep, gen-scenario

Exit codes: 0 ok, 2 input error, 3 model infeasible, 4 instance too large
"""

import argparse
import functools
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import settings
from .errors import ScenarioError, SolverError
from .hetero import brute_force_solve, greedy_solve, mca_solve, zipf_scenario
from .logger import Logger
from .model import Scenario, SystemConfig
from .results_csv import (
    atomic_write,
    baseline_rate,
    hetero_table,
    render,
    surface_table,
    sweep_table,
    symmetric_table,
)
from .scenario_file import scenario_files
from .symmetric import optimal_policy
from .tradeoff import (
    SweepAxis,
    SweepSpec,
    apply_axis,
    surface,
    surface_heterogeneous,
    sweep,
    sweep_heterogeneous,
)

FORMATS = ("report", "csv")
METHODS = ("ga", "mca", "oracle")


def sci(value: float) -> str:
    """9 significant digits in scientific notation, exponent without padding (7.76315789e7)"""
    mantissa, exponent = f"{value:.8e}".split("e")
    return f"{mantissa}e{int(exponent)}"


def parse_grid(text: str) -> tuple:
    """
    Parse a grid spec

    Accepts "a,b,c" (explicit values) or "start:stop:count" (inclusive linspace)
    """
    text = (text or "").strip()
    if not text:
        raise ScenarioError("grid spec is empty")
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ScenarioError(f"grid range must be start:stop:count, got {text!r}")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ScenarioError(f"grid count must be >= 1, got {count}")
            return tuple(np.linspace(start, stop, count).tolist())
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as e:
        raise ScenarioError(f"bad grid spec {text!r}: {e}") from None


def _command(fn):
    """Turn SolverError / OSError into the error result dictionary"""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs) -> Dict[str, Any]:
        try:
            return fn(*args, **kwargs)
        except SolverError as e:
            message = f"{type(e).__name__}: {e}"
            Logger.log(f"{fn.__name__} failed - {message}", "ERROR")
            return {"status": "error", "message": message, "exit_code": e.exit_code}
        except OSError as e:
            message = f"I/O error: {e}"
            Logger.log(f"{fn.__name__} failed - {message}", "ERROR")
            return {"status": "error", "message": message, "exit_code": 2}

    return wrapper


def _emit(text: str, out: Optional[str]) -> Dict[str, Any]:
    if out:
        path = atomic_write(out, text)
        return {"output": None, "path": str(path)}
    return {"output": text, "path": None}


# --- Commands ---

def _symmetric_report(scenario: Scenario, solution) -> str:
    cfg = scenario.config
    task = scenario.tasks[0]
    energy_used = solution.offload_count * cfg.energy_per_cycle * task.cycles / scenario.n
    lines = [
        f"Symmetric scenario: N={scenario.n}, C={solution.cache_capacity}, d_max={solution.max_offload}",
        f"R0 = {sci(solution.server_rate)} bit/s",
        f"R1 = {sci(solution.device_rate)} bit/s",
        f"d* = {solution.offload_count}, c* = {solution.cache_count}",
    ]
    if solution.min_rate == solution.server_rate:
        lines.append(f"R* = R0 = {sci(solution.min_rate)} bit/s ({solution.min_rate:.0f} bit/s)")
    else:
        lines.append(f"R* = {sci(solution.min_rate)} bit/s ({solution.min_rate:.0f} bit/s)")
    lines += [
        f"regime = {solution.regime.value}",
        f"gain without caching = {sci(solution.gain_no_cache)} bit/s",
        f"gain with caching = {sci(solution.gain_with_cache)} bit/s",
        f"gain fraction = {solution.gain_fraction:.9g}",
        f"energy used = {energy_used:.9g} J of {cfg.energy_budget:.9g} J",
        f"cache used = {solution.cache_count * task.input_bits:.9g} bits of {cfg.cache_bits:.9g} bits",
    ]
    return "\n".join(lines) + "\n"


@_command
def cmd_solve_symmetric(path: str, fmt: str = "report", out: Optional[str] = None) -> Dict[str, Any]:
    """
    Closed-form optimum of a symmetric scenario file

    Args:
        path: scenario file
        fmt: "report" or "csv"
        out: write the output here instead of returning it for stdout

    Returns:
        Result dictionary
    """
    Logger.log(f"solve-symmetric {path}", "CLI")
    scenario = scenario_files.load(path)
    solution = optimal_policy(scenario)
    if fmt == "csv":
        text = render(*symmetric_table(solution, scenario))
    else:
        text = _symmetric_report(scenario, solution)
    return {
        "status": "success",
        "message": f"d*={solution.offload_count}, R*={solution.min_rate:.9g} bit/s",
        "exit_code": 0,
        **_emit(text, out),
    }


def _hetero_report(scenario: Scenario, results, baseline: float) -> str:
    cfg = scenario.config
    lines = [
        f"Heterogeneous scenario: N={scenario.n}, C'={cfg.cache_bits:.9g} bits, E={cfg.energy_budget:.9g} J",
        f"baseline rate = {sci(baseline)} bit/s",
    ]
    for result in results:
        report = result.diagnostics
        gain = 1.0 - result.objective / baseline if baseline > 0 else 0.0
        lines.append(
            f"{result.method.value}: objective = {sci(result.objective)} bit/s, gain = {gain:.9g}, "
            f"offloaded = {result.offloaded}, cached = {result.cached}, iterations = {result.iterations}, "
            f"energy = {report.energy_used:.9g} of {report.energy_limit:.9g} J, "
            f"cache = {report.cache_used:.9g} of {report.cache_limit:.9g} bits"
        )
    return "\n".join(lines) + "\n"


@_command
def cmd_solve_hetero(path: str, method: str = "ga", resolution: Optional[int] = None,
                     seed: Optional[int] = None, fmt: str = "report", out: Optional[str] = None,
                     workers: Optional[int] = None) -> Dict[str, Any]:
    """
    Solve a heterogeneous (or any) scenario file with GA, MCA or the oracle

    MCA is seeded from GA and both results are reported.

    Args:
        path: scenario file
        method: ga | mca | oracle
        resolution: knapsack grid size Q for MCA
        seed: overrides the seed of a zipf stanza
        fmt: "report" or "csv"
        out: output file
        workers: oracle worker threads
    """
    method = method.lower()
    if method not in METHODS:
        raise ScenarioError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    Logger.log(f"solve-hetero {path} method={method}", "CLI")
    scenario = scenario_files.load(path, seed=seed)

    if method == "oracle":
        results = [brute_force_solve(scenario, workers=workers or settings.sweep_workers())]
    else:
        # GA accepts heterogeneous scenarios only; symmetric files go through a relabel
        target = scenario if not scenario.is_symmetric else Scenario(scenario.tasks, scenario.config)
        ga = greedy_solve(target)
        results = [ga]
        if method == "mca":
            results.append(mca_solve(target, initial=ga.policy, resolution=resolution))

    baseline = baseline_rate(scenario)
    if fmt == "csv":
        text = render(*hetero_table(results, scenario, baseline))
    else:
        text = _hetero_report(scenario, results, baseline)
    best = results[-1]
    return {
        "status": "success",
        "message": f"{best.method.value} objective={best.objective:.9g} bit/s",
        "exit_code": 0,
        **_emit(text, out),
    }


@_command
def cmd_sweep(path: str, axis: str, grid: Sequence[float], out: Optional[str] = None,
              axis2: Optional[str] = None, grid2: Optional[Sequence[float]] = None,
              relaxed: bool = False, workers: Optional[int] = None,
              seed: Optional[int] = None) -> Dict[str, Any]:
    """
    Sweep R* along one axis (or two with axis2/grid2) and write a CSV

    Symmetric scenarios use the closed form, heterogeneous ones run GA at
    every grid point.

    Returns:
        Result dictionary with the CSV path
    """
    axis = SweepAxis(axis)
    if (axis2 is None) != (grid2 is None):
        raise ScenarioError("--axis2 and --grid2 must be given together")
    Logger.log(f"sweep {path} axis={axis.value} points={len(grid)}", "CLI")
    scenario = scenario_files.load(path, seed=seed)

    if scenario.is_symmetric:
        spec = SweepSpec(axis=axis, grid=grid, base=scenario, relaxed=relaxed)
        if axis2 is None:
            table = sweep_table(axis, sweep(spec, workers))
        else:
            table = surface_table(axis2, axis, surface(spec, SweepAxis(axis2), grid2, workers))
    else:
        if relaxed:
            raise ScenarioError("--relaxed applies to symmetric scenarios only")
        if axis2 is None:
            table = sweep_table(axis, sweep_heterogeneous(scenario, axis, grid, workers))
        else:
            rows = surface_heterogeneous(scenario, axis, grid, SweepAxis(axis2), grid2, workers)
            table = surface_table(axis2, axis, rows)

    target = Path(out) if out else settings.output_dir() / f"sweep_{axis.value}.csv"
    text = render(*table)
    atomic_write(target, text)
    return {
        "status": "success",
        "message": f"Sweep written to {target} ({len(table[1])} rows)",
        "exit_code": 0,
        "output": None,
        "path": str(target),
    }


@_command
def cmd_gen_scenario(params: Dict[str, Any], seed: int = 0, out: Optional[str] = None) -> Dict[str, Any]:
    """
    Generate a Zipf heterogeneous scenario file

    Args:
        params: viewpoints, gamma, input_bits_min, input_bits_max, output_ratio,
            cycles_per_bit, deadline, server_freq, device_freq, energy_coeff,
            energy_budget, cache_bits, and optionally energy_fraction /
            cache_fraction which override the absolute budgets
        seed: RNG seed
        out: scenario file path

    Returns:
        Result dictionary with the written paths
    """
    n = int(params["viewpoints"])
    config = SystemConfig(
        server_freq=params["server_freq"],
        device_freq=params["device_freq"],
        energy_coeff=params["energy_coeff"],
        energy_budget=params.get("energy_budget", 0.0),
        cache_bits=params.get("cache_bits", 0.0),
    )
    scenario = zipf_scenario(
        n=n,
        gamma=params["gamma"],
        input_range=(params["input_bits_min"], params["input_bits_max"]),
        output_ratio=params["output_ratio"],
        cycles_per_bit=params["cycles_per_bit"],
        deadline=params["deadline"],
        config=config,
        seed=seed,
    )
    if params.get("energy_fraction") is not None:
        scenario = apply_axis(scenario, SweepAxis.ENERGY_FRACTION, params["energy_fraction"])
    if params.get("cache_fraction") is not None:
        scenario = apply_axis(scenario, SweepAxis.CACHE_FRACTION, params["cache_fraction"])

    target = Path(out) if out else settings.output_dir() / f"scenario_zipf_n{n}_seed{seed}.json"
    result = scenario_files.save(scenario, target)
    result.update({"exit_code": 0, "output": None})
    return result


# --- Argument parsing ---

def _grid_arg(text: str) -> tuple:
    try:
        return parse_grid(text)
    except ScenarioError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vr3c",
        description="Joint caching and computation offloading solver for mobile VR delivery",
    )
    parser.add_argument("--quiet", "-q", action="store_true", help="Do not echo log lines to stderr")
    subparsers = parser.add_subparsers(dest="command", required=True)

    axes = [a.value for a in SweepAxis]

    cmd_sym = subparsers.add_parser("solve-symmetric", help="Closed-form optimum of a symmetric scenario")
    cmd_sym.add_argument("scenario", help="Scenario file (JSON)")
    cmd_sym.add_argument("--format", choices=FORMATS, default="report")
    cmd_sym.add_argument("--out", help="Write the output to this file")

    cmd_het = subparsers.add_parser("solve-hetero", help="GA / MCA / oracle on a scenario")
    cmd_het.add_argument("scenario", help="Scenario file (JSON)")
    cmd_het.add_argument("--method", choices=METHODS, default="ga")
    cmd_het.add_argument("--Q", type=int, default=None, dest="resolution",
                         help="Knapsack grid size for MCA (default VR3C_KNAPSACK_RESOLUTION)")
    cmd_het.add_argument("--seed", type=int, default=None, help="Override the zipf stanza seed")
    cmd_het.add_argument("--format", choices=FORMATS, default="report")
    cmd_het.add_argument("--out", help="Write the output to this file")
    cmd_het.add_argument("--workers", type=int, default=None, help="Oracle worker threads")

    cmd_swp = subparsers.add_parser("sweep", help="Sweep R* over an axis and write CSV")
    cmd_swp.add_argument("scenario", help="Scenario file (JSON)")
    cmd_swp.add_argument("--axis", choices=axes, required=True)
    cmd_swp.add_argument("--grid", type=_grid_arg, required=True,
                         help="a,b,c or start:stop:count")
    cmd_swp.add_argument("--axis2", choices=axes, default=None, help="Outer axis of a surface")
    cmd_swp.add_argument("--grid2", type=_grid_arg, default=None)
    cmd_swp.add_argument("--relaxed", action="store_true",
                         help="Do not floor the energy-limited offload count")
    cmd_swp.add_argument("--workers", type=int, default=None)
    cmd_swp.add_argument("--seed", type=int, default=None, help="Override the zipf stanza seed")
    cmd_swp.add_argument("--out", help="CSV path (default $VR3C_OUTPUT_DIR/sweep_<axis>.csv)")

    cmd_gen = subparsers.add_parser("gen-scenario", help="Generate a Zipf heterogeneous scenario")
    cmd_gen.add_argument("--viewpoints", type=int, required=True)
    cmd_gen.add_argument("--gamma", type=float, default=0.8)
    cmd_gen.add_argument("--input-min", type=float, default=15e6, dest="input_bits_min")
    cmd_gen.add_argument("--input-max", type=float, default=25e6, dest="input_bits_max")
    cmd_gen.add_argument("--output-ratio", type=float, default=2.0)
    cmd_gen.add_argument("--cycles-per-bit", type=float, default=1.0)
    cmd_gen.add_argument("--deadline", type=float, default=0.02)
    cmd_gen.add_argument("--server-freq", type=float, default=1e11)
    cmd_gen.add_argument("--device-freq", type=float, default=2.5e9)
    cmd_gen.add_argument("--energy-coeff", type=float, default=1e-27)
    cmd_gen.add_argument("--energy-budget", type=float, default=0.0)
    cmd_gen.add_argument("--cache-bits", type=float, default=0.0)
    cmd_gen.add_argument("--energy-fraction", type=float, default=None,
                         help="Energy budget as a fraction of offloading everything")
    cmd_gen.add_argument("--cache-fraction", type=float, default=None,
                         help="Cache size as a fraction of all 2D FOV bits")
    cmd_gen.add_argument("--seed", type=int, default=0)
    cmd_gen.add_argument("--out", help="Scenario path")

    return parser


GEN_PARAMS = ("viewpoints", "gamma", "input_bits_min", "input_bits_max", "output_ratio",
              "cycles_per_bit", "deadline", "server_freq", "device_freq", "energy_coeff",
              "energy_budget", "cache_bits", "energy_fraction", "cache_fraction")


def run(args: argparse.Namespace) -> Dict[str, Any]:
    if args.command == "solve-symmetric":
        return cmd_solve_symmetric(args.scenario, fmt=args.format, out=args.out)
    if args.command == "solve-hetero":
        return cmd_solve_hetero(args.scenario, method=args.method, resolution=args.resolution,
                                seed=args.seed, fmt=args.format, out=args.out, workers=args.workers)
    if args.command == "sweep":
        return cmd_sweep(args.scenario, args.axis, args.grid, out=args.out, axis2=args.axis2,
                         grid2=args.grid2, relaxed=args.relaxed, workers=args.workers, seed=args.seed)
    params = {key: getattr(args, key) for key in GEN_PARAMS}
    return cmd_gen_scenario(params, seed=args.seed, out=args.out)


def main(argv: Optional[List[str]] = None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)
    if args.quiet:
        Logger.quiet = True

    try:
        result = run(args)
    finally:
        Logger.close()

    if result.get("output"):
        sys.stdout.write(result["output"])
    if result["status"] == "error":
        print(result["message"], file=sys.stderr)
    return result["exit_code"]
