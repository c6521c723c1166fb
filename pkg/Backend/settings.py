# -*- coding: utf-8 -*-
"""
Settings - environment driven defaults
Values are read from .env / the process environment at call time
"""

import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

PROJECT_ROOT = Path(__file__).parent.parent


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        return default


def _env_flag(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    return raw.strip().lower() in ("1", "true", "yes", "on")


def output_dir() -> Path:
    """Default directory for CLI artifacts (VR3C_OUTPUT_DIR)"""
    return Path(os.getenv("VR3C_OUTPUT_DIR", "."))


def log_dir() -> Path:
    return Path(os.getenv("VR3C_LOG_DIR", str(PROJECT_ROOT / "Database")))


def log_to_file() -> bool:
    return _env_flag("VR3C_LOG_TO_FILE", True)


def log_quiet() -> bool:
    return _env_flag("VR3C_LOG_QUIET", False)


def knapsack_resolution() -> int:
    """Integer grid size Q used to scale knapsack weights"""
    return max(1, _env_int("VR3C_KNAPSACK_RESOLUTION", 100_000))


def knapsack_max_cells() -> int:
    """Largest knapsack backtrack table, items x (Q + 1) one-byte cells"""
    return max(1, _env_int("VR3C_KNAPSACK_MAX_CELLS", 200_000_000))


def oracle_max_viewpoints() -> int:
    return _env_int("VR3C_ORACLE_MAX_VIEWPOINTS", 14)


def mca_max_iterations() -> int:
    return max(1, _env_int("VR3C_MCA_MAX_ITERATIONS", 100))


def sweep_workers() -> int:
    return max(1, _env_int("VR3C_SWEEP_WORKERS", 1))


def table_threshold() -> int:
    """Viewpoint count above which gen-scenario writes a side CSV table"""
    return _env_int("VR3C_TABLE_THRESHOLD", 1000)
