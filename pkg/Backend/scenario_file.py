# -*- coding: utf-8 -*-
"""
Scenario files - JSON scenario documents with an optional CSV viewpoint table
Parse, validate (errors name the offending field) and serialize losslessly
"""

import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from .errors import ScenarioError, SchemaError
from .hetero import zipf_scenario
from .logger import Logger
from .model import ProjectionTask, Scenario, ScenarioKind, SystemConfig, warn_low_stereo_ratio
from .results_csv import atomic_write
from . import settings

SCHEMA_VERSION = 1

TASK_FIELDS = ("input_bits", "output_bits", "cycles_per_bit", "deadline")
VIEWPOINT_FIELDS = TASK_FIELDS + ("probability",)
SYMMETRIC_FIELDS = TASK_FIELDS + ("viewpoints", "cache_count")
ZIPF_FIELDS = ("viewpoints", "gamma", "input_bits_min", "input_bits_max", "output_ratio",
               "cycles_per_bit", "deadline", "seed")
CONFIG_FIELDS = ("server_freq", "device_freq", "energy_coeff", "energy_budget", "cache_bits")
HETERO_SOURCES = ("viewpoints", "viewpoints_file", "zipf")

PathLike = Union[str, Path]


# --- Field readers ---

def _block(document: Mapping, key: str, prefix: str = "") -> Mapping:
    name = f"{prefix}{key}"
    if key not in document:
        raise SchemaError(name, "missing")
    value = document[key]
    if not isinstance(value, dict):
        raise SchemaError(name, "must be an object")
    return value


def _reject_unknown(block: Mapping, allowed, prefix: str):
    for key in block:
        if key not in allowed:
            raise SchemaError(f"{prefix}.{key}", "unknown field")


def _number(block: Mapping, key: str, prefix: str, minimum: float = 0.0, strict: bool = True) -> float:
    name = f"{prefix}.{key}"
    if key not in block:
        raise SchemaError(name, "missing")
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(name, f"must be a number, got {value!r}")
    value = float(value)
    if value != value or value in (float("inf"), float("-inf")):
        raise SchemaError(name, "must be finite")
    if strict and not value > minimum:
        raise SchemaError(name, f"must be > {minimum:g}, got {value!r}")
    if not strict and not value >= minimum:
        raise SchemaError(name, f"must be >= {minimum:g}, got {value!r}")
    return value


def _count(block: Mapping, key: str, prefix: str, minimum: int = 0) -> int:
    name = f"{prefix}.{key}"
    if key not in block:
        raise SchemaError(name, "missing")
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(name, f"must be an integer, got {value!r}")
    if value < minimum:
        raise SchemaError(name, f"must be >= {minimum}, got {value}")
    return value


def _task(row: Mapping, prefix: str, probability: Optional[float] = None) -> ProjectionTask:
    values = {key: _number(row, key, prefix) for key in TASK_FIELDS}
    if probability is None:
        probability = _number(row, "probability", prefix, strict=False)
        if probability > 1.0:
            raise SchemaError(f"{prefix}.probability", f"must be <= 1, got {probability!r}")
    return ProjectionTask(probability=probability, **values)


class ScenarioFileHandler:
    """Read and write scenario documents"""

    def load(self, path: PathLike, seed: Optional[int] = None) -> Scenario:
        """
        Load a scenario file

        Args:
            path: JSON scenario document
            seed: overrides the seed of a zipf stanza

        Returns:
            Validated Scenario
        """
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except OSError as e:
            raise SchemaError(str(path), f"cannot read scenario file: {e.strerror or e}") from e
        except json.JSONDecodeError as e:
            raise SchemaError(str(path), f"not valid JSON (line {e.lineno}, column {e.colno})") from e

        scenario = self.parse(document, base_dir=path.parent, seed=seed)
        Logger.log(f"Loaded {scenario.kind.value} scenario from {path}: N={scenario.n}", "SCENARIO")
        return scenario

    def parse(self, document: Any, base_dir: PathLike = ".", seed: Optional[int] = None) -> Scenario:
        """Validate a decoded document and build the Scenario it describes"""
        if not isinstance(document, dict):
            raise SchemaError("<document>", "must be a JSON object")
        _reject_unknown(document, ("schema_version", "kind", "config", "symmetric", "heterogeneous"),
                        "<document>")

        version = document.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaError("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")

        kind = document.get("kind")
        try:
            kind = ScenarioKind(kind)
        except ValueError:
            raise SchemaError("kind", f"must be 'symmetric' or 'heterogeneous', got {kind!r}") from None

        if kind is ScenarioKind.SYMMETRIC:
            if "heterogeneous" in document:
                raise SchemaError("heterogeneous", "not allowed in a symmetric scenario")
            return self._parse_symmetric(document)
        if "symmetric" in document:
            raise SchemaError("symmetric", "not allowed in a heterogeneous scenario")
        return self._parse_heterogeneous(document, Path(base_dir), seed)

    def _parse_config(self, document: Mapping, with_cache: bool) -> SystemConfig:
        block = _block(document, "config")
        allowed = CONFIG_FIELDS if with_cache else CONFIG_FIELDS[:-1]
        if not with_cache and "cache_bits" in block:
            raise SchemaError("config.cache_bits", "not used by symmetric scenarios; set symmetric.cache_count")
        _reject_unknown(block, allowed, "config")
        return SystemConfig(
            server_freq=_number(block, "server_freq", "config"),
            device_freq=_number(block, "device_freq", "config"),
            energy_coeff=_number(block, "energy_coeff", "config"),
            energy_budget=_number(block, "energy_budget", "config", strict=False),
            cache_bits=_number(block, "cache_bits", "config", strict=False) if with_cache else 0.0,
        )

    def _parse_symmetric(self, document: Mapping) -> Scenario:
        block = _block(document, "symmetric")
        _reject_unknown(block, SYMMETRIC_FIELDS, "symmetric")
        config = self._parse_config(document, with_cache=False)
        task = _task(block, "symmetric", probability=1.0)
        n = _count(block, "viewpoints", "symmetric", minimum=1)
        cache_count = _count(block, "cache_count", "symmetric")
        return Scenario.symmetric(task, n, config, cache_count=cache_count)

    def _parse_heterogeneous(self, document: Mapping, base_dir: Path, seed: Optional[int]) -> Scenario:
        block = _block(document, "heterogeneous")
        _reject_unknown(block, HETERO_SOURCES, "heterogeneous")
        present = [key for key in HETERO_SOURCES if key in block]
        if len(present) != 1:
            raise SchemaError("heterogeneous", f"needs exactly one of {', '.join(HETERO_SOURCES)}; "
                                               f"found {len(present)}")
        config = self._parse_config(document, with_cache=True)
        source = present[0]

        if source == "zipf":
            return self._parse_zipf(_block(block, "zipf", "heterogeneous."), config, seed)

        if source == "viewpoints":
            rows = block["viewpoints"]
            if not isinstance(rows, list) or not rows:
                raise SchemaError("heterogeneous.viewpoints", "must be a non-empty list")
            tasks = []
            for i, row in enumerate(rows):
                prefix = f"heterogeneous.viewpoints[{i}]"
                if not isinstance(row, dict):
                    raise SchemaError(prefix, "must be an object")
                _reject_unknown(row, VIEWPOINT_FIELDS, prefix)
                tasks.append(_task(row, prefix))
        else:
            reference = block["viewpoints_file"]
            if not isinstance(reference, str) or not reference:
                raise SchemaError("heterogeneous.viewpoints_file", "must be a file path")
            tasks = self.read_table(base_dir / reference)

        try:
            scenario = Scenario(tasks=tuple(tasks), config=config, kind=ScenarioKind.HETEROGENEOUS)
        except SchemaError:
            raise
        except ScenarioError as e:
            raise SchemaError("heterogeneous", str(e)) from e
        return warn_low_stereo_ratio(scenario)

    def _parse_zipf(self, block: Mapping, config: SystemConfig, seed: Optional[int]) -> Scenario:
        prefix = "heterogeneous.zipf"
        _reject_unknown(block, ZIPF_FIELDS, prefix)
        lo = _number(block, "input_bits_min", prefix)
        hi = _number(block, "input_bits_max", prefix)
        if hi < lo:
            raise SchemaError(f"{prefix}.input_bits_max", "must be >= input_bits_min")
        stanza_seed = _count(block, "seed", prefix)
        return zipf_scenario(
            n=_count(block, "viewpoints", prefix, minimum=1),
            gamma=_number(block, "gamma", prefix, strict=False),
            input_range=(lo, hi),
            output_ratio=_number(block, "output_ratio", prefix),
            cycles_per_bit=_number(block, "cycles_per_bit", prefix),
            deadline=_number(block, "deadline", prefix),
            config=config,
            seed=stanza_seed if seed is None else seed,
        )

    # --- Viewpoint tables ---

    def read_table(self, path: PathLike) -> List[ProjectionTask]:
        """Read a per-viewpoint CSV table (header: input_bits,...,probability)"""
        path = Path(path)
        field = "heterogeneous.viewpoints_file"
        try:
            with open(path, "r", encoding="utf-8", newline="") as f:
                reader = csv.DictReader(f)
                header = tuple(reader.fieldnames or ())
                missing = [key for key in VIEWPOINT_FIELDS if key not in header]
                if missing:
                    raise SchemaError(field, f"{path.name} lacks column(s) {', '.join(missing)}")
                tasks = []
                for i, raw in enumerate(reader):
                    prefix = f"{field}[row {i}]"
                    row = {}
                    for key in VIEWPOINT_FIELDS:
                        try:
                            row[key] = float(raw[key])
                        except (TypeError, ValueError):
                            raise SchemaError(f"{prefix}.{key}", f"not a number: {raw[key]!r}") from None
                    tasks.append(_task(row, prefix))
        except OSError as e:
            raise SchemaError(field, f"cannot read {path}: {e.strerror or e}") from e
        if not tasks:
            raise SchemaError(field, f"{path.name} has no rows")
        return tasks

    def render_table(self, scenario: Scenario) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(VIEWPOINT_FIELDS)
        for task in scenario.tasks:
            writer.writerow([repr(float(task.input_bits)), repr(float(task.output_bits)),
                             repr(float(task.cycles_per_bit)), repr(float(task.deadline)),
                             repr(float(task.probability))])
        return buffer.getvalue()

    # --- Serialization ---

    def to_document(self, scenario: Scenario, viewpoints_file: Optional[str] = None) -> Dict[str, Any]:
        """
        Document for a scenario

        Args:
            scenario: scenario to describe
            viewpoints_file: when set, the heterogeneous table is referenced
                by this relative path instead of inlined
        """
        cfg = scenario.config
        config = {
            "server_freq": float(cfg.server_freq),
            "device_freq": float(cfg.device_freq),
            "energy_coeff": float(cfg.energy_coeff),
            "energy_budget": float(cfg.energy_budget),
        }
        document: Dict[str, Any] = {"schema_version": SCHEMA_VERSION, "kind": scenario.kind.value}

        if scenario.is_symmetric:
            task = scenario.tasks[0]
            document["symmetric"] = {
                "input_bits": float(task.input_bits),
                "output_bits": float(task.output_bits),
                "cycles_per_bit": float(task.cycles_per_bit),
                "deadline": float(task.deadline),
                "viewpoints": scenario.n,
                "cache_count": scenario.cache_count,
            }
        else:
            config["cache_bits"] = float(cfg.cache_bits)
            if viewpoints_file:
                document["heterogeneous"] = {"viewpoints_file": viewpoints_file}
            else:
                document["heterogeneous"] = {"viewpoints": [
                    {key: float(getattr(task, key)) for key in VIEWPOINT_FIELDS}
                    for task in scenario.tasks
                ]}
        document["config"] = config
        return document

    def dumps(self, document: Mapping) -> str:
        """Sorted keys, two-space indent, repr floats, trailing newline"""
        return json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n"

    def save(self, scenario: Scenario, path: PathLike, table_threshold: Optional[int] = None) -> Dict[str, Any]:
        """
        Write a scenario file (and its side table when N exceeds the threshold)

        Returns:
            Result dictionary with the written paths
        """
        path = Path(path)
        threshold = settings.table_threshold() if table_threshold is None else table_threshold
        table_path = None
        if not scenario.is_symmetric and scenario.n > threshold:
            table_path = path.with_name(f"{path.stem}.viewpoints.csv")
            atomic_write(table_path, self.render_table(scenario))

        document = self.to_document(scenario, viewpoints_file=table_path.name if table_path else None)
        atomic_write(path, self.dumps(document))
        Logger.log(f"Saved {scenario.kind.value} scenario (N={scenario.n}) to {path}", "SCENARIO")
        return {
            "status": "success",
            "message": f"Scenario written to {path}",
            "path": str(path),
            "table_path": str(table_path) if table_path else None,
        }


# Global instance
scenario_files = ScenarioFileHandler()
