# -*- coding: utf-8 -*-
"""
Solver errors - typed exceptions shared by every module
Each class carries the CLI exit code it maps to
"""

from typing import Optional


class SolverError(Exception):
    """Base class for every error raised by the solver library"""

    exit_code = 1


class SolverConsistencyError(SolverError):
    """A closed-form value disagreed with the evaluated policy"""


# --- Input errors (exit 2) ---

class ScenarioError(SolverError, ValueError):
    """Invalid scenario, task, config or policy input"""

    exit_code = 2


class SchemaError(ScenarioError):
    """Scenario file does not match the schema; names the offending field"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class LengthMismatch(ScenarioError):
    """Policy length differs from the number of viewpoints"""


class NotSymmetric(ScenarioError):
    """A symmetric-only operation received a heterogeneous scenario"""


class NotHeterogeneous(ScenarioError):
    """A heterogeneous-only operation received a symmetric scenario"""


class EmptyGrid(ScenarioError):
    """Sweep grid has no points"""


# --- Infeasibility (exit 3) ---

class InfeasibilityError(SolverError):
    """The model has no feasible answer for the given input"""

    exit_code = 3


class InfeasibleServerCompute(InfeasibilityError):
    """The MEC server cannot meet the deadline even with infinite bandwidth (tau <= Iw/f0)"""

    def __init__(self, message: str, viewpoint: Optional[int] = None):
        self.viewpoint = viewpoint
        super().__init__(message)


class NotLocallyComputableError(InfeasibilityError):
    """A policy computes a viewpoint locally although tau <= Iw/f1"""

    def __init__(self, message: str, viewpoint: Optional[int] = None):
        self.viewpoint = viewpoint
        super().__init__(message)


class DomainError(InfeasibilityError):
    """A closed-form expression is evaluated outside its domain"""

    def __init__(self, term: str, message: str):
        self.term = term
        super().__init__(f"{term}: {message}")


class InfeasibleInitial(InfeasibilityError):
    """Local search was seeded with a policy that violates a constraint"""


# --- Size cap (exit 4) ---

class TooLarge(SolverError):
    """Instance exceeds a size cap: oracle enumeration or the knapsack backtrack table"""

    exit_code = 4
