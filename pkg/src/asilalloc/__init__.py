"""Cost- and latency-optimal ASIL decomposition, allocation and scheduling."""

from __future__ import annotations

from .decomposition import DecompositionScheme, enumerate_schemes, filter_compatible
from .instance import (
    AllocationSolution,
    Asil,
    DependencyEdge,
    Ecu,
    InstanceFormatError,
    Placement,
    ProblemInstance,
    Task,
    compute_decomposition_set,
    load_case_study,
    load_instance,
    save_instance,
    validate_instance,
)
from .milp import InfeasibleModelError, MilpModel, Priority, build_model
from .reliability import check_pmhf, check_pmhf_linear, pof, pof_decomposed
from .solver import SolveLimits, SolveReport, Status, resolve_schedule, solve
from .validation import validate_solution

__version__ = "0.1.0"

__all__ = [
    "AllocationSolution", "Asil", "DecompositionScheme", "DependencyEdge", "Ecu", "InfeasibleModelError",
    "InstanceFormatError", "MilpModel", "Placement", "Priority", "ProblemInstance", "SolveLimits", "SolveReport",
    "Status", "Task", "build_model", "check_pmhf", "check_pmhf_linear", "compute_decomposition_set",
    "enumerate_schemes", "filter_compatible", "load_case_study", "load_instance", "pof", "pof_decomposed",
    "resolve_schedule", "save_instance", "solve", "validate_instance", "validate_solution",
]
