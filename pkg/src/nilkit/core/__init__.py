"""Core module for nilkit library.

This module holds the computations (kernel, field, sensitivity, report) and
the types they share. It does not depend on the command line package.
"""

from nilkit.core.exceptions import (
    ConfigurationError,
    ConvergenceError,
    DegenerateGeometryError,
    DomainError,
    GoldenDataError,
    InternalInconsistencyError,
    NeutralInclusionError,
    ShapeError,
    StepError,
)
from nilkit.core.golden import GoldenTable, load_golden
from nilkit.core.kernel import DEFAULT_SOLVER, SolverConfig
from nilkit.core.models import (
    Branch,
    Coefficients,
    EffectiveResult,
    GeometryFactors,
    Problem,
    Quantity,
    Root,
    RootStatus,
    SensitivityReport,
)

__all__ = [
    # Models
    "Problem",
    "GeometryFactors",
    "Root",
    "RootStatus",
    "Coefficients",
    "EffectiveResult",
    "SensitivityReport",
    "Branch",
    "Quantity",
    # Solver settings
    "SolverConfig",
    "DEFAULT_SOLVER",
    # Reference data
    "GoldenTable",
    "load_golden",
    # Exceptions
    "NeutralInclusionError",
    "DomainError",
    "DegenerateGeometryError",
    "StepError",
    "ConvergenceError",
    "InternalInconsistencyError",
    "GoldenDataError",
    "ShapeError",
    "ConfigurationError",
]
