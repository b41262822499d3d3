"""nilkit: nonlinear neutral coated inclusions.

This library computes the coating parameters that make a p-Laplacian core
inside a linear coating invisible to a uniform applied field, the resulting
effective conductivity, the full piecewise field, analytic sensitivities,
and reference tables, sweeps and figure datasets.
"""

import logging

# Add NullHandler to prevent "No handlers found" warnings (Python library standard)
logging.getLogger(__name__).addHandler(logging.NullHandler())

# Public API exports
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
from nilkit.core.field import (
    FieldSolution,
    build_field,
    energy_identity,
    eval_field,
    harmonicity_check,
    residuals,
    scale_invariance_check,
)
from nilkit.core.kernel import (
    SolverConfig,
    effective_conductivity,
    hashin_shtrikman,
    hs_bounds,
    solve_root,
)
from nilkit.core.models import (
    Branch,
    EffectiveResult,
    Problem,
    Quantity,
    Root,
    geometry_factors,
    validate_problem,
)
from nilkit.core.report import (
    REFERENCE_TABLES,
    SweepSpec,
    TableSpec,
    generate_table,
    golden_diff,
    sweep,
)
from nilkit.core.sensitivity import full_report, regime_classify

__version__ = "0.1.0"

__all__ = [
    # Models
    "Problem",
    "Root",
    "EffectiveResult",
    "Branch",
    "Quantity",
    "validate_problem",
    "geometry_factors",
    # Kernel
    "SolverConfig",
    "solve_root",
    "effective_conductivity",
    "hashin_shtrikman",
    "hs_bounds",
    # Field
    "FieldSolution",
    "build_field",
    "eval_field",
    "residuals",
    "harmonicity_check",
    "energy_identity",
    "scale_invariance_check",
    # Sensitivity
    "full_report",
    "regime_classify",
    # Report
    "TableSpec",
    "SweepSpec",
    "REFERENCE_TABLES",
    "generate_table",
    "golden_diff",
    "sweep",
    # Base exceptions
    "NeutralInclusionError",
    # Input exceptions
    "DomainError",
    "DegenerateGeometryError",
    "StepError",
    # Solver exceptions
    "ConvergenceError",
    "InternalInconsistencyError",
    # Data and configuration exceptions
    "GoldenDataError",
    "ShapeError",
    "ConfigurationError",
]
