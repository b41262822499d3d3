"""Core data models for nilkit library.

This module defines the validated value types shared by the kernel, field,
sensitivity and report modules: the physical Problem, the geometry factors
derived from it, the solved interface Root, the field Coefficients and the
result records produced by the computations.

All types are frozen dataclasses, so every instance is an immutable value
that can be shared freely between threads.
"""

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

from nilkit.core.exceptions import DegenerateGeometryError, DomainError

SUPPORTED_DIMENSIONS = (2, 3)


class Branch(str, Enum):
    """Computation path that produced an effective conductivity.

    - GENERAL_ROOT: interior volume fraction, root of the interface function
    - ALL_NONLINEAR: θ₁ = 1, the inclusion is made only of core material
    - ALL_LINEAR: θ₁ = 0, the inclusion is made only of coating material
    - LINEAR_CLOSED_FORM: p = 2, closed-form root cross-checked with Hashin-Shtrikman
    """

    GENERAL_ROOT = "GeneralRoot"
    ALL_NONLINEAR = "AllNonlinear"
    ALL_LINEAR = "AllLinear"
    LINEAR_CLOSED_FORM = "LinearClosedForm"


class RootStatus(str, Enum):
    """How the root solver terminated.

    - RESIDUAL: |f(x0)| reached the residual tolerance
    - BRACKET_COLLAPSED: the bracket shrank to the representable limit first
    - EXACT: f vanished exactly at the starting point
    """

    RESIDUAL = "Residual"
    BRACKET_COLLAPSED = "BracketCollapsed"
    EXACT = "Exact"


class Quantity(str, Enum):
    """Reportable quantities of a problem."""

    ROOT = "root"
    SIGMA = "sigma"
    DX0_DP = "dx0_dp"
    DSIGMA_DP = "dsigma_dp"
    DX0_DTHETA = "dx0_dtheta"
    DSIGMA_DTHETA = "dsigma_dtheta"


def _require_real(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(
            f"{name} must be a real number, got {type(value).__name__}",
            field_name=name,
            invalid_value=value,
        )
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}", field_name=name, invalid_value=value)
    return float(value)


@dataclass(frozen=True, slots=True)
class Problem:
    """Physical inputs of a coated inclusion.

    Attributes:
        sigma1: Core conductivity coefficient σ₁ (> 0)
        sigma2: Coating conductivity σ₂ (> 0)
        p: p-Laplacian exponent of the core (> 1)
        e_field: Applied field magnitude E (> 0)
        theta1: Core volume (3D) or area (2D) fraction θ₁ in [0, 1]
        dim: Spatial dimension d, 2 or 3

    Raises:
        DomainError: If any bound is violated (raised from __post_init__)

    Example:
        >>> prob = Problem(sigma1=10, sigma2=1, p=2, e_field=1, theta1=0.5, dim=3)
        >>> prob.theta2
        0.5
    """

    sigma1: float
    sigma2: float
    p: float
    e_field: float
    theta1: float
    dim: int = 3

    def __post_init__(self) -> None:
        """Validate every invariant.

        Raises:
            DomainError: Naming the first violated bound
        """
        sigma1 = _require_real("sigma1", self.sigma1)
        sigma2 = _require_real("sigma2", self.sigma2)
        p = _require_real("p", self.p)
        e_field = _require_real("e_field", self.e_field)
        theta1 = _require_real("theta1", self.theta1)

        if sigma1 <= 0:
            raise DomainError("sigma1 must be positive", field_name="sigma1", invalid_value=sigma1)
        if sigma2 <= 0:
            raise DomainError("sigma2 must be positive", field_name="sigma2", invalid_value=sigma2)
        if p <= 1:
            raise DomainError("p must exceed 1", field_name="p", invalid_value=p)
        if e_field <= 0:
            raise DomainError(
                "e_field must be positive", field_name="e_field", invalid_value=e_field
            )
        if not 0 <= theta1 <= 1:
            raise DomainError(
                "theta1 must lie in [0, 1]", field_name="theta1", invalid_value=theta1
            )
        dim = self.dim
        if not isinstance(dim, int) or isinstance(dim, bool) or dim not in SUPPORTED_DIMENSIONS:
            raise DomainError("dim must be 2 or 3", field_name="dim", invalid_value=self.dim)

    @property
    def theta2(self) -> float:
        """Coating fraction θ₂ = 1 − θ₁."""
        return 1.0 - self.theta1

    def with_(self, **changes: Any) -> "Problem":
        """Return a re-validated copy with some fields replaced."""
        return dataclasses.replace(self, **changes)

    def volume_constant(self) -> float:
        """Volume of the unit ball in d dimensions (area of the unit disk in 2D)."""
        return math.pi if self.dim == 2 else 4.0 * math.pi / 3.0

    def surface_constant(self) -> float:
        """Measure of the unit sphere (circle in 2D)."""
        return self.dim * self.volume_constant()


@dataclass(frozen=True, slots=True)
class GeometryFactors:
    """Scale-free geometry factors A and B.

    A = 1/θ₁ − 1 and B = (d−1)/θ₁ + 1 depend only on θ₁ and d, never on
    the radii, and satisfy B − (d−1)·A = d.
    """

    a_coef: float
    b_coef: float
    dim: int = 3

    def __post_init__(self) -> None:
        if self.a_coef < 0:
            raise DomainError(
                "a_coef must be nonnegative", field_name="a_coef", invalid_value=self.a_coef
            )
        if self.b_coef < self.dim * (1.0 - 1e-12):
            raise DomainError(
                f"b_coef must be at least {self.dim}",
                field_name="b_coef",
                invalid_value=self.b_coef,
            )


@dataclass(frozen=True, slots=True)
class Root:
    """Solved interface unknown x₀ = b₂/r_eᵈ.

    Attributes:
        x0: Zero of the interface function
        residual: |f(x0)| at exit
        bracket_lo: Lower end of the analytic bracket, −E/A
        bracket_hi: Upper end of the analytic bracket, E/B
        iterations: Solver iterations
        core_slope: Core field slope a₁ = E + A·x0, carried to full relative precision
        status: How the solver terminated
    """

    x0: float
    residual: float
    bracket_lo: float
    bracket_hi: float
    iterations: int
    core_slope: float
    status: RootStatus = RootStatus.RESIDUAL

    def __post_init__(self) -> None:
        if not self.bracket_lo < self.x0 < self.bracket_hi:
            raise DomainError(
                f"x0={self.x0!r} lies outside the open bracket "
                f"({self.bracket_lo!r}, {self.bracket_hi!r})",
                field_name="x0",
                invalid_value=self.x0,
            )
        if self.core_slope <= 0:
            raise DomainError(
                "core slope E + A*x0 must be positive",
                field_name="core_slope",
                invalid_value=self.core_slope,
            )
        if self.residual < 0 or self.iterations < 0:
            raise DomainError("residual and iterations must be nonnegative")


@dataclass(frozen=True, slots=True)
class Coefficients:
    """Field coefficients of one concrete coated inclusion.

    Core: u = a₁ r cosθ. Coating: u = (a₂ r + b₂/r^{d−1}) cosθ.
    """

    a1: float
    a2: float
    b2: float
    r_c: float
    r_e: float

    def __post_init__(self) -> None:
        if not 0 < self.r_c < self.r_e:
            raise DomainError(
                f"radii must satisfy 0 < r_c < r_e, got r_c={self.r_c}, r_e={self.r_e}",
                field_name="r_c",
                invalid_value=self.r_c,
            )


@dataclass(frozen=True, slots=True)
class EffectiveResult:
    """Effective conductivity with branch diagnostics.

    Attributes:
        sigma_star: Effective conductivity σ* = (σ₂/E)(E − d·x0)
        x0: Root used to compute sigma_star
        hs_value: Hashin-Shtrikman value, populated when p = 2
        branch: Computation path
        root: Full solver record for the GeneralRoot branch
    """

    sigma_star: float
    x0: float
    hs_value: float | None
    branch: Branch
    root: Root | None = None


@dataclass(frozen=True, slots=True)
class SensitivityReport:
    """Analytic partial derivatives with central finite-difference estimates."""

    dx0_dp: float
    dsigma_dp: float
    dx0_dtheta: float
    dsigma_dtheta: float
    fd_dx0_dp: float
    fd_dsigma_dp: float
    fd_dx0_dtheta: float
    fd_dsigma_dtheta: float
    max_rel_mismatch: float

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise DomainError(
                    f"{f.name} is not finite", field_name=f.name, invalid_value=value
                )


def validate_problem(
    sigma1: float,
    sigma2: float,
    p: float,
    e_field: float,
    theta1: float,
    dim: int = 3,
) -> Problem:
    """Build a Problem, raising DomainError on the first violated bound.

    Args:
        sigma1: Core conductivity coefficient
        sigma2: Coating conductivity
        p: Core exponent
        e_field: Applied field magnitude
        theta1: Core fraction
        dim: Spatial dimension

    Returns:
        Validated Problem (values are stored as given)

    Raises:
        DomainError: If any invariant fails

    Example:
        >>> validate_problem(10, 1, 1.0, 1, 0.5, 3)
        Traceback (most recent call last):
        ...
        nilkit.core.exceptions.DomainError: p must exceed 1
    """
    return Problem(
        sigma1=sigma1, sigma2=sigma2, p=p, e_field=e_field, theta1=theta1, dim=dim
    )


def geometry_factors(prob: Problem) -> GeometryFactors:
    """Compute A = 1/θ₁ − 1 and B = (d−1)/θ₁ + 1.

    Raises:
        DegenerateGeometryError: If θ₁ = 0 (route to the all-linear branch)
    """
    if prob.theta1 == 0:
        raise DegenerateGeometryError(
            "geometry factors are undefined at theta1 = 0; use the all-linear branch",
            field_name="theta1",
            invalid_value=prob.theta1,
        )
    theta1 = float(prob.theta1)
    return GeometryFactors(
        a_coef=1.0 / theta1 - 1.0,
        b_coef=(prob.dim - 1) / theta1 + 1.0,
        dim=prob.dim,
    )
