"""Exception hierarchy for nilkit library.

This module defines all custom exceptions used throughout the library,
following a hierarchical structure for granular error handling.
"""

from typing import Any


class NeutralInclusionError(Exception):
    """Base exception for all nilkit errors.

    Usage: Catch this to handle any library error.
    """


class DomainError(NeutralInclusionError):
    """An input violates one of the problem's admissible bounds.

    Attributes:
        field_name: Name of the offending parameter (if known)
        invalid_value: Value that was rejected
    """

    def __init__(
        self,
        message: str,
        field_name: str | None = None,
        invalid_value: Any = None,
    ) -> None:
        """Initialize DomainError with the violated parameter.

        Args:
            message: Error description naming the bound
            field_name: Name of the parameter that failed validation
            invalid_value: The rejected value
        """
        super().__init__(message)
        self.field_name = field_name
        self.invalid_value = invalid_value


class DegenerateGeometryError(DomainError):
    """Geometry factors or a field were requested where the core vanishes (θ₁ = 0)."""


class StepError(DomainError):
    """A finite-difference step would leave the admissible parameter domain.

    Attributes:
        parameter: Parameter being perturbed ("p" or "theta1")
        step: The step that overshoots
    """

    def __init__(self, message: str, parameter: str, step: float) -> None:
        super().__init__(message, field_name=parameter, invalid_value=step)
        self.parameter = parameter
        self.step = step


class ConvergenceError(NeutralInclusionError):
    """Root solver exhausted its iteration budget.

    Attributes:
        bracket_lo: Lower end of the last bracket
        bracket_hi: Upper end of the last bracket
        iterations: Iterations performed
        cell: (theta1, p) table cell when raised during table generation
    """

    def __init__(
        self,
        message: str,
        bracket_lo: float,
        bracket_hi: float,
        iterations: int,
        cell: tuple[float, float] | None = None,
    ) -> None:
        """Initialize ConvergenceError with the last bracket.

        Args:
            message: Error description
            bracket_lo: Lower bracket end at exit
            bracket_hi: Upper bracket end at exit
            iterations: Number of iterations performed
            cell: Optional table cell coordinates (theta1, p)
        """
        super().__init__(message)
        self.bracket_lo = bracket_lo
        self.bracket_hi = bracket_hi
        self.iterations = iterations
        self.cell = cell

    def with_cell(self, cell: tuple[float, float]) -> "ConvergenceError":
        """Return a copy of this error tagged with table cell coordinates."""
        theta1, p = cell
        return ConvergenceError(
            f"{self} (table cell theta1={theta1:g}, p={p:g})",
            self.bracket_lo,
            self.bracket_hi,
            self.iterations,
            cell=cell,
        )


class InternalInconsistencyError(NeutralInclusionError):
    """A constructed field violates its own transmission conditions.

    Attributes:
        residuals: The residuals that were checked
    """

    def __init__(self, message: str, residuals: tuple[float, ...]) -> None:
        super().__init__(message)
        self.residuals = residuals


class GoldenDataError(NeutralInclusionError):
    """Reference table data is missing, unreadable or malformed.

    Attributes:
        table_id: Table identifier (if known)
        line: Line number of error (if available)
        column: Column number of error (if available)
    """

    def __init__(
        self,
        message: str,
        table_id: int | None = None,
        line: int | None = None,
        column: int | None = None,
    ) -> None:
        """Initialize GoldenDataError with location details.

        Args:
            message: Error description
            table_id: Reference table the data belongs to
            line: Line number where error occurred
            column: Column number where error occurred
        """
        super().__init__(message)
        self.table_id = table_id
        self.line = line
        self.column = column


class ShapeError(GoldenDataError):
    """Computed matrix shape differs from the reference table shape.

    Attributes:
        expected: Shape of the reference table
        actual: Shape of the computed matrix
    """

    def __init__(
        self,
        message: str,
        expected: tuple[int, ...],
        actual: tuple[int, ...],
        table_id: int | None = None,
    ) -> None:
        super().__init__(message, table_id=table_id)
        self.expected = expected
        self.actual = actual


class ConfigurationError(NeutralInclusionError):
    """Invalid run configuration (config file, environment variable or flags).

    Attributes:
        parameter_name: Offending key (if known)
        line: Config file line number (if applicable)
    """

    def __init__(
        self,
        message: str,
        parameter_name: str | None = None,
        line: int | None = None,
    ) -> None:
        super().__init__(message)
        self.parameter_name = parameter_name
        self.line = line
