"""Reference tables, parameter sweeps and figure datasets.

Tables are θ₁ × p grids of x₀ or σ* for fixed σ₁, σ₂ and E. Sweeps vary p
or θ₁ along an inclusive linear grid and emit one column per requested
quantity. Every dataset is columnar (an ordered mapping from column name to
values) and can be written as CSV or JSON Lines.
"""

import csv
import json
import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from functools import partial
from typing import Any, TextIO

import numpy as np
from numpy.typing import NDArray

from nilkit.core.exceptions import (
    ConvergenceError,
    DomainError,
    InternalInconsistencyError,
    ShapeError,
)
from nilkit.core.golden import GoldenTable, load_golden, parse_entry
from nilkit.core.kernel import (
    DEFAULT_SOLVER,
    SolverConfig,
    effective_conductivity,
    hashin_shtrikman,
)
from nilkit.core.models import Problem, Quantity
from nilkit.core.parallel import num_threads, run_bounded
from nilkit.core.sensitivity import dsigma_dp, dsigma_dtheta, dx0_dp, dx0_dtheta

logger = logging.getLogger(__name__)

THETA_GRID = (0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0)
P_GRID = (1.1, 1.3, 1.6, 2.0, 2.7, 4.0, 10.0)

# Near-zero core fraction used for the θ₁ → 0 curve of the p-sweep figures
FIGURE_DILUTE_THETA = 1e-5

# Relative slack on "within one unit of the last printed digit"
_GUARD_SLACK = Decimal("1.000000001")

Dataset = dict[str, NDArray[np.float64]]
Columnar = Sequence[Any] | NDArray[Any]


def _strictly_increasing(values: Sequence[float]) -> bool:
    return all(a < b for a, b in zip(values, values[1:]))


@dataclass(frozen=True, slots=True)
class TableSpec:
    """A θ₁ × p table of x₀ or σ*.

    Attributes:
        e_field: Applied field E
        quantity: Quantity.ROOT or Quantity.SIGMA
        sigma1: Core conductivity coefficient
        sigma2: Coating conductivity
        theta_grid: Row values of θ₁, strictly increasing in [0, 1]
        p_grid: Column values of p, strictly increasing, all > 1
        dim: Spatial dimension
    """

    e_field: float
    quantity: Quantity
    sigma1: float = 10.0
    sigma2: float = 1.0
    theta_grid: tuple[float, ...] = THETA_GRID
    p_grid: tuple[float, ...] = P_GRID
    dim: int = 3

    def __post_init__(self) -> None:
        if self.quantity not in (Quantity.ROOT, Quantity.SIGMA):
            raise DomainError(
                "tables hold root or sigma values", field_name="quantity", invalid_value=self.quantity
            )
        for name, grid in (("theta_grid", self.theta_grid), ("p_grid", self.p_grid)):
            if not grid or not _strictly_increasing(grid):
                raise DomainError(
                    f"{name} must be nonempty and strictly increasing",
                    field_name=name,
                    invalid_value=grid,
                )
        if self.theta_grid[0] < 0 or self.theta_grid[-1] > 1:
            raise DomainError(
                "theta_grid must lie in [0, 1]", field_name="theta_grid", invalid_value=self.theta_grid
            )
        if self.p_grid[0] <= 1:
            raise DomainError("p_grid values must exceed 1", field_name="p_grid", invalid_value=self.p_grid)

    def problem(self, theta1: float, p: float) -> Problem:
        return Problem(
            sigma1=self.sigma1,
            sigma2=self.sigma2,
            p=p,
            e_field=self.e_field,
            theta1=theta1,
            dim=self.dim,
        )


REFERENCE_TABLES: dict[int, TableSpec] = {
    1: TableSpec(e_field=1.0, quantity=Quantity.ROOT),
    2: TableSpec(e_field=1.0, quantity=Quantity.SIGMA),
    3: TableSpec(e_field=0.7, quantity=Quantity.ROOT),
    4: TableSpec(e_field=0.7, quantity=Quantity.SIGMA),
    5: TableSpec(e_field=2.0, quantity=Quantity.ROOT),
    6: TableSpec(e_field=2.0, quantity=Quantity.SIGMA),
}


def table_spec(table_id: int) -> TableSpec:
    """TableSpec of reference table 1..6.

    Raises:
        DomainError: For unknown ids
    """
    try:
        return REFERENCE_TABLES[table_id]
    except KeyError:
        raise DomainError(
            f"table id must be one of {sorted(REFERENCE_TABLES)}",
            field_name="id",
            invalid_value=table_id,
        ) from None


def _cell_value(spec: TableSpec, theta1: float, p: float, cfg: SolverConfig) -> float:
    try:
        result = effective_conductivity(spec.problem(theta1, p), cfg)
    except ConvergenceError as e:
        raise e.with_cell((theta1, p)) from e
    return result.x0 if spec.quantity is Quantity.ROOT else result.sigma_star


def _table_row(spec: TableSpec, theta1: float, cfg: SolverConfig) -> list[float]:
    return [_cell_value(spec, theta1, p, cfg) for p in spec.p_grid]


def generate_table(spec: TableSpec, cfg: SolverConfig = DEFAULT_SOLVER) -> NDArray[np.float64]:
    """Compute every (θ₁, p) cell of a table.

    θ₁ = 0 and θ₁ = 1 rows use the closed-form branches.

    Returns:
        Array of shape (len(theta_grid), len(p_grid))

    Raises:
        ConvergenceError: With the failing cell attached as `cell`

    Example:
        >>> table = generate_table(REFERENCE_TABLES[6])
        >>> round(float(table[-1, -1]), 6)
        2560.0
    """
    logger.info(f"generating {spec.quantity.value} table for E={spec.e_field}")
    rows = [_table_row(spec, theta1, cfg) for theta1 in spec.theta_grid]
    return np.array(rows, dtype=np.float64)


async def agenerate_table(
    spec: TableSpec,
    cfg: SolverConfig = DEFAULT_SOLVER,
    threads: int | None = None,
) -> NDArray[np.float64]:
    """Async generate_table; rows run in worker threads and are assembled by index."""
    logger.info(f"generating {spec.quantity.value} table for E={spec.e_field} (async)")
    rows = await run_bounded(
        [partial(_table_row, spec, theta1, cfg) for theta1 in spec.theta_grid],
        num_threads(threads),
    )
    return np.array(rows, dtype=np.float64)


def table_dataset(spec: TableSpec, matrix: NDArray[np.float64]) -> Dataset:
    """Columnar view of a table: a theta1 column, then one column per p."""
    columns: Dataset = {"theta1": np.array(spec.theta_grid, dtype=np.float64)}
    for j, p in enumerate(spec.p_grid):
        columns[f"p={p:g}"] = matrix[:, j]
    return columns


@dataclass(frozen=True, slots=True)
class GoldenMismatch:
    """One cell whose computed value does not reproduce the reference entry."""

    theta1: float
    p: float
    computed: float
    golden: str
    delta: float


@dataclass(frozen=True, slots=True)
class GoldenDiffReport:
    """Result of comparing a computed table with its reference.

    Attributes:
        table_id: Reference table compared against
        mismatches: Cells that fail, in row-major order
        notes: Cells accepted only through the rounding guard, and every erratum
    """

    table_id: int
    mismatches: tuple[GoldenMismatch, ...]
    notes: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.mismatches


def _rounded(value: float, quantum: Decimal) -> Decimal:
    exact = Decimal(value)
    return (exact / quantum).quantize(Decimal(1), rounding=ROUND_HALF_UP) * quantum


def format_like(value: float, entry: str) -> str:
    """Round value half-up to the precision of a printed entry.

    Example:
        >>> format_like(-1706.333, "-1710")
        '-1710'
    """
    _, quantum = parse_entry(entry)
    return format(_rounded(value, quantum), "f")


def golden_diff(
    computed: NDArray[np.float64],
    table_id: int,
    golden: GoldenTable | None = None,
) -> GoldenDiffReport:
    """Compare a computed table with a reference table at printed precision.

    A cell matches when the computed value, rounded half-up to the unit of the
    entry's last printed digit, equals the entry. A cell that misses by at
    most one such unit is accepted through the rounding guard and recorded in
    notes. Cells listed as errata are compared against their corrected value
    and are always recorded in notes.

    Args:
        computed: Matrix from generate_table
        table_id: Reference table id
        golden: Preloaded reference table (loaded from package data when omitted)

    Raises:
        ShapeError: If computed does not have the reference shape
        GoldenDataError: If the reference table cannot be loaded
    """
    if golden is None:
        golden = load_golden(table_id)
    actual = tuple(int(n) for n in np.shape(computed))
    if actual != golden.shape:
        raise ShapeError(
            f"computed table has shape {actual}, reference table {table_id} has {golden.shape}",
            expected=golden.shape,
            actual=actual,
            table_id=table_id,
        )

    mismatches: list[GoldenMismatch] = []
    notes: list[str] = []
    for i, theta1 in enumerate(golden.theta_grid):
        for j, p in enumerate(golden.p_grid):
            value = float(computed[i, j])
            reference = golden.cells[i][j]
            erratum = golden.erratum_for(i, j)
            if erratum is not None:
                reference = erratum.corrected
                notes.append(
                    f"cell (theta1={theta1:g}, p={p:g}): printed {erratum.printed}, "
                    f"compared against {erratum.corrected}: {erratum.note}"
                )

            expected, quantum = parse_entry(reference)
            if _rounded(value, quantum) == expected:
                continue
            if abs(Decimal(value) - expected) <= quantum * _GUARD_SLACK:
                notes.append(
                    f"cell (theta1={theta1:g}, p={p:g}): computed {value:.6g} accepted against "
                    f"{reference} within one unit of the last printed digit"
                )
                continue
            mismatches.append(
                GoldenMismatch(
                    theta1=theta1,
                    p=p,
                    computed=value,
                    golden=reference,
                    delta=value - float(expected),
                )
            )

    for note in notes:
        logger.warning(f"table {table_id}: {note}")
    return GoldenDiffReport(table_id=table_id, mismatches=tuple(mismatches), notes=tuple(notes))


class Axis(str, Enum):
    """Swept parameter."""

    P = "p"
    THETA1 = "theta1"


@dataclass(frozen=True, slots=True)
class SweepSpec:
    """Inclusive linear sweep of p or θ₁.

    Attributes:
        axis: Swept parameter
        lo: First grid value
        hi: Last grid value
        n_points: Number of grid points (≥ 2 unless lo == hi)
        fixed: Problem supplying every other parameter; its value of the
            swept field is ignored
        quantities: Columns to emit, in order
    """

    axis: Axis
    lo: float
    hi: float
    n_points: int
    fixed: Problem
    quantities: tuple[Quantity, ...] = (Quantity.SIGMA,)

    def __post_init__(self) -> None:
        if self.n_points < 1 or (self.n_points == 1 and self.lo != self.hi):
            raise DomainError(
                "n_points must be at least 2 for a nonempty range",
                field_name="n_points",
                invalid_value=self.n_points,
            )
        if self.lo > self.hi:
            raise DomainError("sweep range must satisfy lo <= hi", field_name="lo", invalid_value=self.lo)
        if not self.quantities:
            raise DomainError("at least one quantity is required", field_name="quantities")
        if self.axis is Axis.P and self.lo <= 1:
            raise DomainError("p sweep must stay above 1", field_name="lo", invalid_value=self.lo)
        if self.axis is Axis.THETA1 and (self.lo < 0 or self.hi > 1):
            raise DomainError(
                "theta1 sweep must stay within [0, 1]", field_name="lo", invalid_value=(self.lo, self.hi)
            )

    def grid(self) -> NDArray[np.float64]:
        return np.linspace(self.lo, self.hi, self.n_points)


_DERIVATIVES: dict[Quantity, Callable[..., float]] = {
    Quantity.DX0_DP: dx0_dp,
    Quantity.DSIGMA_DP: dsigma_dp,
    Quantity.DX0_DTHETA: dx0_dtheta,
    Quantity.DSIGMA_DTHETA: dsigma_dtheta,
}


def _sweep_point(spec: SweepSpec, value: float, cfg: SolverConfig) -> list[float]:
    prob = spec.fixed.with_(**{spec.axis.value: float(value)})
    result = effective_conductivity(prob, cfg)
    row = []
    for quantity in spec.quantities:
        if quantity is Quantity.ROOT:
            row.append(result.x0)
        elif quantity is Quantity.SIGMA:
            row.append(result.sigma_star)
        else:
            row.append(_DERIVATIVES[quantity](prob, result.root, cfg))
    if spec.axis is Axis.THETA1:
        row.append(hashin_shtrikman(prob))
    return row


def _assemble(spec: SweepSpec, rows: list[list[float]]) -> Dataset:
    grid = spec.grid()
    values = np.array(rows, dtype=np.float64).reshape(len(grid), -1)
    names = [q.value for q in spec.quantities]
    if spec.axis is Axis.THETA1:
        names.append("hs")
    columns: Dataset = {spec.axis.value: grid}
    for k, name in enumerate(names):
        columns[name] = values[:, k]
    if not all(np.all(np.isfinite(column)) for column in columns.values()):
        raise InternalInconsistencyError(
            "sweep produced non-finite values", residuals=(float("nan"),)
        )
    return columns


def sweep(spec: SweepSpec, cfg: SolverConfig = DEFAULT_SOLVER) -> Dataset:
    """Evaluate the requested quantities along the sweep grid.

    A θ₁ sweep also carries an "hs" column with the Hashin-Shtrikman value.

    Returns:
        Columns: the swept parameter, one per quantity, then "hs" for θ₁ sweeps
    """
    logger.info(f"sweeping {spec.axis.value} over [{spec.lo}, {spec.hi}] ({spec.n_points} points)")
    rows = [_sweep_point(spec, value, cfg) for value in spec.grid()]
    return _assemble(spec, rows)


async def asweep(
    spec: SweepSpec,
    cfg: SolverConfig = DEFAULT_SOLVER,
    threads: int | None = None,
) -> Dataset:
    """Async sweep; grid points run in worker threads and are assembled by index."""
    rows = await run_bounded(
        [partial(_sweep_point, spec, float(value), cfg) for value in spec.grid()],
        num_threads(threads),
    )
    return _assemble(spec, rows)


@dataclass(frozen=True, slots=True)
class FigureSpec:
    """A family of curves: one sweep per curve value of the other parameter."""

    name: str
    axis: Axis
    quantity: Quantity
    e_field: float
    curves: tuple[float, ...]
    lo: float
    hi: float
    sigma1: float = 10.0
    sigma2: float = 1.0
    dim: int = 3


_P_CURVES = (FIGURE_DILUTE_THETA,) + THETA_GRID[1:]

FIGURES: dict[str, FigureSpec] = {
    spec.name: spec
    for spec in (
        FigureSpec("root-vs-p-E1", Axis.P, Quantity.ROOT, 1.0, _P_CURVES, 1.1, 10.0),
        FigureSpec("sigma-vs-p-E1", Axis.P, Quantity.SIGMA, 1.0, _P_CURVES, 1.1, 10.0),
        FigureSpec("sigma-vs-theta1-E1", Axis.THETA1, Quantity.SIGMA, 1.0, P_GRID, 0.0, 1.0),
        FigureSpec("root-vs-p-E0.7", Axis.P, Quantity.ROOT, 0.7, _P_CURVES, 1.1, 10.0),
        FigureSpec("sigma-vs-p-E0.7", Axis.P, Quantity.SIGMA, 0.7, _P_CURVES, 1.1, 10.0),
        FigureSpec("sigma-vs-theta1-E0.7", Axis.THETA1, Quantity.SIGMA, 0.7, P_GRID, 0.0, 1.0),
        FigureSpec("sigma-vs-theta1-E2", Axis.THETA1, Quantity.SIGMA, 2.0, P_GRID, 0.0, 1.0),
    )
}


def figure_dataset(
    name: str, n_points: int = 101, cfg: SolverConfig = DEFAULT_SOLVER
) -> Dataset:
    """Data behind a named figure family.

    p-sweep families draw the θ₁ → 0 curve at θ₁ = 1e−5 rather than 0; the
    exact θ₁ = 0 value (σ* = σ₂) agrees with it to plotting precision.

    Returns:
        Columns: the swept parameter, one column per curve named
        "<other parameter>=<value>", and "hs" for θ₁ families

    Raises:
        DomainError: For unknown figure names
    """
    try:
        fig = FIGURES[name]
    except KeyError:
        raise DomainError(
            f"unknown figure {name!r}; expected one of {sorted(FIGURES)}",
            field_name="figure",
            invalid_value=name,
        ) from None

    other = Axis.THETA1 if fig.axis is Axis.P else Axis.P
    placeholder = {Axis.P: 2.0, Axis.THETA1: 0.5}
    columns: Dataset = {}
    hs: NDArray[np.float64] | None = None
    for curve in fig.curves:
        fixed = Problem(
            sigma1=fig.sigma1,
            sigma2=fig.sigma2,
            p=curve if other is Axis.P else placeholder[Axis.P],
            e_field=fig.e_field,
            theta1=curve if other is Axis.THETA1 else placeholder[Axis.THETA1],
            dim=fig.dim,
        )
        data = sweep(SweepSpec(fig.axis, fig.lo, fig.hi, n_points, fixed, (fig.quantity,)), cfg)
        columns.setdefault(fig.axis.value, data[fig.axis.value])
        columns[f"{other.value}={curve:g}"] = data[fig.quantity.value]
        if "hs" in data:
            hs = data["hs"]
    if hs is not None:
        columns["hs"] = hs
    return columns


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        return value.item()
    return value


def _format(value: Any) -> str:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _length(dataset: Mapping[str, Columnar]) -> int:
    lengths = {len(column) for column in dataset.values()}
    if len(lengths) > 1:
        raise DomainError("dataset columns have different lengths", field_name="dataset")
    return lengths.pop() if lengths else 0


def write_csv(dataset: Mapping[str, Columnar], stream: TextIO) -> None:
    """Write a columnar dataset as CSV with a header row and LF line endings.

    Floats are written with 17 significant digits, None as an empty field.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(list(dataset))
    for i in range(_length(dataset)):
        writer.writerow([_format(column[i]) for column in dataset.values()])


def write_jsonl(dataset: Mapping[str, Columnar], stream: TextIO) -> None:
    """Write a columnar dataset as JSON Lines, one object per row."""
    for i in range(_length(dataset)):
        record = {name: _plain(column[i]) for name, column in dataset.items()}
        stream.write(json.dumps(record) + "\n")
