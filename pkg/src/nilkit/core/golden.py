"""Loader for the reference tables shipped with nilkit.

Each table lives in ``nilkit/data/golden/table<N>.yaml``. Entries are stored
as strings exactly as printed ("-0.00", "-3.", "-1710") so the precision of
every entry is recovered from its text instead of being re-typed.
"""

import logging
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from typing import Any, Dict

import yaml

from nilkit.core.exceptions import GoldenDataError
from nilkit.core.models import Quantity

logger = logging.getLogger(__name__)

TABLE_IDS = (1, 2, 3, 4, 5, 6)

REQUIRED_KEYS = (
    "table_id",
    "caption",
    "quantity",
    "e_field",
    "sigma1",
    "sigma2",
    "dim",
    "theta1",
    "p",
    "rows",
)
OPTIONAL_KEYS = ("errata",)

# Integers with more digits than this treat trailing zeros as insignificant
_SIGNIFICANT_INTEGER_DIGITS = 2


@dataclass(frozen=True, slots=True)
class Erratum:
    """A printed cell that is replaced by a corrected reference value.

    Attributes:
        theta1: Row coordinate
        p: Column coordinate
        printed: Value as printed
        corrected: Value compared against instead, at the same precision
        note: Why the printed value is not used
    """

    theta1: float
    p: float
    printed: str
    corrected: str
    note: str


@dataclass(frozen=True, slots=True)
class GoldenTable:
    """One reference table with string entries."""

    table_id: int
    caption: str
    quantity: Quantity
    e_field: float
    sigma1: float
    sigma2: float
    dim: int
    theta_grid: tuple[float, ...]
    p_grid: tuple[float, ...]
    cells: tuple[tuple[str, ...], ...]
    errata: tuple[Erratum, ...] = ()

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.theta_grid), len(self.p_grid)

    def erratum_for(self, row: int, col: int) -> Erratum | None:
        """Erratum registered for cell (row, col), if any."""
        theta1, p = self.theta_grid[row], self.p_grid[col]
        for erratum in self.errata:
            if erratum.theta1 == theta1 and erratum.p == p:
                return erratum
        return None


def parse_entry(text: str) -> tuple[Decimal, Decimal]:
    """Parse a printed entry into its value and the unit of its last digit.

    Decimals count after the point ("-3." has unit 1, "13.8" unit 0.1).
    Integers of up to two digits have unit 1; longer integers treat trailing
    zeros as rounding ("-1710" and "2560" have unit 10).

    Raises:
        GoldenDataError: If text is not a decimal number

    Example:
        >>> parse_entry("-1710")
        (Decimal('-1710'), Decimal('10'))
    """
    stripped = text.strip()
    try:
        value = Decimal(stripped)
    except InvalidOperation as e:
        raise GoldenDataError(f"not a decimal entry: {text!r}") from e
    if not value.is_finite():
        raise GoldenDataError(f"not a finite entry: {text!r}")

    digits = stripped.lstrip("+-")
    if "." in digits:
        decimals = len(digits) - digits.index(".") - 1
        return value, Decimal(1).scaleb(-decimals)
    if len(digits) <= _SIGNIFICANT_INTEGER_DIGITS:
        return value, Decimal(1)
    zeros = len(digits) - len(digits.rstrip("0"))
    return value, Decimal(1).scaleb(zeros)


def _golden_path(table_id: int) -> Path:
    resource = resources.files("nilkit") / "data" / "golden" / f"table{table_id}.yaml"
    return Path(str(resource))


def load_golden(table_id: int, path: Path | None = None) -> GoldenTable:
    """Load a reference table from the package data or an override file.

    Args:
        table_id: Table identifier 1..6
        path: Optional YAML file replacing the shipped table

    Returns:
        Validated GoldenTable

    Raises:
        GoldenDataError: If the file is missing, is not valid YAML, or lacks
            required keys or consistent dimensions
    """
    if path is None:
        if table_id not in TABLE_IDS:
            raise GoldenDataError(
                f"unknown table id {table_id}; expected one of {TABLE_IDS}", table_id=table_id
            )
        path = _golden_path(table_id)

    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise GoldenDataError(f"reference table not found: {path}", table_id=table_id) from e
    except UnicodeDecodeError as e:
        raise GoldenDataError(
            f"reference table contains invalid UTF-8: {path}", table_id=table_id
        ) from e

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        problem = getattr(e, "problem", str(e))
        if mark:
            raise GoldenDataError(
                f"Invalid YAML syntax in {path} at line {mark.line + 1}, "
                f"column {mark.column + 1}: {problem}",
                table_id=table_id,
                line=mark.line + 1,
                column=mark.column + 1,
            ) from e
        raise GoldenDataError(f"Invalid YAML syntax in {path}: {e}", table_id=table_id) from e

    if not isinstance(data, dict):
        raise GoldenDataError(
            f"reference table must be a YAML mapping, got {type(data).__name__}: {path}",
            table_id=table_id,
        )
    return _build_table(data, table_id, path)


def _build_table(data: Dict[str, Any], table_id: int, path: Path) -> GoldenTable:
    missing = [key for key in REQUIRED_KEYS if key not in data]
    if missing:
        raise GoldenDataError(
            f"Required field(s) {', '.join(missing)} missing in {path}", table_id=table_id
        )
    unknown = set(data) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS)
    if unknown:
        logger.debug(f"Unknown fields in {path} (will be ignored): {', '.join(sorted(unknown))}")

    if data["table_id"] != table_id:
        raise GoldenDataError(
            f"{path} holds table {data['table_id']}, expected {table_id}", table_id=table_id
        )

    try:
        quantity = Quantity(data["quantity"])
        theta_grid = tuple(float(v) for v in data["theta1"])
        p_grid = tuple(float(v) for v in data["p"])
        cells = tuple(tuple(str(entry) for entry in row) for row in data["rows"])
    except (TypeError, ValueError) as e:
        raise GoldenDataError(f"malformed reference table {path}: {e}", table_id=table_id) from e

    if quantity not in (Quantity.ROOT, Quantity.SIGMA):
        raise GoldenDataError(
            f"reference tables hold root or sigma values, got {quantity.value}", table_id=table_id
        )
    if len(cells) != len(theta_grid) or any(len(row) != len(p_grid) for row in cells):
        raise GoldenDataError(
            f"rows of {path} do not match the {len(theta_grid)}x{len(p_grid)} grid",
            table_id=table_id,
        )
    for row in cells:
        for entry in row:
            parse_entry(entry)

    errata = []
    for raw in data.get("errata") or []:
        try:
            erratum = Erratum(
                theta1=float(raw["theta1"]),
                p=float(raw["p"]),
                printed=str(raw["printed"]),
                corrected=str(raw["corrected"]),
                note=str(raw.get("note", "")),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise GoldenDataError(f"malformed erratum in {path}: {raw!r}", table_id=table_id) from e
        if erratum.theta1 not in theta_grid or erratum.p not in p_grid:
            raise GoldenDataError(
                f"erratum cell ({erratum.theta1}, {erratum.p}) is not on the grid of {path}",
                table_id=table_id,
            )
        parse_entry(erratum.corrected)
        errata.append(erratum)

    logger.debug(f"loaded reference table {table_id} ({len(errata)} errata) from {path}")
    return GoldenTable(
        table_id=table_id,
        caption=str(data["caption"]),
        quantity=quantity,
        e_field=float(data["e_field"]),
        sigma1=float(data["sigma1"]),
        sigma2=float(data["sigma2"]),
        dim=int(data["dim"]),
        theta_grid=theta_grid,
        p_grid=p_grid,
        cells=cells,
        errata=tuple(errata),
    )
