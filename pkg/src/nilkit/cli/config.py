"""Run configuration for the nilkit command line.

A run is configured from an optional flat ``key = value`` file and from
command-line flags; flags win. The merged values are validated by a pydantic
model so every numeric field accepts decimal and scientific notation with a
``.`` decimal point regardless of locale.
"""

import logging
import re
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from nilkit.core.exceptions import ConfigurationError
from nilkit.core.kernel import SolverConfig
from nilkit.core.models import Problem, Quantity
from nilkit.core.report import Axis

logger = logging.getLogger(__name__)

_LINE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")


class Command(str, Enum):
    """CLI subcommands."""

    SOLVE = "solve"
    FIELD = "field"
    SENS = "sens"
    TABLE = "table"
    SWEEP = "sweep"
    VERIFY = "verify"


class OutputFormat(str, Enum):
    """Data formats written to the output stream."""

    CSV = "csv"
    JSONL = "jsonl"


class RunConfig(BaseModel):
    """Validated settings of one CLI invocation.

    Physical bounds (p > 1, 0 ≤ θ₁ ≤ 1, ...) are left to Problem so that the
    diagnostic names the violated bound; this model only checks types and
    the plumbing ranges (counts, tolerances).
    """

    model_config = ConfigDict(extra="forbid", frozen=True, str_strip_whitespace=True)

    command: Command
    sigma1: float = 10.0
    sigma2: float = 1.0
    p: float = 2.0
    e_field: float = 1.0
    theta1: float = 0.5
    dim: int = 3

    output: Path | None = None
    format: OutputFormat = OutputFormat.CSV

    abs_tol: float | None = Field(default=None, gt=0)
    x_tol: float | None = Field(default=None, gt=0)
    max_iter: int = Field(default=200, ge=1)
    threads: int | None = Field(default=None, ge=1)

    # field
    r_e: float = 1.0
    points: int = Field(default=100, ge=1)
    step: float = Field(default=1e-3, gt=0)
    quad_order: int = Field(default=32, ge=4)

    # sens
    fd_step: float = Field(default=1e-6, gt=0)

    # table / verify
    table_id: int | None = None
    golden: Path | None = None

    # sweep
    axis: Axis = Axis.THETA1
    lo: float = 0.0
    hi: float = 1.0
    n_points: int = Field(default=101, ge=1)
    quantities: tuple[Quantity, ...] = (Quantity.SIGMA,)
    figure: str | None = None

    def problem(self) -> Problem:
        """Problem described by the physical fields.

        Raises:
            DomainError: If a physical bound is violated
        """
        return Problem(
            sigma1=self.sigma1,
            sigma2=self.sigma2,
            p=self.p,
            e_field=self.e_field,
            theta1=self.theta1,
            dim=self.dim,
        )

    def solver(self) -> SolverConfig:
        return SolverConfig(abs_tol=self.abs_tol, x_tol=self.x_tol, max_iter=self.max_iter)


CONFIG_KEYS = frozenset(RunConfig.model_fields) - {"command"}

# Common misspellings of config keys
TYPO_MAP = {
    "sigma_1": "sigma1",
    "sigma_2": "sigma2",
    "e": "e_field",
    "E": "e_field",
    "field": "e_field",
    "theta": "theta1",
    "theta_1": "theta1",
    "re": "r_e",
    "radius": "r_e",
    "n": "n_points",
    "tol": "abs_tol",
    "tolerance": "abs_tol",
    "id": "table_id",
    "num_threads": "threads",
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse flat ``key = value`` text.

    Blank lines and ``#`` comments (whole-line or trailing) are ignored.
    Unknown keys are logged as warnings, with a hint for common typos, and
    dropped.

    Raises:
        ConfigurationError: On a line that is not ``key = value`` or on a
            repeated key
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.match(line)
        if match is None:
            raise ConfigurationError(
                f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}", line=lineno
            )
        key, value = match.group(1), match.group(2).strip()
        if key in TYPO_MAP:
            logger.warning(f"Possible typo in {source}:{lineno}: '{key}' should be '{TYPO_MAP[key]}'")
            continue
        if key not in CONFIG_KEYS:
            logger.warning(f"Unknown key in {source}:{lineno} (will be ignored): '{key}'")
            continue
        if key in values:
            raise ConfigurationError(
                f"{source}:{lineno}: key '{key}' given twice", parameter_name=key, line=lineno
            )
        values[key] = value
    return values


def load_config_file(path: Path) -> dict[str, str]:
    """Read and parse a config file.

    Raises:
        ConfigurationError: If the file cannot be read or parsed
    """
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise ConfigurationError(f"config file not found: {path}") from e
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}") from e
    return parse_config_text(text, source=str(path))


def _split_list(value: object) -> object:
    if isinstance(value, str):
        return tuple(item.strip() for item in value.split(",") if item.strip())
    return value


def build_run_config(
    command: Command,
    flags: dict[str, object],
    config_path: Path | None = None,
) -> RunConfig:
    """Merge the config file with explicit flags and validate.

    Args:
        command: Subcommand being run
        flags: Flag values; None means "not given"
        config_path: Optional config file

    Raises:
        ConfigurationError: If the file or any merged value is invalid
    """
    merged: dict[str, object] = {}
    if config_path is not None:
        merged.update(load_config_file(config_path))
    merged.update({key: value for key, value in flags.items() if value is not None})
    if "quantities" in merged:
        merged["quantities"] = _split_list(merged["quantities"])

    try:
        return RunConfig.model_validate({"command": command, **merged})
    except ValidationError as e:
        first = e.errors()[0]
        name = ".".join(str(part) for part in first["loc"])
        raise ConfigurationError(
            f"invalid value for {name}: {first['msg']}", parameter_name=name
        ) from e
