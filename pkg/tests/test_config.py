"""Tests for run configuration: config-file parsing, merging and validation."""

import logging
from pathlib import Path

import pytest
from pydantic import ValidationError

from nilkit.cli.config import (
    CONFIG_KEYS,
    TYPO_MAP,
    Command,
    OutputFormat,
    RunConfig,
    build_run_config,
    load_config_file,
    parse_config_text,
)
from nilkit.core.exceptions import ConfigurationError, DomainError
from nilkit.core.kernel import SolverConfig
from nilkit.core.models import Problem, Quantity
from nilkit.core.report import Axis


def test_parse_simple_file():
    text = """
    # coated sphere
    sigma1 = 10
    p = 2.5   # trailing comment
    e_field=1.0e0

    """
    assert parse_config_text(text) == {"sigma1": "10", "p": "2.5", "e_field": "1.0e0"}


def test_parse_rejects_malformed_line():
    with pytest.raises(ConfigurationError) as exc:
        parse_config_text("p = 2\nthis is not a pair\n", source="run.cfg")
    assert exc.value.line == 2
    assert "run.cfg:2" in str(exc.value)


def test_parse_rejects_duplicate_key():
    with pytest.raises(ConfigurationError) as exc:
        parse_config_text("p = 2\np = 3\n")
    assert exc.value.parameter_name == "p"
    assert exc.value.line == 2


def test_parse_warns_on_typo(caplog):
    with caplog.at_level(logging.WARNING, logger="nilkit.cli.config"):
        values = parse_config_text("sigma_1 = 4\n", source="run.cfg")
    assert values == {}
    assert "'sigma_1' should be 'sigma1'" in caplog.text


def test_parse_warns_on_unknown_key(caplog):
    with caplog.at_level(logging.WARNING, logger="nilkit.cli.config"):
        values = parse_config_text("colour = blue\np = 3\n")
    assert values == {"p": "3"}
    assert "Unknown key" in caplog.text
    assert "colour" in caplog.text


def test_typo_targets_are_real_keys():
    assert set(TYPO_MAP.values()) <= CONFIG_KEYS
    assert not set(TYPO_MAP) & CONFIG_KEYS


def test_command_is_not_a_config_key():
    assert "command" not in CONFIG_KEYS


def test_load_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("theta1 = 0.25\n", encoding="utf-8")
    assert load_config_file(path) == {"theta1": "0.25"}


def test_load_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError, match="not found"):
        load_config_file(tmp_path / "absent.cfg")


def test_load_undecodable_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_bytes(b"p = \xff\n")
    with pytest.raises(ConfigurationError, match="cannot read"):
        load_config_file(path)


def test_defaults():
    cfg = build_run_config(Command.SOLVE, {})
    assert cfg.problem() == Problem(sigma1=10, sigma2=1, p=2, e_field=1, theta1=0.5, dim=3)
    assert cfg.format is OutputFormat.CSV
    assert cfg.output is None
    assert cfg.axis is Axis.THETA1
    assert cfg.quantities == (Quantity.SIGMA,)
    assert cfg.solver() == SolverConfig()


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("p = 3\ntheta1 = 0.2\n", encoding="utf-8")
    cfg = build_run_config(Command.SOLVE, {"p": 4.0, "theta1": None}, path)
    assert cfg.p == 4.0
    assert cfg.theta1 == 0.2


def test_file_values_are_coerced(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "sigma1 = 1e1\ndim = 2\nformat = jsonl\naxis = p\nquantities = root, dsigma_dp\n"
        "output = out.csv\nabs_tol = 1e-14\n",
        encoding="utf-8",
    )
    cfg = build_run_config(Command.SWEEP, {}, path)
    assert cfg.sigma1 == 10.0
    assert cfg.dim == 2
    assert cfg.format is OutputFormat.JSONL
    assert cfg.axis is Axis.P
    assert cfg.quantities == (Quantity.ROOT, Quantity.DSIGMA_DP)
    assert cfg.output == Path("out.csv")
    assert cfg.solver().abs_tol == 1e-14


@pytest.mark.parametrize(
    "name,value",
    [
        ("p", "two"),
        ("dim", "2.5"),
        ("format", "xml"),
        ("quantities", "volume"),
        ("max_iter", "0"),
        ("abs_tol", "0"),
        ("x_tol", "-1"),
        ("quad_order", "3"),
        ("points", "0"),
        ("threads", "0"),
    ],
)
def test_invalid_values(name, value):
    with pytest.raises(ConfigurationError) as exc:
        build_run_config(Command.SOLVE, {name: value})
    assert exc.value.parameter_name is not None
    assert exc.value.parameter_name.startswith(name)
    assert f"invalid value for {name}" in str(exc.value)


def test_physical_bounds_left_to_problem():
    cfg = build_run_config(Command.SOLVE, {"p": 0.5})
    with pytest.raises(DomainError, match="p must exceed 1"):
        cfg.problem()


def test_run_config_is_frozen():
    cfg = RunConfig(command=Command.SOLVE)
    with pytest.raises(ValidationError):
        cfg.p = 3.0  # type: ignore[misc]


def test_run_config_forbids_unknown_fields():
    with pytest.raises(ConfigurationError, match="colour"):
        build_run_config(Command.SOLVE, {"colour": "blue"})
