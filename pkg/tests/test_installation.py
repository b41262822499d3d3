"""
Installation Tests for nilkit Library

Tests package structure and imports:
- Core imports work from the top level and from submodules
- Reference tables ship as package data
- Console script and module entry points are wired
- Package metadata is correct

These tests validate the package structure and distribution.
"""

import importlib.resources
import logging
import os
import subprocess
import sys
from pathlib import Path

import pytest

import nilkit


def _run_python(*args: str) -> subprocess.CompletedProcess[str]:
    # source checkouts are importable without installation
    env = {**os.environ, "PYTHONPATH": str(Path(nilkit.__file__).parents[1])}
    return subprocess.run([sys.executable, *args], capture_output=True, text=True, env=env, check=False)


def test_core_imports():
    """Core functionality imports from the top level."""
    from nilkit import (
        NeutralInclusionError,
        Problem,
        build_field,
        effective_conductivity,
        full_report,
        generate_table,
    )
    from nilkit.core.exceptions import (
        ConvergenceError,
        DegenerateGeometryError,
        DomainError,
        GoldenDataError,
        ShapeError,
        StepError,
    )

    assert callable(effective_conductivity)
    assert callable(build_field)
    assert callable(full_report)
    assert callable(generate_table)
    assert Problem.__name__ == "Problem"

    assert issubclass(DomainError, NeutralInclusionError)
    assert issubclass(DegenerateGeometryError, DomainError)
    assert issubclass(StepError, DomainError)
    assert issubclass(ConvergenceError, NeutralInclusionError)
    assert issubclass(ShapeError, GoldenDataError)


def test_all_exports_resolve():
    """Every name in __all__ is an attribute of the package."""
    import nilkit.core

    for module in (nilkit, nilkit.core):
        for name in module.__all__:
            assert hasattr(module, name), f"{module.__name__} does not export {name}"


def test_package_version_metadata():
    """Version is a dotted numeric string."""
    version = nilkit.__version__
    assert isinstance(version, str)
    parts = version.split(".")
    assert len(parts) >= 2, f"Version should have at least 2 parts: {version}"
    assert parts[0].isdigit(), f"Major version should be numeric: {version}"
    assert parts[1].isdigit(), f"Minor version should be numeric: {version}"


def test_submodule_imports():
    """Submodules can be imported directly."""
    from nilkit.cli import config, main
    from nilkit.core import exceptions, field, golden, kernel, models, parallel, report, sensitivity

    assert kernel.__name__ == "nilkit.core.kernel"
    assert field.__name__ == "nilkit.core.field"
    assert sensitivity.__name__ == "nilkit.core.sensitivity"
    assert report.__name__ == "nilkit.core.report"
    assert golden.__name__ == "nilkit.core.golden"
    assert parallel.__name__ == "nilkit.core.parallel"
    assert models.__name__ == "nilkit.core.models"
    assert exceptions.__name__ == "nilkit.core.exceptions"
    assert main.__name__ == "nilkit.cli.main"
    assert config.__name__ == "nilkit.cli.config"


def test_core_does_not_import_cli():
    """The computational core stays usable without the command line package."""
    code = "import sys, nilkit; assert 'nilkit.cli' not in sys.modules"
    assert _run_python("-c", code).returncode == 0


def test_reference_tables_are_package_data():
    files = importlib.resources.files("nilkit") / "data" / "golden"
    for table_id in range(1, 7):
        assert (files / f"table{table_id}.yaml").is_file()


def test_library_logger_has_null_handler():
    handlers = logging.getLogger("nilkit").handlers
    assert any(isinstance(h, logging.NullHandler) for h in handlers)


def test_type_hints_available():
    """py.typed marker is present (PEP 561)."""
    try:
        files = importlib.resources.files("nilkit")
        assert (files / "py.typed").is_file(), "py.typed marker file not found (required for PEP 561)"
    except (TypeError, FileNotFoundError):
        pytest.skip("Could not verify py.typed marker (package may not be installed)")


def test_module_entry_point():
    """python -m nilkit runs the command line."""
    result = _run_python("-m", "nilkit", "--version")
    assert result.returncode == 0
    assert result.stdout.startswith("nilkit ")


def test_console_script_declared():
    from importlib.metadata import PackageNotFoundError, entry_points

    try:
        scripts = entry_points(group="console_scripts")
    except PackageNotFoundError:
        pytest.skip("nilkit is not installed")
    targets = {ep.name: ep.value for ep in scripts}
    if "nilkit" not in targets:
        pytest.skip("nilkit is not installed as a distribution")
    assert targets["nilkit"] == "nilkit.cli.main:main"


def test_cli_package_exposes_modules():
    """nilkit.cli keeps its submodules reachable as attributes."""
    import nilkit.cli
    import nilkit.cli.main

    assert nilkit.cli.main.__name__ == "nilkit.cli.main"
    assert callable(nilkit.cli.main.main)
