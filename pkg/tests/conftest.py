"""
Shared pytest fixtures and configuration for nilkit test suite.

This module provides:
- linear_problem: The p = 2 coated sphere used throughout the reference tables
- nonlinear_problem / disk_problem: General-root problems in 3D and 2D
- problem_grid: Factory for fixed-seed random problem grids
- bisection_root: Independent scipy bisection oracle for the interface root
- golden_file: Factory writing reference-table YAML files to a temp directory
- Helper functions for common numeric assertions
"""

import math
import sys
from pathlib import Path
from typing import Any, Callable, List

import numpy as np
import pytest
import yaml
from scipy.optimize import bisect

from nilkit.core.kernel import SolverConfig, interface_fn
from nilkit.core.models import Problem, geometry_factors

# Solver settings that polish roots to the spacing of doubles
TIGHT = SolverConfig(abs_tol=sys.float_info.min)


@pytest.fixture
def linear_problem() -> Problem:
    """σ₁=10, σ₂=1, p=2, E=1, θ₁=0.5, d=3: x₀ = −0.6, σ* = 2.8."""
    return Problem(sigma1=10, sigma2=1, p=2, e_field=1, theta1=0.5, dim=3)


@pytest.fixture
def nonlinear_problem() -> Problem:
    """Generic interior problem on the GeneralRoot branch (3D)."""
    return Problem(sigma1=10, sigma2=1, p=3.5, e_field=1.3, theta1=0.37, dim=3)


@pytest.fixture
def disk_problem() -> Problem:
    """Generic interior problem on the GeneralRoot branch (2D)."""
    return Problem(sigma1=3, sigma2=2, p=2.5, e_field=1.3, theta1=0.37, dim=2)


def random_problems(
    n: int,
    seed: int,
    ratio: tuple[float, float] = (0.1, 100.0),
    p_range: tuple[float, float] = (1.0, 12.0),
    e_range: tuple[float, float] = (0.1, 5.0),
    theta_range: tuple[float, float] = (0.0, 1.0),
) -> List[Problem]:
    """Fixed-seed problems with log-uniform contrast σ₁/σ₂.

    p is drawn from (lo, hi] and θ₁ from the open interval, so lower bounds
    of 1 and 0 are never hit.
    """
    rng = np.random.default_rng(seed)
    problems = []
    for _ in range(n):
        sigma2 = float(rng.uniform(0.5, 2.0))
        contrast = float(np.exp(rng.uniform(np.log(ratio[0]), np.log(ratio[1]))))
        p = p_range[1] - float(rng.uniform(0.0, 1.0)) * (p_range[1] - p_range[0])
        theta1 = float(rng.uniform(theta_range[0], theta_range[1]))
        while not theta_range[0] < theta1 < theta_range[1]:
            theta1 = float(rng.uniform(theta_range[0], theta_range[1]))
        problems.append(
            Problem(
                sigma1=sigma2 * contrast,
                sigma2=sigma2,
                p=p if p > p_range[0] else p_range[1],
                e_field=float(rng.uniform(*e_range)),
                theta1=theta1,
                dim=int(rng.choice([2, 3])),
            )
        )
    return problems


@pytest.fixture
def problem_grid() -> Callable[..., List[Problem]]:
    """Factory for fixed-seed random problem grids (see random_problems)."""
    return random_problems


def oracle_root(prob: Problem) -> float:
    """Root of the interface function by plain bisection on the analytic bracket."""
    gf = geometry_factors(prob)
    lo, hi = -prob.e_field / gf.a_coef, prob.e_field / gf.b_coef

    def f(x: float) -> float:
        # E + A·lo may round to a tiny positive core slope; the exact value is 0
        return -1.0 if x == lo else interface_fn(x, prob, gf)

    return float(
        bisect(
            f,
            lo,
            hi,
            xtol=1e-300,
            rtol=4 * sys.float_info.epsilon,
            maxiter=3000,
        )
    )


@pytest.fixture
def bisection_root() -> Callable[[Problem], float]:
    """Independent root oracle (scipy bisection, endpoints evaluated)."""
    return oracle_root


@pytest.fixture
def golden_file(tmp_path: Path) -> Callable[..., Path]:
    """
    Factory writing reference-table YAML files.

    Example:
        >>> path = golden_file(table_id=1, rows=[["0.10"]], theta1=[0.5], p=[2.0])
    """
    counter = {"n": 0}

    def _write(**overrides: Any) -> Path:
        data: dict[str, Any] = {
            "table_id": 1,
            "caption": "test table",
            "quantity": "root",
            "e_field": 1.0,
            "sigma1": 10.0,
            "sigma2": 1.0,
            "dim": 3,
            "theta1": [0.5],
            "p": [2.0],
            "rows": [["-0.60"]],
        }
        data.update(overrides)
        data = {key: value for key, value in data.items() if value is not None}
        counter["n"] += 1
        path = tmp_path / f"golden-{counter['n']}.yaml"
        path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
        return path

    return _write


def assert_close(actual: float, expected: float, rel: float = 1e-12, abs_floor: float = 0.0) -> None:
    """Assert |actual − expected| ≤ max(rel·|expected|, abs_floor) with a readable message."""
    tol = max(rel * abs(expected), abs_floor)
    assert math.isfinite(actual), f"non-finite value {actual!r}"
    assert abs(actual - expected) <= tol, (
        f"{actual!r} differs from {expected!r} by {abs(actual - expected):.3e} (tol {tol:.3e})"
    )
