"""Tests for field reconstruction, evaluation and the physical checks.

Covers build_field coefficients, the four transmission residuals,
pointwise evaluation on both sides of the interface, the harmonicity check,
the energy identity and scale invariance.
"""

import dataclasses
import math

import numpy as np
import pytest

from nilkit.core.exceptions import DegenerateGeometryError, DomainError
from nilkit.core.field import (
    FieldSolution,
    Region,
    boundary_flux,
    build_field,
    coating_dissipation_exact,
    energy_identity,
    eval_field,
    harmonicity_check,
    residuals,
    scale_invariance_check,
)
from nilkit.core.models import Coefficients, Problem

from tests.conftest import assert_close, random_problems


def _u_scale(sol: FieldSolution) -> float:
    c = sol.coeffs
    return max(abs(c.a2) * c.r_e, abs(c.b2) / c.r_c ** (sol.prob.dim - 1), abs(c.a1) * c.r_c)


# build_field


def test_build_field_linear_coefficients(linear_problem):
    """b₂ = −0.6, a₂ = 1.6, a₁ = 0.4 at r_e = 1."""
    sol = build_field(linear_problem, r_e=1.0)
    c = sol.coeffs
    assert_close(c.b2, -0.6)
    assert_close(c.a2, 1.6)
    assert_close(c.a1, 0.4)
    assert_close(c.r_c, 0.5 ** (1 / 3))
    assert c.r_e == 1.0
    assert_close(sol.sigma_star, 2.8)


def test_build_field_disk_satisfies_transmission_conditions(disk_problem):
    sol = build_field(disk_problem, r_e=2.5)
    assert_close(sol.coeffs.r_c, 2.5 * math.sqrt(0.37))
    scale = max(abs(sol.coeffs.a1), abs(sol.coeffs.a2), disk_problem.sigma1, disk_problem.e_field)
    assert max(residuals(sol)) < 1e-9 * scale


@pytest.mark.parametrize("p", [1.1, 1.5, 2.7, 6.0, 12.0])
@pytest.mark.parametrize("dim", [2, 3])
def test_build_field_residuals_small(p, dim):
    prob = Problem(sigma1=10, sigma2=1, p=p, e_field=1.7, theta1=0.45, dim=dim)
    sol = build_field(prob, r_e=1.0)
    c = sol.coeffs
    scale = max(
        abs(c.a1),
        abs(c.a2),
        abs(c.b2) / c.r_c**dim,
        prob.sigma1 * abs(c.a1) ** (p - 1),
        sol.sigma_star * prob.e_field,
        prob.e_field,
    )
    assert max(residuals(sol)) <= 1e-10 * scale


@pytest.mark.parametrize(
    "prob",
    [
        Problem(sigma1=99.09, sigma2=1.934, p=7.67, e_field=4.05, theta1=0.327, dim=2),
        Problem(sigma1=113.6, sigma2=1, p=11.77, e_field=4.62, theta1=0.446, dim=3),
        Problem(sigma1=10, sigma2=1, p=10, e_field=4.5, theta1=0.5, dim=3),
    ],
)
def test_build_field_strong_field_high_exponent(prob):
    """The core flux at the root is tiny next to σ₁E^{p−1}; the interface still balances."""
    sol = build_field(prob, r_e=1.0)
    c = sol.coeffs
    inner = abs(c.b2) / c.r_c**prob.dim
    flux_scale = max(
        prob.sigma1 * abs(c.a1) ** (prob.p - 1),
        prob.sigma2 * abs(c.a2),
        prob.sigma2 * (prob.dim - 1) * inner,
    )
    assert residuals(sol)[1] <= 1e-12 * flux_scale


def test_build_field_accepts_strong_field_grid():
    problems = random_problems(
        200, seed=4, p_range=(4.0, 12.0), e_range=(3.0, 5.0), theta_range=(0.05, 0.95)
    )
    for prob in problems:
        build_field(prob, r_e=1.0)


def test_build_field_near_full_core():
    """As θ₁ → 1 the core carries σ*E: σ₁|a₁|^{p−2}a₁ ≈ σ*E."""
    prob = Problem(sigma1=10, sigma2=1, p=3, e_field=1.4, theta1=1 - 1e-9)
    sol = build_field(prob, r_e=1.0)
    a1 = sol.coeffs.a1
    assert_close(prob.sigma1 * abs(a1) ** (prob.p - 2) * a1, sol.sigma_star * prob.e_field, rel=1e-6)


def test_build_field_rejects_degenerate_fractions(linear_problem):
    with pytest.raises(DegenerateGeometryError):
        build_field(linear_problem.with_(theta1=0), r_e=1.0)
    with pytest.raises(DomainError, match="zero thickness"):
        build_field(linear_problem.with_(theta1=1), r_e=1.0)


@pytest.mark.parametrize("r_e", [0.0, -1.0, math.inf, math.nan])
def test_build_field_rejects_bad_radius(linear_problem, r_e):
    with pytest.raises(DomainError) as exc:
        build_field(linear_problem, r_e=r_e)
    assert exc.value.field_name == "r_e"


# residuals


def test_residuals_detect_b2_perturbation(linear_problem):
    """Shifting b₂ by 0.1 at r_e = 1 breaks equations 1–3, and equation 3 by exactly 0.1."""
    sol = build_field(linear_problem, r_e=1.0)
    broken = dataclasses.replace(sol, coeffs=dataclasses.replace(sol.coeffs, b2=sol.coeffs.b2 + 0.1))
    res = residuals(broken)
    assert res[0] > 1e-3
    assert res[1] > 1e-3
    assert res[2] == pytest.approx(0.1, rel=1e-9)


def test_residuals_zero_for_hand_built_linear_solution():
    """At p = 2 the coefficients follow from the closed form."""
    prob = Problem(sigma1=4, sigma2=1, p=2, e_field=2, theta1=0.3, dim=3)
    a_coef, b_coef = 1 / 0.3 - 1, 2 / 0.3 + 1
    x0 = (1 - 4) * 2 / (a_coef * 4 + b_coef * 1)
    r_e = 1.5
    coeffs = Coefficients(
        a1=2 + a_coef * x0,
        a2=2 - x0,
        b2=x0 * r_e**3,
        r_c=r_e * 0.3 ** (1 / 3),
        r_e=r_e,
    )
    sol = FieldSolution(coeffs=coeffs, prob=prob, sigma_star=(2 - 3 * x0) / 2)
    assert max(residuals(sol)) < 1e-12


# eval_field


def test_eval_field_core_point(linear_problem):
    sol = build_field(linear_problem, r_e=1.0)
    r = sol.coeffs.r_c / 2
    sample = eval_field(sol, r, 0.0)
    assert sample.region is Region.CORE
    assert_close(sample.u, sol.coeffs.a1 * r)
    assert_close(sample.grad_norm, abs(sol.coeffs.a1))


@pytest.mark.parametrize("theta", [0.0, 0.3, 1.2, math.pi / 2, 2.5, math.pi])
def test_eval_field_core_gradient_constant(nonlinear_problem, theta):
    sol = build_field(nonlinear_problem, r_e=2.0)
    for r in (0.0, 0.1, 0.9 * sol.coeffs.r_c):
        assert_close(eval_field(sol, r, theta).grad_norm, abs(sol.coeffs.a1), rel=1e-12)


def test_eval_field_at_centre(nonlinear_problem):
    sol = build_field(nonlinear_problem, r_e=1.0)
    sample = eval_field(sol, 0.0, math.pi / 2)
    assert sample.u == 0.0
    assert_close(sample.grad_theta, -sol.coeffs.a1)


@pytest.mark.parametrize("theta", np.linspace(0.0, math.pi, 7))
def test_eval_field_matches_applied_field_on_boundary(disk_problem, theta):
    sol = build_field(disk_problem, r_e=2.5)
    sample = eval_field(sol, 2.5, float(theta))
    assert sample.u == pytest.approx(disk_problem.e_field * 2.5 * math.cos(theta), abs=1e-12)


@pytest.mark.parametrize("fixture", ["nonlinear_problem", "disk_problem"])
def test_potential_and_tangential_gradient_continuous_at_interface(request, fixture):
    prob = request.getfixturevalue(fixture)
    sol = build_field(prob, r_e=1.0)
    r_c = sol.coeffs.r_c
    for theta in np.linspace(0.0, math.pi, 25):
        inner = eval_field(sol, r_c, float(theta), region=Region.CORE)
        outer = eval_field(sol, r_c, float(theta), region=Region.COATING)
        assert inner.u == pytest.approx(outer.u, abs=1e-12)
        assert inner.grad_theta == pytest.approx(outer.grad_theta, abs=1e-12)


def test_normal_flux_continuous_at_interface(nonlinear_problem):
    sol = build_field(nonlinear_problem, r_e=1.0)
    r_c = sol.coeffs.r_c
    inner = eval_field(sol, r_c, 0.0, region=Region.CORE).grad_r
    outer = eval_field(sol, r_c, 0.0, region=Region.COATING).grad_r
    p = nonlinear_problem.p
    core_flux = nonlinear_problem.sigma1 * abs(inner) ** (p - 2) * inner
    assert core_flux == pytest.approx(nonlinear_problem.sigma2 * outer, rel=1e-9)


def test_eval_field_rejects_out_of_range(linear_problem):
    sol = build_field(linear_problem, r_e=1.0)
    with pytest.raises(DomainError):
        eval_field(sol, 1.0 + 1e-9, 0.0)
    with pytest.raises(DomainError):
        eval_field(sol, -1e-9, 0.0)
    with pytest.raises(DomainError):
        eval_field(sol, 0.5, -0.1)
    with pytest.raises(DomainError):
        eval_field(sol, 0.5, math.pi + 0.1)


def test_eval_field_rejects_contradictory_region(linear_problem):
    sol = build_field(linear_problem, r_e=1.0)
    with pytest.raises(DomainError):
        eval_field(sol, 0.95, 0.0, region=Region.CORE)
    with pytest.raises(DomainError):
        eval_field(sol, 0.1, 0.0, region=Region.COATING)


def test_boundary_flux_is_neutral(nonlinear_problem):
    """The exterior current equals σ*E·cosθ: the inclusion is invisible."""
    sol = build_field(nonlinear_problem, r_e=3.0)
    for theta in np.linspace(0.0, math.pi, 100):
        expected = sol.sigma_star * nonlinear_problem.e_field * math.cos(theta)
        assert boundary_flux(sol, float(theta)) == pytest.approx(expected, abs=1e-10)


# harmonicity_check


@pytest.mark.parametrize("fixture", ["linear_problem", "nonlinear_problem", "disk_problem"])
def test_harmonicity_small(request, fixture):
    sol = build_field(request.getfixturevalue(fixture), r_e=1.0)
    assert harmonicity_check(sol, n_points=100, h=1e-3) < 1e-6 * _u_scale(sol)


def test_harmonicity_does_not_grow_when_step_halves(nonlinear_problem):
    sol = build_field(nonlinear_problem, r_e=1.0)
    coarse = harmonicity_check(sol, n_points=100, h=1e-2, stencil_order=2)
    fine = harmonicity_check(sol, n_points=100, h=5e-3, stencil_order=2)
    assert fine <= coarse


def test_harmonicity_is_deterministic(disk_problem):
    sol = build_field(disk_problem, r_e=1.0)
    assert harmonicity_check(sol, 50, 1e-3) == harmonicity_check(sol, 50, 1e-3)


def test_corrupted_coefficients_stay_harmonic_but_fail_residuals(nonlinear_problem):
    """Harmonicity does not see coefficient errors; residuals do."""
    sol = build_field(nonlinear_problem, r_e=1.0)
    broken = dataclasses.replace(sol, coeffs=dataclasses.replace(sol.coeffs, a2=sol.coeffs.a2 * 1.1))
    assert harmonicity_check(broken, 100, 1e-3) < 1e-6 * _u_scale(broken)
    assert max(residuals(broken)) > 1e-3


def test_harmonicity_rejects_stencil_outside_annulus(linear_problem):
    sol = build_field(linear_problem, r_e=1.0)
    with pytest.raises(DomainError):
        harmonicity_check(sol, 10, h=0.5)


@pytest.mark.parametrize(
    "kwargs", [{"n_points": 0, "h": 1e-3}, {"n_points": 10, "h": 0.0}, {"n_points": 10, "h": 1e-3, "stencil_order": 3}]
)
def test_harmonicity_rejects_bad_arguments(linear_problem, kwargs):
    sol = build_field(linear_problem, r_e=1.0)
    with pytest.raises(DomainError):
        harmonicity_check(sol, **kwargs)


# energy_identity


def test_energy_identity_linear_problem(linear_problem):
    report = energy_identity(build_field(linear_problem, r_e=1.0), quad_order=16)
    assert report.rel_error < 1e-10
    assert report.core_dissipation > 0
    assert report.coating_dissipation > 0
    assert report.homogeneous_dissipation > 0


@pytest.mark.parametrize("fixture", ["nonlinear_problem", "disk_problem"])
def test_energy_identity_general_root(request, fixture):
    report = energy_identity(build_field(request.getfixturevalue(fixture), r_e=1.3), quad_order=32)
    assert report.rel_error < 1e-8


def test_energy_identity_high_exponent():
    prob = Problem(sigma1=5, sigma2=2, p=3.5, e_field=0.9, theta1=0.62, dim=3)
    assert energy_identity(build_field(prob, r_e=1.0), quad_order=32).rel_error < 1e-8


def test_energy_identity_converges_with_order(disk_problem):
    sol = build_field(disk_problem.with_(theta1=0.1), r_e=1.0)
    errors = [energy_identity(sol, order).rel_error for order in (4, 8, 16, 32)]
    floor = 1e-12
    for coarse, fine in zip(errors, errors[1:]):
        assert fine <= max(coarse, floor)


@pytest.mark.parametrize("fixture", ["linear_problem", "nonlinear_problem", "disk_problem"])
def test_coating_quadrature_matches_closed_form(request, fixture):
    sol = build_field(request.getfixturevalue(fixture), r_e=1.0)
    report = energy_identity(sol, quad_order=32)
    assert_close(report.coating_dissipation, coating_dissipation_exact(sol), rel=1e-12)


def test_energy_identity_rejects_low_order(linear_problem):
    with pytest.raises(DomainError):
        energy_identity(build_field(linear_problem, r_e=1.0), quad_order=3)


def test_single_phase_energy_identity():
    """Near θ₁ = 1 the core alone dissipates σ*E²V."""
    prob = Problem(sigma1=10, sigma2=1, p=4, e_field=1.2, theta1=1 - 1e-9)
    report = energy_identity(build_field(prob, r_e=1.0))
    assert report.rel_error < 1e-8
    assert report.coating_dissipation < 1e-6 * report.core_dissipation


# scale_invariance_check


@pytest.mark.parametrize("lam", [1e-6, 10.0, 1e3])
@pytest.mark.parametrize("fixture", ["nonlinear_problem", "disk_problem"])
def test_scale_invariance(request, fixture, lam):
    prob = request.getfixturevalue(fixture)
    sigma_star = build_field(prob, r_e=1.0).sigma_star
    assert scale_invariance_check(prob, r_e=1.0, lam=lam) < 1e-12 * sigma_star


def test_dipole_scales_with_volume(nonlinear_problem):
    small = build_field(nonlinear_problem, r_e=1.0)
    large = build_field(nonlinear_problem, r_e=10.0)
    assert_close(large.coeffs.b2 / small.coeffs.b2, 10.0**3, rel=1e-12)


def test_scale_invariance_rejects_non_positive_lambda(linear_problem):
    with pytest.raises(DomainError):
        scale_invariance_check(linear_problem, r_e=1.0, lam=0.0)
