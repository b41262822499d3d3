"""Piecewise field of a concrete coated inclusion.

For a core of radius r_c inside a coating of radius r_e, with θ the angle to
the applied field, the potential is

    core:     u = a₁·r·cosθ
    coating:  u = (a₂·r + b₂/r^{d−1})·cosθ

with b₂ = x₀·r_eᵈ, a₂ = E − x₀ and a₁ = E + A·x₀. This module builds those
coefficients, evaluates u and its gradient, and runs independent checks of
the transmission conditions, harmonicity in the coating, energy balance and
scale invariance.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray
from scipy.stats import qmc

from nilkit.core.exceptions import (
    DegenerateGeometryError,
    DomainError,
    InternalInconsistencyError,
)
from nilkit.core.kernel import DEFAULT_SOLVER, SolverConfig, signed_power, solve_root
from nilkit.core.models import Coefficients, Problem

logger = logging.getLogger(__name__)

# Relative tolerance of the construction-time transmission check
CONSTRUCTION_TOLERANCE = 1e-10

HALTON_SEED = 20240607

_STENCILS: dict[int, tuple[tuple[int, float], ...]] = {
    # (offset in units of h, weight); divide by h²
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    4: ((-2, -1 / 12), (-1, 16 / 12), (0, -30 / 12), (1, 16 / 12), (2, -1 / 12)),
}


class Region(str, Enum):
    """Material region of a sample point."""

    CORE = "core"
    COATING = "coating"


@dataclass(frozen=True, slots=True)
class PointSample:
    """Potential and gradient at one point.

    Attributes:
        r: Distance from the inclusion centre
        theta: Angle to the applied field, in [0, π]
        u: Potential
        grad_r: ∂u/∂r
        grad_theta: (1/r)·∂u/∂θ
        region: Side of the interface the formulas were taken from
    """

    r: float
    theta: float
    u: float
    grad_r: float
    grad_theta: float
    region: Region

    @property
    def grad_norm(self) -> float:
        return math.hypot(self.grad_r, self.grad_theta)


@dataclass(frozen=True, slots=True)
class EnergyReport:
    """Dissipation balance of one coated inclusion.

    Attributes:
        core_dissipation: ∫_core σ₁|∇u|^p dV (closed form)
        coating_dissipation: ∫_coating σ₂|∇u|² dV (Gauss-Legendre quadrature)
        homogeneous_dissipation: σ*·E²·V_total
        rel_error: |core + coating − homogeneous| / homogeneous
    """

    core_dissipation: float
    coating_dissipation: float
    homogeneous_dissipation: float
    rel_error: float


@dataclass(frozen=True, slots=True)
class FieldSolution:
    """Analytic field of a coated inclusion, evaluated on demand.

    No validation happens here; build_field is the checked constructor, so
    deliberately corrupted solutions can still be evaluated.
    """

    coeffs: Coefficients
    prob: Problem
    sigma_star: float

    def exterior_conductivity(self) -> float:
        """σ* recovered from the coating flux at r_e: σ₂(a₂ − (d−1)b₂/r_eᵈ)/E."""
        c = self.coeffs
        d = self.prob.dim
        return self.prob.sigma2 * (c.a2 - (d - 1) * c.b2 / c.r_e**d) / self.prob.e_field


def build_field(
    prob: Problem, r_e: float, cfg: SolverConfig = DEFAULT_SOLVER
) -> FieldSolution:
    """Build and verify the field of a coated inclusion of exterior radius r_e.

    Args:
        prob: Problem with 0 < θ₁ < 1
        r_e: Exterior radius (> 0)
        cfg: Solver tolerances

    Returns:
        FieldSolution whose four transmission residuals are below 1e−10 relative

    Raises:
        DegenerateGeometryError: If θ₁ = 0 (there is no core)
        DomainError: If θ₁ = 1 (zero-thickness coating) or r_e is not positive
        ConvergenceError: Propagated from the root solver
        InternalInconsistencyError: If a transmission residual exceeds 1e−10

    Example:
        >>> sol = build_field(Problem(10, 1, 2, 1, 0.5, 3), r_e=1.0)
        >>> round(sol.coeffs.a2, 12), round(sol.coeffs.a1, 12)
        (1.6, 0.4)
    """
    if not (isinstance(r_e, (int, float)) and math.isfinite(r_e) and r_e > 0):
        raise DomainError("r_e must be a positive finite radius", field_name="r_e", invalid_value=r_e)
    if prob.theta1 == 0:
        raise DegenerateGeometryError(
            "no core at theta1 = 0; the field is the uniform applied field",
            field_name="theta1",
            invalid_value=prob.theta1,
        )
    if prob.theta1 == 1:
        raise DomainError(
            "coating has zero thickness at theta1 = 1",
            field_name="theta1",
            invalid_value=prob.theta1,
        )

    d = prob.dim
    root = solve_root(prob, cfg)
    r_e = float(r_e)
    volume_e = r_e**d
    b2 = root.x0 * volume_e
    coeffs = Coefficients(
        a1=root.core_slope,
        a2=prob.e_field - b2 / volume_e,
        b2=b2,
        r_c=r_e * prob.theta1 ** (1.0 / d),
        r_e=r_e,
    )
    sigma_star = prob.sigma2 * (prob.e_field - d * root.x0) / prob.e_field
    sol = FieldSolution(coeffs=coeffs, prob=prob, sigma_star=sigma_star)

    scaled = _relative_residuals(sol)
    if max(scaled) > CONSTRUCTION_TOLERANCE:
        raise InternalInconsistencyError(
            f"constructed field violates transmission conditions: relative residuals {scaled}",
            residuals=residuals(sol),
        )
    logger.debug(f"field built for r_e={r_e}: {coeffs}")
    return sol


def residuals(sol: FieldSolution) -> tuple[float, float, float, float]:
    """Absolute residuals of the four interface and boundary equations.

    Returns:
        (continuity at r_c, flux at r_c, potential at r_e, flux at r_e):
        |a₁ − a₂ − b₂/r_cᵈ|,
        |σ₁|a₁|^{p−2}a₁ − σ₂(a₂ − (d−1)b₂/r_cᵈ)|,
        |E − a₂ − b₂/r_eᵈ|,
        |σ₂(a₂ − (d−1)b₂/r_eᵈ) − σ*E|
    """
    c = sol.coeffs
    prob = sol.prob
    d = prob.dim
    inner = c.b2 / c.r_c**d
    outer = c.b2 / c.r_e**d
    return (
        abs(c.a1 - c.a2 - inner),
        abs(prob.sigma1 * signed_power(c.a1, prob.p - 1) - prob.sigma2 * (c.a2 - (d - 1) * inner)),
        abs(prob.e_field - c.a2 - outer),
        abs(prob.sigma2 * (c.a2 - (d - 1) * outer) - sol.sigma_star * prob.e_field),
    )


def _relative_residuals(sol: FieldSolution) -> tuple[float, ...]:
    c = sol.coeffs
    prob = sol.prob
    d = prob.dim
    inner = abs(c.b2 / c.r_c**d)
    outer = abs(c.b2 / c.r_e**d)
    scales = (
        max(abs(c.a1), abs(c.a2), inner),
        max(prob.sigma1 * abs(c.a1) ** (prob.p - 1), prob.sigma2 * abs(c.a2), prob.sigma2 * (d - 1) * inner),
        max(prob.e_field, abs(c.a2), outer),
        max(prob.sigma2 * abs(c.a2), prob.sigma2 * (d - 1) * outer, sol.sigma_star * prob.e_field),
    )
    return tuple(res / scale for res, scale in zip(residuals(sol), scales))


def eval_field(
    sol: FieldSolution, r: float, theta: float, region: Region | None = None
) -> PointSample:
    """Evaluate u and its polar gradient at (r, θ).

    Args:
        sol: Field solution
        r: Radius in [0, r_e]
        theta: Angle to the applied field in [0, π]
        region: Force one side of the interface (for one-sided limits at r = r_c);
            None picks the core for r < r_c and the coating otherwise

    Raises:
        DomainError: If r or theta is out of range, or region contradicts r
    """
    c = sol.coeffs
    if not 0 <= r <= c.r_e:
        raise DomainError(
            f"r must lie in [0, r_e={c.r_e}], got {r}", field_name="r", invalid_value=r
        )
    if not 0 <= theta <= math.pi:
        raise DomainError(
            f"theta must lie in [0, pi], got {theta}", field_name="theta", invalid_value=theta
        )
    if region is None:
        region = Region.CORE if r < c.r_c else Region.COATING
    elif region is Region.CORE and r > c.r_c:
        raise DomainError("core formulas requested outside r_c", field_name="r", invalid_value=r)
    elif region is Region.COATING and r < c.r_c:
        raise DomainError("coating formulas requested inside r_c", field_name="r", invalid_value=r)

    cos_t, sin_t = math.cos(theta), math.sin(theta)
    if region is Region.CORE:
        return PointSample(
            r=r,
            theta=theta,
            u=c.a1 * r * cos_t,
            grad_r=c.a1 * cos_t,
            grad_theta=-c.a1 * sin_t,
            region=region,
        )

    d = sol.prob.dim
    dipole = c.b2 / r**d
    return PointSample(
        r=r,
        theta=theta,
        u=(c.a2 * r + c.b2 / r ** (d - 1)) * cos_t,
        grad_r=(c.a2 - (d - 1) * dipole) * cos_t,
        grad_theta=-(c.a2 + dipole) * sin_t,
        region=region,
    )


def boundary_flux(sol: FieldSolution, theta: float) -> float:
    """Normal current σ₂·∂u/∂r on the exterior boundary at angle θ."""
    return sol.prob.sigma2 * eval_field(sol, sol.coeffs.r_e, theta).grad_r


def _coating_potential(sol: FieldSolution, points: NDArray[np.float64]) -> NDArray[np.float64]:
    """Coating potential at Cartesian points (axis 0 along the applied field)."""
    c = sol.coeffs
    d = sol.prob.dim
    r = np.linalg.norm(points, axis=-1)
    axial = points[..., 0]
    # cosθ·r = axial, so u = (a₂ + b₂/rᵈ)·axial
    return (c.a2 + c.b2 / r**d) * axial


def harmonicity_check(
    sol: FieldSolution, n_points: int, h: float, stencil_order: int = 4
) -> float:
    """Max |discrete Laplacian| of u at quasi-random points of the coating.

    Points come from a fixed-seed Halton sequence; the Laplacian is a
    centered Cartesian second difference per axis, evaluated through the
    potential itself and never through the stored gradient. The coating
    potential is exactly harmonic, so the result measures truncation
    (O(h^stencil_order)) plus rounding.

    Raises:
        DomainError: If n_points < 1, h ≤ 0, the order is unsupported, or the
            stencil cannot fit inside the coating annulus
    """
    if n_points < 1:
        raise DomainError("n_points must be positive", field_name="n_points", invalid_value=n_points)
    if not h > 0:
        raise DomainError("h must be positive", field_name="h", invalid_value=h)
    if stencil_order not in _STENCILS:
        raise DomainError(
            "stencil_order must be 2 or 4", field_name="stencil_order", invalid_value=stencil_order
        )

    stencil = _STENCILS[stencil_order]
    reach = max(abs(offset) for offset, _ in stencil) * h
    c = sol.coeffs
    inner, outer = c.r_c + 1.5 * reach, c.r_e - 1.5 * reach
    if inner >= outer:
        raise DomainError(
            f"stencil of reach {reach} does not fit in the annulus ({c.r_c}, {c.r_e})",
            field_name="h",
            invalid_value=h,
        )

    d = sol.prob.dim
    sampler = qmc.Halton(d=d, scramble=True, seed=HALTON_SEED)
    unit = sampler.random(n_points)
    radius = inner + unit[:, 0] * (outer - inner)
    if d == 3:
        mu = 2.0 * unit[:, 1] - 1.0
        phi = 2.0 * math.pi * unit[:, 2]
        rho = np.sqrt(1.0 - mu**2)
        centres = radius[:, None] * np.column_stack([mu, rho * np.cos(phi), rho * np.sin(phi)])
    else:
        angle = 2.0 * math.pi * unit[:, 1]
        centres = radius[:, None] * np.column_stack([np.cos(angle), np.sin(angle)])

    laplacian = np.zeros(n_points)
    for axis in range(d):
        shift = np.zeros(d)
        shift[axis] = h
        for offset, weight in stencil:
            laplacian += weight * _coating_potential(sol, centres + offset * shift)
    laplacian /= h * h

    worst = float(np.max(np.abs(laplacian)))
    logger.debug(f"harmonicity residual {worst:.3e} at h={h}, order {stencil_order}")
    return worst


def coating_dissipation_exact(sol: FieldSolution) -> float:
    """Closed-form ∫_coating σ₂|∇u|² dV, valid for every p.

    Averaging cos²θ and sin²θ over the sphere reduces the integrand to
    S_d·r^{d−1}·(a₂² + (d−1)·b₂²/r^{2d}), which integrates to
    σ₂·(S_d/d)·[a₂²(r_eᵈ − r_cᵈ) + (d−1)·b₂²·(r_c^{−d} − r_e^{−d})].
    """
    c = sol.coeffs
    prob = sol.prob
    d = prob.dim
    radial = c.a2**2 * (c.r_e**d - c.r_c**d) + (d - 1) * c.b2**2 * (c.r_c**-d - c.r_e**-d)
    return prob.sigma2 * prob.surface_constant() / d * radial


def _coating_dissipation_quadrature(sol: FieldSolution, order: int) -> float:
    c = sol.coeffs
    prob = sol.prob
    d = prob.dim
    nodes, weights = np.polynomial.legendre.leggauss(order)

    half = 0.5 * (c.r_e - c.r_c)
    r = c.r_c + half * (nodes + 1.0)
    w_r = half * weights
    dipole = c.b2 / r**d
    radial_part = (c.a2 - (d - 1) * dipole) ** 2
    angular_part = (c.a2 + dipole) ** 2

    if d == 3:
        # μ = cosθ on [-1, 1]; the azimuth contributes 2π
        mu = nodes
        w_mu = weights
        integrand = (
            radial_part[:, None] * mu[None, :] ** 2
            + angular_part[:, None] * (1.0 - mu[None, :] ** 2)
        ) * (r**2)[:, None]
        total = 2.0 * math.pi * float(w_r @ integrand @ w_mu)
    else:
        # θ on [0, π], doubled by symmetry
        theta = 0.5 * math.pi * (nodes + 1.0)
        w_theta = 0.5 * math.pi * weights
        integrand = (
            radial_part[:, None] * np.cos(theta)[None, :] ** 2
            + angular_part[:, None] * np.sin(theta)[None, :] ** 2
        ) * r[:, None]
        total = 2.0 * float(w_r @ integrand @ w_theta)
    return prob.sigma2 * total


def energy_identity(sol: FieldSolution, quad_order: int = 32) -> EnergyReport:
    """Compare the dissipation of the inclusion with that of the homogeneous medium.

    The core term is exact (constant gradient), the coating term uses a
    tensor-product Gauss-Legendre rule of quad_order nodes per direction.

    Raises:
        DomainError: If quad_order < 4
    """
    if quad_order < 4:
        raise DomainError(
            "quad_order must be at least 4", field_name="quad_order", invalid_value=quad_order
        )
    c = sol.coeffs
    prob = sol.prob
    d = prob.dim
    omega = prob.volume_constant()

    core = prob.sigma1 * abs(c.a1) ** prob.p * omega * c.r_c**d
    coating = _coating_dissipation_quadrature(sol, quad_order)
    homogeneous = sol.sigma_star * prob.e_field**2 * omega * c.r_e**d
    rel_error = abs(core + coating - homogeneous) / homogeneous
    logger.debug(f"energy balance rel_error={rel_error:.3e} at quad_order={quad_order}")
    return EnergyReport(
        core_dissipation=core,
        coating_dissipation=coating,
        homogeneous_dissipation=homogeneous,
        rel_error=rel_error,
    )


def scale_invariance_check(
    prob: Problem,
    r_e: float,
    lam: float,
    cfg: SolverConfig = DEFAULT_SOLVER,
) -> float:
    """|σ*(r_e) − σ*(λ·r_e)| from two independently built fields.

    σ* is recovered from each field's exterior flux rather than from the
    shared root, so the radii genuinely enter both computations.

    Raises:
        DomainError: If lam is not positive
    """
    if not lam > 0:
        raise DomainError("lambda must be positive", field_name="lambda", invalid_value=lam)
    small = build_field(prob, r_e, cfg)
    large = build_field(prob, lam * r_e, cfg)
    return abs(small.exterior_conductivity() - large.exterior_conductivity())
