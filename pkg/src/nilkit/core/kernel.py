"""Interface function, root solver and effective conductivity.

The interface function of a coated inclusion with a p-Laplacian core is

    f(x) = σ₁·sp(E + A·x) − σ₂·(E − B·x),    sp(t) = sign(t)·|t|^{p−1}

It is strictly increasing, negative at −E/A and positive at E/B, so it has a
unique root x₀ on that bracket. The effective conductivity of the coated
assemblage follows as σ* = (σ₂/E)·(E − d·x₀) and does not depend on the radii.
"""

import logging
import math
import sys
from collections.abc import Callable
from dataclasses import dataclass

from nilkit.core.exceptions import (
    ConvergenceError,
    DomainError,
    InternalInconsistencyError,
)
from nilkit.core.models import (
    Branch,
    EffectiveResult,
    GeometryFactors,
    Problem,
    Root,
    RootStatus,
    geometry_factors,
)

logger = logging.getLogger(__name__)

_EPS = sys.float_info.epsilon

# Below this core slope (relative to E) the slope is re-solved directly
CANCELLATION_RATIO = 1e-3

# Below this core slope (relative to E) Newton steps are refused when p < 2
NEWTON_FLOOR_RATIO = 1e-6

HS_AGREEMENT = 1e-12

# Geometric bisection step towards zero while the lower end is still 0
GEOMETRIC_SHRINK = 1e-4


@dataclass(frozen=True, slots=True)
class SolverConfig:
    """Root solver tolerances.

    Attributes:
        abs_tol: Residual tolerance on |f(x)|; None means
            1e−14·(σ₁·max(1, E)^{p−1} + σ₂·E), after which Newton keeps
            polishing the root down to rounding level. An explicit value is
            honoured as given.
        x_tol: Bracket-width tolerance; None means 1e−15·(initial bracket width)
        max_iter: Iteration budget
    """

    abs_tol: float | None = None
    x_tol: float | None = None
    max_iter: int = 200

    def __post_init__(self) -> None:
        if self.abs_tol is not None and not self.abs_tol > 0:
            raise DomainError(
                "abs_tol must be positive", field_name="abs_tol", invalid_value=self.abs_tol
            )
        if self.x_tol is not None and not self.x_tol > 0:
            raise DomainError(
                "x_tol must be positive", field_name="x_tol", invalid_value=self.x_tol
            )
        if isinstance(self.max_iter, bool) or not isinstance(self.max_iter, int) or self.max_iter < 1:
            raise DomainError(
                "max_iter must be a positive integer",
                field_name="max_iter",
                invalid_value=self.max_iter,
            )

    def residual_tolerance(self, prob: Problem) -> float:
        """Resolve abs_tol against the natural magnitude of f for this problem."""
        if self.abs_tol is not None:
            return self.abs_tol
        scale = prob.sigma1 * max(1.0, prob.e_field) ** (prob.p - 1) + prob.sigma2 * prob.e_field
        return 1e-14 * scale

    def width_tolerance(self, width: float) -> float:
        """Resolve x_tol against the initial bracket width."""
        if self.x_tol is not None:
            return self.x_tol
        return 1e-15 * width


DEFAULT_SOLVER = SolverConfig()


def signed_power(t: float, exponent: float) -> float:
    """Odd power sign(t)·|t|^exponent, zero at t = 0."""
    if t == 0:
        return 0.0
    return math.copysign(abs(t) ** exponent, t)


def interface_fn(x: float, prob: Problem, gf: GeometryFactors) -> float:
    """Evaluate f(x) = σ₁·sp(E + A·x) − σ₂·(E − B·x).

    Args:
        x: Trial value of b₂/r_eᵈ
        prob: Problem with θ₁ > 0
        gf: Geometry factors of prob

    Returns:
        Value of the interface function (total, never raises)

    Example:
        >>> prob = Problem(10, 1, 2, 1, 0.5, 3)
        >>> interface_fn(0.0, prob, geometry_factors(prob))
        9.0
    """
    e = prob.e_field
    t = e + gf.a_coef * x
    return prob.sigma1 * signed_power(t, prob.p - 1) - prob.sigma2 * (e - gf.b_coef * x)


def _slope(t: float, prob: Problem, a_coef: float, b_coef: float) -> float:
    t = abs(t)
    if t == 0 and prob.p < 2:
        return math.inf if a_coef > 0 else prob.sigma2 * b_coef
    core = 1.0 if prob.p == 2 else t ** (prob.p - 2)
    return a_coef * prob.sigma1 * (prob.p - 1) * core + prob.sigma2 * b_coef


def interface_derivative(x: float, prob: Problem, gf: GeometryFactors) -> float:
    """f′(x) = A·σ₁·(p−1)·|E + A·x|^{p−2} + σ₂·B (infinite at t = 0 when p < 2)."""
    return _slope(prob.e_field + gf.a_coef * x, prob, gf.a_coef, gf.b_coef)


@dataclass(slots=True)
class _SolveOutcome:
    x: float
    fx: float
    iterations: int
    status: RootStatus
    lo: float
    hi: float


def _settled(
    x: float,
    fx: float,
    dfn: Callable[[float], float],
    newton_ok: Callable[[float], bool],
    x_tol: float,
) -> bool:
    if fx == 0 or not newton_ok(x):
        return True
    slope = dfn(x)
    if not (math.isfinite(slope) and slope > 0):
        return True
    return abs(fx / slope) <= 4 * _EPS * abs(x) + x_tol


def _hybrid_solve(
    fn: Callable[[float], float],
    dfn: Callable[[float], float],
    lo: float,
    hi: float,
    abs_tol: float,
    x_tol: float,
    max_iter: int,
    newton_ok: Callable[[float], bool],
    geometric: bool = False,
    polish: bool = False,
) -> _SolveOutcome:
    """Safeguarded Newton-bisection on a bracket with fn(lo) < 0 < fn(hi).

    The endpoints are never evaluated. A Newton step is taken only when it
    stays strictly inside the bracket and at least halves the previous step;
    otherwise the bracket is bisected (geometrically when requested and the
    bracket spans more than a factor of four on the positive axis).

    With polish set, meeting abs_tol is not enough: iteration continues until
    the Newton correction drops below the spacing of doubles at x, Newton is
    not allowed there, or |fn| stops decreasing.

    Returns the best evaluated point. When the bracket shrinks to adjacent
    representable values before |fn| ≤ abs_tol, status is BRACKET_COLLAPSED.
    """
    best_x = math.nan
    best_f = math.inf

    x = lo + 0.5 * (hi - lo)
    fx = fn(x)
    step_old = hi - lo
    probed = False
    polished = math.inf
    from_newton = False

    for iteration in range(1, max_iter + 1):
        if abs(fx) < abs(best_f):
            best_x, best_f = x, fx
        if abs(fx) <= abs_tol:
            if not polish or _settled(x, fx, dfn, newton_ok, x_tol):
                status = RootStatus.EXACT if fx == 0 else RootStatus.RESIDUAL
                return _SolveOutcome(x, fx, iteration, status, lo, hi)
            if from_newton and abs(fx) >= polished:
                # rounding noise floor: further steps no longer reduce |fn|
                return _SolveOutcome(best_x, best_f, iteration, RootStatus.RESIDUAL, lo, hi)
            polished = min(polished, abs(fx))

        if fx < 0:
            lo = x
        else:
            hi = x

        # a polished solve may run out of bracket after abs_tol was already met
        collapsed = RootStatus.RESIDUAL if abs(best_f) <= abs_tol else RootStatus.BRACKET_COLLAPSED
        if hi - lo <= x_tol + 4 * _EPS * abs(x):
            return _SolveOutcome(best_x, best_f, iteration, collapsed, lo, hi)

        x_new = math.nan
        if newton_ok(x):
            slope = dfn(x)
            if math.isfinite(slope) and slope > 0:
                step = fx / slope
                candidate = x - step
                if lo < candidate < hi and abs(step) <= 0.5 * abs(step_old):
                    if candidate != x:
                        x_new = candidate
                        step_old = step
                        probed = False
                    elif not probed:
                        # Newton step is below the spacing of doubles: probe the neighbour once
                        x_new = math.nextafter(x, hi if fx < 0 else lo)
                        probed = True

        from_newton = not math.isnan(x_new)
        if math.isnan(x_new):
            if geometric and lo == 0:
                x_new = GEOMETRIC_SHRINK * hi
            elif geometric and hi > 4 * lo:
                x_new = math.sqrt(lo) * math.sqrt(hi)
            else:
                x_new = lo + 0.5 * (hi - lo)
            step_old = hi - lo
            if x_new <= lo or x_new >= hi:
                return _SolveOutcome(best_x, best_f, iteration, collapsed, lo, hi)

        x = x_new
        fx = fn(x)

    raise ConvergenceError(
        f"root solver did not converge in {max_iter} iterations; "
        f"last bracket ({lo!r}, {hi!r})",
        bracket_lo=lo,
        bracket_hi=hi,
        iterations=max_iter,
    )


def _solve_monotone(
    prob: Problem,
    a_coef: float,
    b_coef: float,
    cfg: SolverConfig,
) -> Root:
    """Solve σ₁·sp(E + a·x) = σ₂·(E − b·x) on (−E/a, E/b) for a > 0."""
    e = prob.e_field
    sigma1, sigma2, p = prob.sigma1, prob.sigma2, prob.p

    def fn(x: float) -> float:
        return sigma1 * signed_power(e + a_coef * x, p - 1) - sigma2 * (e - b_coef * x)

    def dfn(x: float) -> float:
        return _slope(e + a_coef * x, prob, a_coef, b_coef)

    def newton_ok(x: float) -> bool:
        return p >= 2 or e + a_coef * x >= NEWTON_FLOOR_RATIO * e

    bracket_lo = -e / a_coef
    bracket_hi = e / b_coef
    abs_tol = cfg.residual_tolerance(prob)
    x_tol = cfg.width_tolerance(bracket_hi - bracket_lo)

    f0 = sigma1 * e ** (p - 1) - sigma2 * e
    if f0 == 0:
        logger.debug("f(0) vanishes exactly; x0 = 0")
        return Root(
            x0=0.0,
            residual=0.0,
            bracket_lo=bracket_lo,
            bracket_hi=bracket_hi,
            iterations=0,
            core_slope=e,
            status=RootStatus.EXACT,
        )
    lo, hi = (bracket_lo, 0.0) if f0 > 0 else (0.0, bracket_hi)
    logger.debug(f"bracket tightened by sign of f(0)={f0:.3g} to ({lo:.6g}, {hi:.6g})")

    outcome = _hybrid_solve(
        fn, dfn, lo, hi, abs_tol, x_tol, cfg.max_iter, newton_ok, polish=cfg.abs_tol is None
    )
    x0 = outcome.x
    iterations = outcome.iterations

    core_slope = e + a_coef * x0
    if core_slope < CANCELLATION_RATIO * e:
        core_slope, extra = _solve_core_slope(prob, a_coef, b_coef, cfg, abs_tol)
        iterations += extra

    logger.debug(
        f"root x0={x0!r} after {iterations} iterations "
        f"(|f|={abs(outcome.fx):.3g}, status={outcome.status.value})"
    )
    return Root(
        x0=x0,
        residual=abs(outcome.fx),
        bracket_lo=bracket_lo,
        bracket_hi=bracket_hi,
        iterations=iterations,
        core_slope=core_slope,
        status=outcome.status,
    )


def _solve_core_slope(
    prob: Problem,
    a_coef: float,
    b_coef: float,
    cfg: SolverConfig,
    abs_tol: float,
) -> tuple[float, int]:
    """Solve for t = E + a·x₀ directly when it suffers cancellation.

    h(t) = σ₁·t^{p−1} − σ₂·(E − b·(t − E)/a) is increasing on (0, E(a+b)/b)
    with h(0) < 0, and resolves t to full relative precision.
    """
    e = prob.e_field
    sigma1, sigma2, p = prob.sigma1, prob.sigma2, prob.p
    ratio = b_coef / a_coef

    def fn(t: float) -> float:
        return sigma1 * t ** (p - 1) - sigma2 * (e - ratio * (t - e))

    def dfn(t: float) -> float:
        return sigma1 * (p - 1) * t ** (p - 2) + sigma2 * ratio

    hi = e * (a_coef + b_coef) / b_coef
    outcome = _hybrid_solve(
        fn,
        dfn,
        0.0,
        hi,
        abs_tol,
        0.0,
        cfg.max_iter,
        lambda _t: True,
        geometric=True,
        polish=cfg.abs_tol is None,
    )
    logger.debug(f"core slope re-solved to t={outcome.x!r} in {outcome.iterations} iterations")
    return outcome.x, outcome.iterations


def solve_root(prob: Problem, cfg: SolverConfig = DEFAULT_SOLVER) -> Root:
    """Solve f(x) = 0 for the unique root x₀ in (−E/A, E/B).

    Args:
        prob: Problem with 0 < θ₁ < 1
        cfg: Solver tolerances

    Returns:
        Root with x0 strictly inside the analytic bracket

    Raises:
        DomainError: If θ₁ is 0 or 1 (closed-form branches)
        ConvergenceError: If max_iter is exhausted

    Example:
        >>> round(solve_root(Problem(10, 1, 2, 1, 0.5, 3)).x0, 12)
        -0.6
    """
    if not 0 < prob.theta1 < 1:
        raise DomainError(
            "solve_root requires 0 < theta1 < 1; theta1 = 0 and 1 have closed forms",
            field_name="theta1",
            invalid_value=prob.theta1,
        )
    gf = geometry_factors(prob)
    return _solve_monotone(prob, gf.a_coef, gf.b_coef, cfg)


def dilute_limit(prob: Problem, cfg: SolverConfig = DEFAULT_SOLVER) -> Root:
    """Solve for y = lim_{θ₁→0} x₀/θ₁.

    As θ₁ → 0, A·x₀ → y and B·x₀ → (d−1)·y, so y is the root of
    σ₁·sp(E + y) = σ₂·(E − (d−1)·y) on (−E, E/(d−1)). It is the slope of
    x₀ with respect to θ₁ at θ₁ = 0. The θ₁ field of prob is ignored.
    """
    return _solve_monotone(prob, 1.0, float(prob.dim - 1), cfg)


def closed_form_root_linear(prob: Problem) -> float:
    """Root at p = 2: x₀ = (σ₂ − σ₁)·E / (A·σ₁ + B·σ₂)."""
    gf = geometry_factors(prob)
    return (
        (prob.sigma2 - prob.sigma1)
        * prob.e_field
        / (gf.a_coef * prob.sigma1 + gf.b_coef * prob.sigma2)
    )


def all_nonlinear_root(prob: Problem) -> float:
    """Root at θ₁ = 1: x₀ = (σ₂ − σ₁·E^{p−2})·E/(d·σ₂)."""
    e = prob.e_field
    return (prob.sigma2 - prob.sigma1 * e ** (prob.p - 2)) * e / (prob.dim * prob.sigma2)


def sigma_from_root(prob: Problem, x0: float) -> float:
    """σ* = (σ₂/E)·(E − d·x₀)."""
    return prob.sigma2 * (prob.e_field - prob.dim * x0) / prob.e_field


def hashin_shtrikman(prob: Problem) -> float:
    """Hashin-Shtrikman value σ₂ + d·θ₁·σ₂·(σ₁−σ₂) / (d·σ₂ + θ₂·(σ₁−σ₂)).

    Defined for every θ₁ in [0, 1]; p is ignored.

    Example:
        >>> round(hashin_shtrikman(Problem(10, 1, 2, 1, 0.5, 3)), 12)
        2.8
    """
    d = prob.dim
    s1, s2 = prob.sigma1, prob.sigma2
    return s2 + d * prob.theta1 * s2 * (s1 - s2) / (d * s2 + prob.theta2 * (s1 - s2))


def hs_bounds(prob: Problem) -> tuple[float, float]:
    """Lower and upper Hashin-Shtrikman bounds for σ₁ > σ₂.

    Raises:
        DomainError: If σ₁ ≤ σ₂ (the labeling convention requires σ₁ > σ₂)
    """
    if prob.sigma1 <= prob.sigma2:
        raise DomainError(
            "hs_bounds requires sigma1 > sigma2",
            field_name="sigma1",
            invalid_value=prob.sigma1,
        )
    d = prob.dim
    s1, s2 = prob.sigma1, prob.sigma2
    lower = hashin_shtrikman(prob)
    upper = s1 + d * prob.theta2 * s1 * (s2 - s1) / (d * s1 + prob.theta1 * (s2 - s1))
    return lower, upper


def conductivity_bounds(prob: Problem) -> tuple[float, float]:
    """A-priori bracket σ₂(1 − d/B) < σ* < σ₂(1 + d/A) implied by the root bracket.

    Raises:
        DomainError: Unless 0 < θ₁ < 1
    """
    if not 0 < prob.theta1 < 1:
        raise DomainError(
            "conductivity_bounds requires 0 < theta1 < 1",
            field_name="theta1",
            invalid_value=prob.theta1,
        )
    gf = geometry_factors(prob)
    d = prob.dim
    return prob.sigma2 * (1 - d / gf.b_coef), prob.sigma2 * (1 + d / gf.a_coef)


def effective_conductivity(
    prob: Problem, cfg: SolverConfig = DEFAULT_SOLVER
) -> EffectiveResult:
    """Compute σ* on the branch selected by θ₁ and p.

    - θ₁ = 0: σ* = σ₂, x₀ = 0 (AllLinear)
    - θ₁ = 1: closed form, σ* = σ₁·E^{p−2} (AllNonlinear)
    - p = 2: closed-form root, checked against Hashin-Shtrikman (LinearClosedForm)
    - otherwise the root of the interface function (GeneralRoot)

    When p = 2 hs_value is populated on every branch.

    Raises:
        ConvergenceError: Propagated from solve_root
        InternalInconsistencyError: If the p = 2 result disagrees with Hashin-Shtrikman

    Example:
        >>> round(effective_conductivity(Problem(10, 1, 10, 2, 1.0, 3)).sigma_star, 9)
        2560.0
    """
    hs_value = hashin_shtrikman(prob) if prob.p == 2 else None
    root: Root | None = None

    if prob.theta1 == 0:
        branch = Branch.ALL_LINEAR
        x0 = 0.0
        sigma_star = float(prob.sigma2)
    elif prob.theta1 == 1:
        branch = Branch.ALL_NONLINEAR
        x0 = all_nonlinear_root(prob)
        sigma_star = prob.sigma1 * prob.e_field ** (prob.p - 2)
    elif prob.p == 2:
        branch = Branch.LINEAR_CLOSED_FORM
        x0 = closed_form_root_linear(prob)
        sigma_star = sigma_from_root(prob, x0)
    else:
        branch = Branch.GENERAL_ROOT
        root = solve_root(prob, cfg)
        x0 = root.x0
        sigma_star = sigma_from_root(prob, x0)

    if branch is Branch.LINEAR_CLOSED_FORM and hs_value is not None:
        gap = abs(sigma_star - hs_value)
        if gap >= HS_AGREEMENT * max(1.0, abs(hs_value)):
            raise InternalInconsistencyError(
                f"p = 2 effective conductivity {sigma_star!r} disagrees with "
                f"Hashin-Shtrikman value {hs_value!r}",
                residuals=(gap,),
            )

    logger.debug(f"sigma*={sigma_star!r} via {branch.value} for {prob}")
    return EffectiveResult(
        sigma_star=sigma_star, x0=x0, hs_value=hs_value, branch=branch, root=root
    )
