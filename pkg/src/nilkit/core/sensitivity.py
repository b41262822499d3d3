"""Analytic sensitivities of x₀ and σ* with respect to p and θ₁.

Implicit differentiation of f(x₀; p, θ₁) = 0 with t = E + A·x₀ gives

    ∂x₀/∂p  = −σ₁·t^{p−1}·ln t / D
    ∂x₀/∂θ₁ = (x₀/θ₁²)·[σ₁(p−1)·t^{p−2} + (d−1)·σ₂] / D
    D       = σ₁(p−1)·A·t^{p−2} + σ₂·B

and since σ* = (σ₂/E)(E − d·x₀), each σ* derivative is −(d·σ₂/E) times the
matching x₀ derivative. The formulas extend to θ₁ = 1 (A = 0, B = d). At
θ₁ = 0 the p-derivatives vanish and the θ₁-derivatives come from the dilute
limit y = lim x₀/θ₁.
"""

import logging
import math
import sys
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum
from functools import partial

import numpy as np

from nilkit.core.exceptions import DomainError, StepError
from nilkit.core.kernel import (
    DEFAULT_SOLVER,
    SolverConfig,
    all_nonlinear_root,
    dilute_limit,
    effective_conductivity,
    solve_root,
)
from nilkit.core.models import Problem, Root, SensitivityReport, geometry_factors
from nilkit.core.parallel import num_threads, run_bounded

logger = logging.getLogger(__name__)

FLAT_TOLERANCE = 1e-8
DEFAULT_FD_STEP = 1e-6
GRID_SEED = 1729


class Regime(str, Enum):
    """Direction in which x₀ moves as p grows (σ* moves the opposite way)."""

    INCREASING = "Increasing"
    DECREASING = "Decreasing"
    FLAT = "Flat"


class ConsistencyFlag(str, Enum):
    """Whether the closed-form threshold and the computed derivative agree."""

    AGREE = "Agree"
    DISAGREE = "Disagree"


@dataclass(frozen=True, slots=True)
class RegimeVerdict:
    """Classification of ∂x₀/∂p for E > 1.

    Attributes:
        regime: Verdict of the closed-form threshold
        threshold: σ₂(dE − (d−1) − θ₁)/(1 − θ₁); x₀ grows with p iff σ₁ ≥ threshold
        dx0_dp: Computed derivative used for the cross-check
        numeric_regime: Verdict read off the sign of dx0_dp
        consistency: AGREE when both verdicts coincide
    """

    regime: Regime
    threshold: float
    dx0_dp: float
    numeric_regime: Regime
    consistency: ConsistencyFlag


@dataclass(frozen=True, slots=True)
class _Parts:
    x0: float
    t: float
    a_coef: float
    b_coef: float
    denom: float


def _tight(cfg: SolverConfig) -> SolverConfig:
    """Solver settings that polish roots down to the spacing of doubles."""
    return SolverConfig(abs_tol=sys.float_info.min, x_tol=cfg.x_tol, max_iter=cfg.max_iter)


def _parts(prob: Problem, root: Root | None, cfg: SolverConfig) -> _Parts:
    p = prob.p
    if prob.theta1 == 1:
        x0 = all_nonlinear_root(prob)
        t = float(prob.e_field)
        a_coef, b_coef = 0.0, float(prob.dim)
    else:
        gf = geometry_factors(prob)
        if root is None:
            root = solve_root(prob, cfg)
        x0, t = root.x0, root.core_slope
        a_coef, b_coef = gf.a_coef, gf.b_coef
        if t <= 0:
            raise DomainError(
                "E + A*x0 must be positive", field_name="core_slope", invalid_value=t
            )
    denom = prob.sigma1 * (p - 1) * a_coef * t ** (p - 2) + prob.sigma2 * b_coef
    return _Parts(x0=x0, t=t, a_coef=a_coef, b_coef=b_coef, denom=denom)


def _sigma_factor(prob: Problem) -> float:
    return -prob.dim * prob.sigma2 / prob.e_field


def dx0_dp(prob: Problem, root: Root | None = None, cfg: SolverConfig = DEFAULT_SOLVER) -> float:
    """∂x₀/∂p = −σ₁·t^{p−1}·ln t / (σ₁(p−1)A·t^{p−2} + σ₂B), t = E + A·x₀.

    Args:
        prob: Problem with θ₁ in [0, 1]
        root: Solved root for prob (solved on demand when omitted)
        cfg: Solver tolerances for the on-demand solve

    Returns:
        Derivative of x₀ with respect to p (0 at θ₁ = 0)

    Raises:
        DomainError: If the core slope E + A·x₀ is not positive
    """
    if prob.theta1 == 0:
        return 0.0
    parts = _parts(prob, root, cfg)
    t = parts.t
    return -prob.sigma1 * t ** (prob.p - 1) * math.log(t) / parts.denom


def dsigma_dp(prob: Problem, root: Root | None = None, cfg: SolverConfig = DEFAULT_SOLVER) -> float:
    """∂σ*/∂p = −(d·σ₂/E)·∂x₀/∂p."""
    return _sigma_factor(prob) * dx0_dp(prob, root, cfg)


def dx0_dtheta(
    prob: Problem, root: Root | None = None, cfg: SolverConfig = DEFAULT_SOLVER
) -> float:
    """∂x₀/∂θ₁ = (x₀/θ₁²)·[σ₁(p−1)t^{p−2} + (d−1)σ₂] / (σ₁(p−1)A·t^{p−2} + σ₂B).

    At θ₁ = 0 this is the dilute-limit slope y.
    """
    if prob.theta1 == 0:
        return dilute_limit(prob, cfg).x0
    parts = _parts(prob, root, cfg)
    p = prob.p
    numerator = prob.sigma1 * (p - 1) * parts.t ** (p - 2) + (prob.dim - 1) * prob.sigma2
    return parts.x0 / prob.theta1**2 * numerator / parts.denom


def dsigma_dtheta(
    prob: Problem, root: Root | None = None, cfg: SolverConfig = DEFAULT_SOLVER
) -> float:
    """∂σ*/∂θ₁ = −(d·σ₂/E)·∂x₀/∂θ₁."""
    return _sigma_factor(prob) * dx0_dtheta(prob, root, cfg)


def regime_threshold(prob: Problem) -> float:
    """σ₂·(d·E − (d−1) − θ₁)/(1 − θ₁).

    ∂x₀/∂p ≥ 0 iff E + A·x₀ ≤ 1 iff σ₁ ≥ threshold; for d = 3 the numerator
    reads 3E − 2 − θ₁.
    """
    if not 0 <= prob.theta1 < 1:
        raise DomainError(
            "regime threshold requires theta1 < 1", field_name="theta1", invalid_value=prob.theta1
        )
    d = prob.dim
    return prob.sigma2 * (d * prob.e_field - (d - 1) - prob.theta1) / (1 - prob.theta1)


def regime_classify(prob: Problem, cfg: SolverConfig = DEFAULT_SOLVER) -> RegimeVerdict:
    """Classify how x₀ moves with p for E > 1, cross-checked numerically.

    The threshold verdict is compared with the sign of the computed ∂x₀/∂p;
    a disagreement is reported through the consistency flag and logged.

    Raises:
        DomainError: Unless E > 1 and 0 < θ₁ < 1
    """
    if not prob.e_field > 1:
        raise DomainError(
            "regime classification requires E > 1", field_name="e_field", invalid_value=prob.e_field
        )
    if not 0 < prob.theta1 < 1:
        raise DomainError(
            "regime classification requires 0 < theta1 < 1",
            field_name="theta1",
            invalid_value=prob.theta1,
        )

    threshold = regime_threshold(prob)
    if abs(prob.sigma1 - threshold) <= FLAT_TOLERANCE * max(abs(prob.sigma1), abs(threshold)):
        regime = Regime.FLAT
    elif prob.sigma1 > threshold:
        regime = Regime.INCREASING
    else:
        regime = Regime.DECREASING

    derivative = dx0_dp(prob, solve_root(prob, _tight(cfg)))
    if abs(derivative) <= FLAT_TOLERANCE:
        numeric = Regime.FLAT
    else:
        numeric = Regime.INCREASING if derivative > 0 else Regime.DECREASING

    consistency = ConsistencyFlag.AGREE if numeric is regime else ConsistencyFlag.DISAGREE
    if consistency is ConsistencyFlag.DISAGREE:
        logger.warning(
            f"threshold verdict {regime.value} disagrees with computed dx0/dp={derivative:.3e} "
            f"for {prob}"
        )
    return RegimeVerdict(
        regime=regime,
        threshold=threshold,
        dx0_dp=derivative,
        numeric_regime=numeric,
        consistency=consistency,
    )


def _central(fn: Callable[[Problem], float], minus: Problem, plus: Problem, step: float) -> float:
    return (fn(plus) - fn(minus)) / (2 * step)


def _rel_mismatch(analytic: float, estimate: float, floor: float) -> float:
    return abs(analytic - estimate) / max(abs(analytic), abs(estimate), floor)


def full_report(
    prob: Problem,
    cfg: SolverConfig = DEFAULT_SOLVER,
    fd_step: float = DEFAULT_FD_STEP,
) -> SensitivityReport:
    """All four analytic derivatives with central finite-difference checks.

    Each parameter is perturbed by max(fd_step, fd_step·|param|) and the root
    is re-solved at both perturbed points. Mismatches are relative to the
    larger of the two estimates, floored at 1e−8·E for x₀ derivatives and
    1e−8·σ₂ for σ* derivatives so exact zeros do not divide by zero.

    Raises:
        DomainError: Unless 0 < θ₁ < 1
        StepError: If θ₁ ± h leaves (0, 1) or p − h ≤ 1
        ConvergenceError: Propagated from the root solver
    """
    if not 0 < prob.theta1 < 1:
        raise DomainError(
            "full_report requires 0 < theta1 < 1", field_name="theta1", invalid_value=prob.theta1
        )
    if not fd_step > 0:
        raise StepError("fd_step must be positive", parameter="fd_step", step=fd_step)

    h_p = max(fd_step, fd_step * abs(prob.p))
    h_theta = max(fd_step, fd_step * abs(prob.theta1))
    if prob.p - h_p <= 1:
        raise StepError(f"p - h = {prob.p - h_p} must exceed 1", parameter="p", step=h_p)
    if prob.theta1 - h_theta <= 0 or prob.theta1 + h_theta >= 1:
        raise StepError(
            f"theta1 +/- h leaves (0, 1) for h = {h_theta}", parameter="theta1", step=h_theta
        )

    tight = _tight(cfg)
    root = solve_root(prob, tight)
    analytic = (
        dx0_dp(prob, root),
        dsigma_dp(prob, root),
        dx0_dtheta(prob, root),
        dsigma_dtheta(prob, root),
    )

    def x0_of(q: Problem) -> float:
        return effective_conductivity(q, tight).x0

    def sigma_of(q: Problem) -> float:
        return effective_conductivity(q, tight).sigma_star

    p_minus, p_plus = prob.with_(p=prob.p - h_p), prob.with_(p=prob.p + h_p)
    t_minus = prob.with_(theta1=prob.theta1 - h_theta)
    t_plus = prob.with_(theta1=prob.theta1 + h_theta)
    estimates = (
        _central(x0_of, p_minus, p_plus, h_p),
        _central(sigma_of, p_minus, p_plus, h_p),
        _central(x0_of, t_minus, t_plus, h_theta),
        _central(sigma_of, t_minus, t_plus, h_theta),
    )

    floors = (1e-8 * prob.e_field, 1e-8 * prob.sigma2) * 2
    mismatch = max(
        _rel_mismatch(a, e, floor) for a, e, floor in zip(analytic, estimates, floors)
    )
    logger.debug(f"sensitivity max relative mismatch {mismatch:.3e} for {prob}")
    return SensitivityReport(
        dx0_dp=analytic[0],
        dsigma_dp=analytic[1],
        dx0_dtheta=analytic[2],
        dsigma_dtheta=analytic[3],
        fd_dx0_dp=estimates[0],
        fd_dsigma_dp=estimates[1],
        fd_dx0_dtheta=estimates[2],
        fd_dsigma_dtheta=estimates[3],
        max_rel_mismatch=mismatch,
    )


def validation_grid(
    n: int = 50,
    seed: int = GRID_SEED,
    e_values: tuple[float, ...] = (0.7, 1.0, 2.0),
) -> list[Problem]:
    """Deterministic random problems for finite-difference validation.

    E cycles through e_values; σ₁/σ₂ ∈ [1.5, 10], σ₂ ∈ [0.5, 2],
    p ∈ [1.3, 6], θ₁ ∈ [0.05, 0.95] and d alternates between 3 and 2.
    """
    rng = np.random.default_rng(seed)
    problems = []
    for i in range(n):
        sigma2 = float(rng.uniform(0.5, 2.0))
        problems.append(
            Problem(
                sigma1=sigma2 * float(rng.uniform(1.5, 10.0)),
                sigma2=sigma2,
                p=float(rng.uniform(1.3, 6.0)),
                e_field=e_values[i % len(e_values)],
                theta1=float(rng.uniform(0.05, 0.95)),
                dim=3 if i % 2 == 0 else 2,
            )
        )
    return problems


def validate_grid(
    problems: list[Problem],
    cfg: SolverConfig = DEFAULT_SOLVER,
    fd_step: float = DEFAULT_FD_STEP,
) -> float:
    """Worst max_rel_mismatch of full_report over the problems."""
    return max(full_report(prob, cfg, fd_step).max_rel_mismatch for prob in problems)


async def avalidate_grid(
    problems: list[Problem],
    cfg: SolverConfig = DEFAULT_SOLVER,
    fd_step: float = DEFAULT_FD_STEP,
    threads: int | None = None,
) -> float:
    """Async validate_grid; problems run in worker threads, reduced with max."""
    reports = await run_bounded(
        [partial(full_report, prob, cfg, fd_step) for prob in problems],
        num_threads(threads),
    )
    return max(report.max_rel_mismatch for report in reports)
