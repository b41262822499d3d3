"""nilkit command line.

Subcommands: solve, field, sens, table, sweep and verify. Data goes to
standard output (or --output) as CSV or JSON Lines; diagnostics go to
standard error.

Exit codes: 0 success, 1 golden diff failure, 2 argument, configuration or
domain error, 3 solver failure.
"""

import argparse
import asyncio
import logging
import sys
from collections.abc import Callable, Mapping, Sequence
from pathlib import Path
from typing import NoReturn, TextIO

from nilkit import __version__
from nilkit.cli.config import Command, OutputFormat, RunConfig, build_run_config
from nilkit.core.exceptions import (
    ConfigurationError,
    ConvergenceError,
    InternalInconsistencyError,
    NeutralInclusionError,
)
from nilkit.core.field import build_field, energy_identity, harmonicity_check, residuals
from nilkit.core.golden import load_golden
from nilkit.core.kernel import effective_conductivity, interface_fn
from nilkit.core.models import Quantity, geometry_factors
from nilkit.core.report import (
    Axis,
    Columnar,
    SweepSpec,
    agenerate_table,
    asweep,
    figure_dataset,
    format_like,
    golden_diff,
    table_dataset,
    table_spec,
    write_csv,
    write_jsonl,
)
from nilkit.core.sensitivity import full_report, regime_classify

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DIFF = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3

Columns = dict[str, Columnar]


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports errors in one line on standard error."""

    def error(self, message: str) -> NoReturn:
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    noise = parent.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", help="log debug output")
    noise.add_argument("-q", "--quiet", action="store_true", help="log errors only")
    parent.add_argument("--config", type=Path, help="flat key = value config file")
    parent.add_argument("-o", "--output", type=Path, help="write data here instead of stdout")
    parent.add_argument(
        "--format", choices=[f.value for f in OutputFormat], help="output format (default csv)"
    )
    parent.add_argument(
        "--threads", type=int, help="worker threads (overrides NIL_NUM_THREADS)"
    )
    parent.add_argument("--abs-tol", dest="abs_tol", type=float, help="root residual tolerance")
    parent.add_argument("--x-tol", dest="x_tol", type=float, help="bracket width tolerance")
    parent.add_argument("--max-iter", dest="max_iter", type=int, help="solver iteration cap")
    return parent


def _problem_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("problem")
    group.add_argument("--sigma1", type=float, help="core conductivity coefficient (default 10)")
    group.add_argument("--sigma2", type=float, help="coating conductivity (default 1)")
    group.add_argument("--p", type=float, help="core exponent, > 1 (default 2)")
    group.add_argument("--e", dest="e_field", type=float, help="applied field E (default 1)")
    group.add_argument("--theta1", type=float, help="core fraction in [0, 1] (default 0.5)")
    group.add_argument("--dim", type=int, help="dimension, 2 or 3 (default 3)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with every subcommand."""
    common = _common_parent()
    problem = _problem_parent()

    parser = _Parser(
        prog="nilkit",
        description="Nonlinear neutral coated inclusions: roots, fields, sensitivities and tables.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser(
        Command.SOLVE.value, parents=[common, problem], help="root, sigma* and branch of a problem"
    )

    field = sub.add_parser(
        Command.FIELD.value, parents=[common, problem], help="field coefficients and checks"
    )
    field.add_argument("--re", dest="r_e", type=float, help="exterior radius (default 1)")
    field.add_argument(
        "--points", type=int, help="harmonicity sample points (default 100)"
    )
    field.add_argument("--step", type=float, help="Laplacian stencil step (default 1e-3)")
    field.add_argument(
        "--quad-order", dest="quad_order", type=int, help="Gauss-Legendre order, >= 4 (default 32)"
    )

    sens = sub.add_parser(
        Command.SENS.value, parents=[common, problem], help="analytic and finite-difference derivatives"
    )
    sens.add_argument("--fd-step", dest="fd_step", type=float, help="relative FD step (default 1e-6)")

    table = sub.add_parser(Command.TABLE.value, parents=[common], help="emit a reference table")
    table.add_argument("--id", dest="table_id", type=int, help="table id 1..6")

    verify = sub.add_parser(
        Command.VERIFY.value, parents=[common], help="diff a regenerated table against its reference"
    )
    verify.add_argument("--id", dest="table_id", type=int, help="table id 1..6")
    verify.add_argument("--golden", type=Path, help="reference YAML replacing the shipped table")

    sweep = sub.add_parser(
        Command.SWEEP.value, parents=[common, problem], help="sweep p or theta1"
    )
    sweep.add_argument("--axis", choices=[a.value for a in Axis], help="swept parameter")
    sweep.add_argument("--from", dest="lo", type=float, help="first grid value")
    sweep.add_argument("--to", dest="hi", type=float, help="last grid value")
    sweep.add_argument("--n", dest="n_points", type=int, help="grid points (default 101)")
    sweep.add_argument(
        "--quantity",
        dest="quantities",
        action="append",
        choices=[q.value for q in Quantity],
        help="column to emit, repeatable (default sigma)",
    )
    sweep.add_argument("--figure", help="emit a named figure family instead")
    return parser


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.WARNING
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _solve(cfg: RunConfig) -> Columns:
    prob = cfg.problem()
    result = effective_conductivity(prob, cfg.solver())
    if result.root is not None:
        residual: float | None = result.root.residual
    elif 0 < prob.theta1 < 1:
        residual = abs(interface_fn(result.x0, prob, geometry_factors(prob)))
    else:
        residual = None
    return {
        "x0": [result.x0],
        "sigma_star": [result.sigma_star],
        "residual": [residual],
        "branch": [result.branch],
        "hs_value": [result.hs_value],
    }


def _field(cfg: RunConfig) -> Columns:
    sol = build_field(cfg.problem(), cfg.r_e, cfg.solver())
    c = sol.coeffs
    res = residuals(sol)
    energy = energy_identity(sol, cfg.quad_order)
    return {
        "a1": [c.a1],
        "a2": [c.a2],
        "b2": [c.b2],
        "r_c": [c.r_c],
        "r_e": [c.r_e],
        "sigma_star": [sol.sigma_star],
        "res_potential_rc": [res[0]],
        "res_flux_rc": [res[1]],
        "res_potential_re": [res[2]],
        "res_flux_re": [res[3]],
        "harmonicity": [harmonicity_check(sol, cfg.points, cfg.step)],
        "core_dissipation": [energy.core_dissipation],
        "coating_dissipation": [energy.coating_dissipation],
        "homogeneous_dissipation": [energy.homogeneous_dissipation],
        "energy_rel_error": [energy.rel_error],
    }


def _sens(cfg: RunConfig) -> Columns:
    prob = cfg.problem()
    report = full_report(prob, cfg.solver(), cfg.fd_step)
    columns: Columns = {
        "dx0_dp": [report.dx0_dp],
        "dsigma_dp": [report.dsigma_dp],
        "dx0_dtheta": [report.dx0_dtheta],
        "dsigma_dtheta": [report.dsigma_dtheta],
        "fd_dx0_dp": [report.fd_dx0_dp],
        "fd_dsigma_dp": [report.fd_dsigma_dp],
        "fd_dx0_dtheta": [report.fd_dx0_dtheta],
        "fd_dsigma_dtheta": [report.fd_dsigma_dtheta],
        "max_rel_mismatch": [report.max_rel_mismatch],
    }
    # regime classification only exists for E > 1
    verdict = regime_classify(prob, cfg.solver()) if prob.e_field > 1 else None
    columns["regime"] = [verdict.regime if verdict else None]
    columns["regime_threshold"] = [verdict.threshold if verdict else None]
    columns["regime_consistency"] = [verdict.consistency if verdict else None]
    return columns


def _table(cfg: RunConfig) -> Columns:
    spec = table_spec(_table_id(cfg))
    matrix = asyncio.run(agenerate_table(spec, cfg.solver(), cfg.threads))
    return dict(table_dataset(spec, matrix))


def _sweep(cfg: RunConfig) -> Columns:
    if cfg.figure is not None:
        return dict(figure_dataset(cfg.figure, cfg.n_points, cfg.solver()))
    spec = SweepSpec(
        axis=cfg.axis,
        lo=cfg.lo,
        hi=cfg.hi,
        n_points=cfg.n_points,
        fixed=cfg.problem(),
        quantities=cfg.quantities,
    )
    return dict(asyncio.run(asweep(spec, cfg.solver(), cfg.threads)))


def _verify(cfg: RunConfig) -> tuple[Columns, int]:
    table_id = _table_id(cfg)
    spec = table_spec(table_id)
    golden = load_golden(table_id, cfg.golden)
    matrix = asyncio.run(agenerate_table(spec, cfg.solver(), cfg.threads))
    report = golden_diff(matrix, table_id, golden)
    rows = report.mismatches
    columns: Columns = {
        "theta1": [m.theta1 for m in rows],
        "p": [m.p for m in rows],
        "computed": [format_like(m.computed, m.golden) for m in rows],
        "golden": [m.golden for m in rows],
        "delta": [m.delta for m in rows],
    }
    if report.passed:
        logger.info(f"table {table_id} reproduced ({len(report.notes)} notes)")
        return columns, EXIT_OK
    logger.error(f"table {table_id}: {len(rows)} cell(s) differ from the reference")
    return columns, EXIT_DIFF


def _table_id(cfg: RunConfig) -> int:
    if cfg.table_id is None:
        raise ConfigurationError("a table id is required (--id or table_id)", parameter_name="table_id")
    return cfg.table_id


_HANDLERS: dict[Command, Callable[[RunConfig], Columns]] = {
    Command.SOLVE: _solve,
    Command.FIELD: _field,
    Command.SENS: _sens,
    Command.TABLE: _table,
    Command.SWEEP: _sweep,
}


def _write(columns: Mapping[str, Columnar], cfg: RunConfig, stdout: TextIO) -> None:
    writer = write_csv if cfg.format is OutputFormat.CSV else write_jsonl
    if cfg.output is None:
        writer(columns, stdout)
        return
    with cfg.output.open("w", encoding="utf-8", newline="") as stream:
        writer(columns, stream)


def run(cfg: RunConfig, stdout: TextIO | None = None) -> int:
    """Execute one validated configuration and write its data.

    Returns:
        EXIT_OK, or EXIT_DIFF when verify finds mismatching cells
    """
    out = sys.stdout if stdout is None else stdout
    logger.debug(f"running {cfg.command.value}")
    if cfg.command is Command.VERIFY:
        columns, code = _verify(cfg)
    else:
        columns, code = _HANDLERS[cfg.command](cfg), EXIT_OK
    _write(columns, cfg, out)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    """Console entry point.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    _configure_logging(args.verbose, args.quiet)
    flags = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "verbose", "quiet", "config")
    }

    try:
        cfg = build_run_config(Command(args.command), flags, args.config)
        return run(cfg)
    except (ConvergenceError, InternalInconsistencyError) as e:
        print(f"nilkit: solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except NeutralInclusionError as e:
        print(f"nilkit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"nilkit: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
