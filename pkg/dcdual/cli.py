"""Command-line front end.

Subcommands:

- ``solve <file>``: maximize the dual on S_a+, search every stationary
  point, print one row per critical pair and optionally write the results
  file.
- ``check <file>``: cross-check the dual answer against the brute-force
  oracle and run the finite-difference derivative suites.
- ``contour <file> (--primal|--dual)``: write a rectangular-grid CSV of Pi
  or Pi^d for any contour plotter.
- ``info <file>``: print dimensions, spectral bounds and the symmetry
  deviation found on ingestion.

Exit codes: 0 success, 1 unreadable or invalid input, 2 unsupported request
(no interior start, oracle dimension, non-plottable contour), 3 numerical
failure or a FAIL verdict.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table

from .dual_model import eval_dual
from .errors import DcDualError, DualDomainError, NoInteriorStartError, OracleDimensionError, ProblemValidationError, SingularGError
from .models import CriticalPointReport, DerivativeCheck, DualPoint, GridSpec, PrimalProblem, ProblemFile, SolveConfig, TrialityClass, Verdict, load_problem
from .models._base import write_records
from .models.settings import LOG_LEVEL_ENV_VAR
from .models.shared import ContourKind
from .oracle import MAX_ORACLE_DIM, check_derivatives, cross_check
from .problem_model import eval_primal_batch
from .solver import maximize_dual_on_sa_plus, search_stationary_points, verify_gap
from .utils import format_sig, format_vector

__all__ = ["EXIT_INVALID", "EXIT_NUMERICAL", "EXIT_OK", "EXIT_UNSUPPORTED", "build_parser", "configure_logging", "main"]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNSUPPORTED = 2
EXIT_NUMERICAL = 3

DEFAULT_HALF_WIDTH = 3.0
NA_MARKER = "NA"


# MARK: Logging
def configure_logging(level: int | str | None = None) -> None:
    """
    Install a single Rich handler on the package logger.

    :param level: Log level; defaults to ``DCDUAL_LOG_LEVEL`` or WARNING
    :type level: int | str | None
    """

    if level is None:
        level = os.environ.get(LOG_LEVEL_ENV_VAR, "WARNING").upper()
    package_logger = logging.getLogger("dcdual")
    for handler in list(package_logger.handlers):
        if isinstance(handler, RichHandler):
            package_logger.removeHandler(handler)
    package_logger.addHandler(RichHandler(rich_tracebacks=True, show_path=False))
    package_logger.setLevel(level)
    package_logger.propagate = False


# MARK: Parser
def _window(text: str) -> tuple[float, float, float, float]:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"window must be four comma-separated numbers, got {text!r}") from exc
    if len(values) != 4:
        raise argparse.ArgumentTypeError(f"window must be lo,hi,lo,hi, got {text!r}")
    if values[0] >= values[1] or values[2] >= values[3]:
        raise argparse.ArgumentTypeError("window bounds must satisfy lo < hi on both axes")
    return values


def _attach_option_values(argv: Sequence[str], options: tuple[str, ...] = ("--window",)) -> list[str]:
    """Join ``--window -2,2,-2,2`` into ``--window=-2,2,-2,2`` so a leading minus is not read as a flag."""

    joined: list[str] = []
    tokens = iter(argv)
    for token in tokens:
        if token in options:
            value = next(tokens, None)
            joined.append(token if value is None else f"{token}={value}")
        else:
            joined.append(token)
    return joined


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcdual", description="Canonical dual solver for exponential-quartic d.c. problems")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log solver progress at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Find and classify the critical points of a problem")
    solve.add_argument("file", type=Path, help="Problem file (JSON)")
    solve.add_argument("--out", "-o", type=Path, default=None, help="Write the results as a JSON array of reports")
    solve.add_argument("--seed", type=int, default=None, help="Multistart seed (overrides the problem file)")
    solve.add_argument("--starts", type=int, default=None, help="Number of random multistart seeds")
    solve.add_argument("--progress", action="store_true", default=None, help="Show a progress bar over multistart seeds")

    check = sub.add_parser("check", help="Cross-check against the brute-force oracle and finite differences")
    check.add_argument("file", type=Path, help="Problem file (JSON)")
    check.add_argument("--grid-lo", type=float, default=-5.0, help="Lower grid bound on every axis")
    check.add_argument("--grid-hi", type=float, default=5.0, help="Upper grid bound on every axis")
    check.add_argument("--grid-n", type=int, default=201, help="Grid points per axis")
    check.add_argument("--seed", type=int, default=0, help="Seed of the derivative-check sampler")
    check.add_argument("--points", type=int, default=20, help="Random points per derivative family")

    contour = sub.add_parser("contour", help="Write contour data of Pi or Pi^d as CSV")
    contour.add_argument("file", type=Path, help="Problem file (JSON)")
    kind = contour.add_mutually_exclusive_group(required=True)
    kind.add_argument("--primal", dest="kind", action="store_const", const=ContourKind.PRIMAL, help="Contour Pi over x (needs n = 2)")
    kind.add_argument("--dual", dest="kind", action="store_const", const=ContourKind.DUAL, help="Contour Pi^d over zeta (needs p + r = 2)")
    contour.add_argument("--window", type=_window, default=None, help="lo,hi,lo,hi (default: MIN_MAX solution +/- 3)")
    contour.add_argument("--res", type=int, default=201, help="Grid points per axis")
    contour.add_argument("--out", "-o", type=Path, required=True, help="Destination CSV")

    info = sub.add_parser("info", help="Describe a problem file")
    info.add_argument("file", type=Path, help="Problem file (JSON)")
    return parser


# MARK: Helpers
def _load(path: Path, console: Console) -> tuple[ProblemFile, PrimalProblem] | None:
    try:
        return load_problem(path)
    except FileNotFoundError:
        console.print(f"[bold red]Error:[/bold red] problem file not found: {path}")
    except (ProblemValidationError, DcDualError, ValueError) as exc:
        console.print(f"[bold red]Error:[/bold red] {exc}")
    return None


def _numerical_failure(console: Console, exc: DcDualError) -> int:
    console.print(f"[bold red]Numerical failure:[/bold red] {exc}")
    return EXIT_NUMERICAL


def _progress(console: Console) -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    )


def _merge_global(global_report: CriticalPointReport, reports: list[CriticalPointReport], cfg: SolveConfig) -> list[CriticalPointReport]:
    """Make sure the S_a+ maximizer is listed even if its multistart copy was dropped."""

    zeta = np.asarray(global_report.zeta_vector)
    for report in reports:
        if float(np.linalg.norm(np.asarray(report.zeta_vector) - zeta)) <= cfg.dedup_tol * (1.0 + float(np.linalg.norm(zeta))):
            return reports
    return [global_report, *reports]


# MARK: solve
def cmd_solve(args: argparse.Namespace, console: Console) -> int:
    """
    Run the S_a+ maximization and the multistart search.

    :return: 0 when a converged MIN_MAX pair was found, 2 on no interior start, 3 on other numerical failures
    :rtype: int
    """

    loaded = _load(args.file, console)
    if loaded is None:
        return EXIT_INVALID
    spec, problem = loaded
    cfg = (spec.config or SolveConfig()).merged(seed=args.seed, multistart_count=args.starts, progress=args.progress)

    with _progress(console) as progress:
        task = progress.add_task("Maximizing Pi^d on S_a+", total=2)
        try:
            global_report = maximize_dual_on_sa_plus(problem, cfg)
        except NoInteriorStartError as exc:
            progress.stop()
            console.print(f"[bold red]Error:[/bold red] {exc}")
            return EXIT_UNSUPPORTED
        except DcDualError as exc:
            progress.stop()
            return _numerical_failure(console, exc)
        progress.update(task, description=f"Searching stationary points ({cfg.multistart_count + cfg.sa_minus_seed_count} starts)", advance=1)
        search = search_stationary_points(problem, cfg)
        progress.update(task, description="Completed", advance=1)

    reports = _merge_global(global_report, search.reports, cfg)
    title = f"Critical points: {spec.name}" if spec.name else "Critical points"
    CriticalPointReport.render_many(reports, console, title=title)
    search.render(console)
    console.print(f"Delta at the S_a+ maximizer: {format_sig(global_report.delta)} ({'global minimum certified' if global_report.delta > 0 else 'not certified'})")

    if args.out is not None:
        write_records(reports, args.out)
        console.print(f"Wrote {len(reports)} reports to {args.out}")

    if not global_report.converged or global_report.triality != TrialityClass.MIN_MAX:
        console.print(f"[bold red]Numerical failure:[/bold red] S_a+ maximizer did not converge (gap {global_report.gap_residual:.3e})")
        return EXIT_NUMERICAL
    return EXIT_OK


# MARK: check
def _worst_per_check(checks: list[DerivativeCheck]) -> list[DerivativeCheck]:
    worst: dict[str, DerivativeCheck] = {}
    for check in checks:
        kept = worst.get(check.name)
        if kept is None or check.relative_error > kept.relative_error:
            worst[check.name] = check
    return list(worst.values())


def cmd_check(args: argparse.Namespace, console: Console) -> int:
    """
    Oracle cross-check, derivative suites and the duality-gap check.

    :return: 0 when every check passes, 2 when n > 3 or no interior start exists, 3 on any FAIL
    :rtype: int
    """

    loaded = _load(args.file, console)
    if loaded is None:
        return EXIT_INVALID
    spec, problem = loaded
    if problem.n > MAX_ORACLE_DIM:
        console.print(f"[bold red]Error:[/bold red] oracle limited to n ≤ {MAX_ORACLE_DIM} (got n = {problem.n})")
        return EXIT_UNSUPPORTED
    cfg = spec.config or SolveConfig()
    try:
        grid = GridSpec.box(problem.n, args.grid_lo, args.grid_hi, args.grid_n)
    except ValueError as exc:
        console.print(f"[bold red]Error:[/bold red] invalid grid: {exc}")
        return EXIT_INVALID

    with _progress(console) as progress:
        task = progress.add_task("Maximizing Pi^d on S_a+", total=3)
        try:
            report = maximize_dual_on_sa_plus(problem, cfg)
            progress.update(task, description=f"Brute-force oracle ({args.grid_n}^{problem.n} cells)", advance=1)
            verdict = cross_check(problem, cfg, grid, report=report)
            progress.update(task, description="Finite-difference derivative checks", advance=1)
            checks = check_derivatives(problem, np.random.default_rng(args.seed), args.points, cfg)
            progress.update(task, description="Completed", advance=1)
        except NoInteriorStartError as exc:
            progress.stop()
            console.print(f"[bold red]Error:[/bold red] {exc}")
            return EXIT_UNSUPPORTED
        except OracleDimensionError as exc:
            progress.stop()
            console.print(f"[bold red]Error:[/bold red] {exc}")
            return EXIT_UNSUPPORTED
        except DcDualError as exc:
            progress.stop()
            return _numerical_failure(console, exc)

    gap = verify_gap(problem, report)
    gap_check = DerivativeCheck(name="duality_gap", point=report.zeta_vector, relative_error=gap, tolerance=cfg.gap_tol, verdict=Verdict.of(gap <= cfg.gap_tol))
    summary = [*_worst_per_check(checks), gap_check]

    verdict.render(console)
    DerivativeCheck.render_many(summary, console, title="Worst residual per check")

    failed = [c.name for c in summary if c.verdict == Verdict.FAIL]
    if verdict.verdict == Verdict.FAIL:
        failed.insert(0, "oracle")
    if failed:
        console.print(f"[bold red]FAIL[/bold red]: {', '.join(failed)}")
        return EXIT_NUMERICAL
    console.print("[bold green]PASS[/bold green]")
    return EXIT_OK


# MARK: contour
def _default_window(problem: PrimalProblem, cfg: SolveConfig, kind: ContourKind) -> tuple[float, float, float, float]:
    try:
        report = maximize_dual_on_sa_plus(problem, cfg)
        center = report.x if kind == ContourKind.PRIMAL else report.zeta_vector
    except DcDualError as exc:
        logger.warning("no MIN_MAX solution to center the window on (%s), using the origin", exc)
        center = [0.0, 0.0]
    return (center[0] - DEFAULT_HALF_WIDTH, center[0] + DEFAULT_HALF_WIDTH, center[1] - DEFAULT_HALF_WIDTH, center[1] + DEFAULT_HALF_WIDTH)


def _dual_columns(problem: PrimalProblem) -> list[str]:
    return [f"tau_{i + 1}" for i in range(problem.p)] + [f"sigma_{j + 1}" for j in range(problem.r)]


def _dual_values(problem: PrimalProblem, points: np.ndarray, cfg: SolveConfig) -> np.ndarray:
    values = np.full(points.shape[0], np.nan)
    for k, point in enumerate(points):
        try:
            values[k] = eval_dual(problem, DualPoint.from_vector(point, problem.p), cfg.singular_tol)
        except (DualDomainError, SingularGError):
            continue
    return values


def contour_frame(problem: PrimalProblem, kind: ContourKind, window: tuple[float, float, float, float], res: int, cfg: SolveConfig | None = None) -> pd.DataFrame:
    """
    Tabulate Pi (over x) or Pi^d (over zeta) on a res x res grid.

    Rows run with the first coordinate slowest. Dual cells with tau <= 0 or
    singular G, and primal cells whose exponentials overflow, hold NaN.
    """

    cfg = cfg or SolveConfig()
    axis_1 = np.linspace(window[0], window[1], res)
    axis_2 = np.linspace(window[2], window[3], res)
    mesh_1, mesh_2 = np.meshgrid(axis_1, axis_2, indexing="ij")
    points = np.column_stack([mesh_1.reshape(-1), mesh_2.reshape(-1)])
    if kind == ContourKind.PRIMAL:
        columns = ["x_1", "x_2"]
        values = eval_primal_batch(problem, points, on_overflow="mask")
    else:
        columns = _dual_columns(problem)
        values = _dual_values(problem, points, cfg)
    frame = pd.DataFrame(points, columns=columns)
    frame["value"] = values
    return frame


def cmd_contour(args: argparse.Namespace, console: Console) -> int:
    """
    Write contour data.

    :return: 0 on success, 2 when the requested function is not two-dimensional
    :rtype: int
    """

    loaded = _load(args.file, console)
    if loaded is None:
        return EXIT_INVALID
    spec, problem = loaded
    dimension = problem.n if args.kind == ContourKind.PRIMAL else problem.m
    if dimension != 2:
        label = "n" if args.kind == ContourKind.PRIMAL else "p + r"
        console.print(f"[bold red]Error:[/bold red] {args.kind} contour needs {label} = 2 (got {dimension})")
        return EXIT_UNSUPPORTED
    if args.res < 2:
        console.print("[bold red]Error:[/bold red] --res must be at least 2")
        return EXIT_INVALID

    cfg = spec.config or SolveConfig()
    window = args.window or _default_window(problem, cfg, args.kind)
    frame = contour_frame(problem, args.kind, window, args.res, cfg)
    frame.to_csv(args.out, index=False, na_rep=NA_MARKER)
    missing = int(frame["value"].isna().sum())
    console.print(f"Wrote {len(frame)} rows ({args.res}x{args.res}, {missing} marked {NA_MARKER}) over window {format_vector(window)} to {args.out}")
    return EXIT_OK


# MARK: info
def cmd_info(args: argparse.Namespace, console: Console) -> int:
    loaded = _load(args.file, console)
    if loaded is None:
        return EXIT_INVALID
    spec, problem = loaded
    bounds = problem.spectral_bounds

    table = Table(title=f"Problem {spec.name}" if spec.name else "Problem", show_lines=False)
    table.add_column("Quantity", style="magenta")
    table.add_column("Value", style="cyan")
    table.add_row("n, p, r", f"{problem.n}, {problem.p}, {problem.r}")
    table.add_row("lambda_min(A_i)", format_vector(bounds.lambda_min_A))
    table.add_row("lambda_min(B_j)", format_vector(bounds.lambda_min_B))
    table.add_row("lambda_max(B_j)", format_vector(bounds.lambda_max_B))
    table.add_row("lambda_max(C)", format_sig(bounds.lambda_max_C))
    table.add_row("symmetry deviation", f"{problem.symmetry_deviation:.3e}")
    if spec.config is not None:
        table.add_row("config overrides", ", ".join(sorted(spec.config.model_fields_set)) or "-")
    console.print(table)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "check": cmd_check, "contour": cmd_contour, "info": cmd_info}


# MARK: Main
def main(argv: Sequence[str] | None = None, console: Console | None = None) -> int:
    """
    Parse arguments and dispatch to a subcommand.

    :param argv: Arguments without the program name (default: ``sys.argv[1:]``)
    :type argv: Sequence[str] | None
    :param console: Console for user-facing output
    :type console: Console | None
    :return: Process exit code
    :rtype: int
    """

    parser = build_parser()
    try:
        args = parser.parse_args(_attach_option_values(sys.argv[1:] if argv is None else argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    configure_logging(logging.DEBUG if args.verbose else None)
    console = console or Console()
    return COMMANDS[args.command](args, console)
