#!/usr/bin/env python3
# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Command-line front end for displacement-mapping analyses."""

import logging
import math
import sys
from contextlib import contextmanager
from enum import Enum, IntEnum
from fractions import Fraction
from pathlib import Path
from typing import Iterator, List, Optional

import typer

from displacement import NotNonexpansiveError, analyze
from gallery import run_gallery
from numlin import (
    DEFAULT_TOLERANCES,
    InputError,
    NumericalFailureError,
    Tolerances,
    UndefinedQuantityError,
)
from relations import DomainError
from reports import (
    GalleryDocument,
    VerificationDocument,
    dump_json,
    render_text,
    validate_document,
    write_text,
)
from specs import build_operator, describe, dump_spec, load_spec, make_spec, structural_isometry
from suites import DEFAULT_M_MAX, run_suite

logger = logging.getLogger(__name__)

LOG_LEVELS = ["debug", "info", "warning", "error"]


class ExitCode(IntEnum):
    """Process exit codes."""

    PASS = 0
    CHECK_FAILURE = 1
    INPUT_ERROR = 2
    NOT_NONEXPANSIVE = 3


class OutputFormat(str, Enum):
    """Report formats."""

    JSON = "json"
    TEXT = "text"


app = typer.Typer(
    name="dispmap",
    help="Analyze and verify displacement mappings Id - R of linear nonexpansive R.",
    no_args_is_help=True,
    add_completion=False,
)

OUT_OPTION = typer.Option(None, "--out", "-o", help="Write to this path instead of stdout.")
FORMAT_OPTION = typer.Option(OutputFormat.JSON, "--format", help="Report format.")
TOL_OPTION = typer.Option(
    None, "--tol", help="Identity and PSD tolerance (default 1e-9).", min=0.0
)
SEED_OPTION = typer.Option(0, "--seed", help="Seed of the PCG64 generator.", min=0, max=2**64 - 1)


def _is_log_level_valid(log_level: str) -> bool:
    return log_level in LOG_LEVELS


def _tolerances(tol: Optional[float]) -> Tolerances:
    if tol is None:
        return DEFAULT_TOLERANCES
    if not math.isfinite(tol) or tol <= 0:
        raise InputError(f"--tol must be a positive number, got {tol}")
    return Tolerances(identity_tol=tol, psd_tol=tol)


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        typer.echo(text, nl=False)
    else:
        write_text(out, text)


@contextmanager
def _exit_on_error() -> Iterator[None]:
    """Map library exceptions to exit codes."""
    try:
        yield
    except NotNonexpansiveError as e:
        typer.echo(f"error: not nonexpansive: {e}", err=True)
        raise typer.Exit(ExitCode.NOT_NONEXPANSIVE)
    except (InputError, DomainError, UndefinedQuantityError) as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(ExitCode.INPUT_ERROR)
    except NumericalFailureError as e:
        logger.error("Numerical failure, residuals: %s", e.residuals)
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(ExitCode.CHECK_FAILURE)


def _parse_turns(values: List[str]) -> List[float]:
    angles = []
    for value in values:
        try:
            turns = Fraction(value)
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"--turns expects p/q, got {value!r}") from e
        angles.append(2 * math.pi * float(turns))
    return angles


def _parse_ints(value: Optional[str], option: str) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(item) for item in value.split(",")]
    except ValueError as e:
        raise InputError(f"{option} expects comma-separated integers, got {value!r}") from e


def _parse_rows(value: Optional[str]) -> Optional[List[List[float]]]:
    if value is None:
        return None
    try:
        return [[float(item) for item in row.split(",")] for row in value.split(";")]
    except ValueError as e:
        raise InputError(f"--rows expects 'a,b;c,d', got {value!r}") from e


class _StderrHandler(logging.StreamHandler):
    """Stream handler bound to whatever sys.stderr is when a record is emitted."""

    def emit(self, record: logging.LogRecord) -> None:
        self.stream = sys.stderr
        super().emit(record)


@app.callback()
def configure(
    log_level: str = typer.Option(
        "warning", "--log-level", help="One of " + ", ".join(LOG_LEVELS)
    ),
) -> None:
    """Configure logging for every command."""
    if not _is_log_level_valid(log_level):
        typer.echo(f"error: invalid log level {log_level!r}", err=True)
        raise typer.Exit(ExitCode.INPUT_ERROR)
    logging.basicConfig(
        level=log_level.upper(),
        format="%(levelname)s %(name)s: %(message)s",
        handlers=[_StderrHandler()],
        force=True,
    )


@app.command()
def make(
    kind: str = typer.Argument(..., help="Operator kind, e.g. cyclic, projection, random."),
    n: Optional[int] = typer.Option(None, "--n", help="Ambient dimension.", min=1),
    dim_u: Optional[int] = typer.Option(None, "--dimU", "--dim-u", help="Dimension of U.", min=0),
    seed: int = SEED_OPTION,
    norm_cap: float = typer.Option(0.95, "--norm-cap", help="Operator norm of random R."),
    turns: List[str] = typer.Option([], "--turns", help="Rotation block angle as p/q turns."),
    permutation: Optional[str] = typer.Option(None, "--permutation", help="e.g. 1,2,0"),
    signs: Optional[str] = typer.Option(None, "--signs", help="e.g. 1,-1,1"),
    rows: Optional[str] = typer.Option(None, "--rows", help="Matrix rows, e.g. '0,1;1,0'."),
    out: Optional[Path] = OUT_OPTION,
) -> None:
    """Write an operator specification."""
    with _exit_on_error():
        spec = make_spec(
            kind,
            n=n,
            dim_u=dim_u,
            seed=seed,
            norm_cap=norm_cap,
            angles=_parse_turns(turns) or None,
            permutation=_parse_ints(permutation, "--permutation"),
            signs=_parse_ints(signs, "--signs"),
            rows=_parse_rows(rows),
        )
        _emit(dump_spec(spec), out)


@app.command(name="analyze")
def analyze_command(
    spec_path: Path = typer.Argument(..., help="Operator specification file."),
    tol: Optional[float] = TOL_OPTION,
    output_format: OutputFormat = FORMAT_OPTION,
    out: Optional[Path] = OUT_OPTION,
) -> None:
    """Compute D, the projectors, T, the pseudoinverse, alpha and the resolvents."""
    with _exit_on_error():
        tolerances = _tolerances(tol)
        spec = load_spec(spec_path)
        analysis = analyze(build_operator(spec), tolerances)
        payload = {
            "spec": spec.model_dump(exclude_none=True),
            "tolerances": tolerances.model_dump(),
            "analysis": analysis.to_dict(),
        }
        if output_format == OutputFormat.JSON:
            _emit(dump_json(payload), out)
        else:
            _emit(render_text("analysis.txt.j2", summary=describe(spec), **payload), out)


@app.command()
def verify(
    spec_path: Path = typer.Argument(..., help="Operator specification file."),
    suite: str = typer.Option(
        "all", "--suite", help="all, inverse, resolvent, isometry or properties"
    ),
    tol: Optional[float] = TOL_OPTION,
    seed: int = SEED_OPTION,
    m_max: int = typer.Option(
        DEFAULT_M_MAX, "--m-max", help="Largest isometry order searched.", min=2
    ),
    output_format: OutputFormat = FORMAT_OPTION,
    out: Optional[Path] = OUT_OPTION,
) -> None:
    """Run verification suites; exit 1 when any check fails."""
    with _exit_on_error():
        tolerances = _tolerances(tol)
        spec = load_spec(spec_path)
        analysis = analyze(build_operator(spec), tolerances)
        outcome = run_suite(suite, analysis, seed, m_max, structural_isometry(spec))
        document = VerificationDocument(
            spec=spec.model_dump(exclude_none=True),
            suite=suite,
            seed=seed,
            tolerances=tolerances,
            checks=outcome.checks,
            skipped=outcome.skipped,
        )
        payload = document.model_dump(by_alias=True, mode="json")
        validate_document(payload, VerificationDocument)
        if output_format == OutputFormat.JSON:
            _emit(dump_json(payload), out)
        else:
            _emit(
                render_text("verification.txt.j2", summary=describe(spec), document=document),
                out,
            )
        failed = [check.check_id for check in outcome.checks if not check.passed]
    if failed:
        logger.error("%s checks failed: %s", len(failed), ", ".join(failed))
        raise typer.Exit(ExitCode.CHECK_FAILURE)


@app.command()
def gallery(
    n: int = typer.Option(6, "--n", help="Ambient dimension.", min=1),
    dim_u: int = typer.Option(3, "--dimU", "--dim-u", help="Dimension of U."),
    seed: int = SEED_OPTION,
    tol: Optional[float] = TOL_OPTION,
    output_format: OutputFormat = FORMAT_OPTION,
    out: Optional[Path] = OUT_OPTION,
) -> None:
    """Run the worked examples and the cyclic shifts of order 2 to 8."""
    with _exit_on_error():
        document = run_gallery(n, dim_u, seed, _tolerances(tol))
        payload = document.model_dump(by_alias=True, mode="json")
        validate_document(payload, GalleryDocument)
        if output_format == OutputFormat.JSON:
            _emit(dump_json(payload), out)
        else:
            _emit(render_text("gallery.txt.j2", document=document), out)
        failed = [
            check.check_id
            for block in document.blocks
            for check in block.checks
            if not check.passed
        ]
    if failed:
        logger.error("%s checks failed: %s", len(failed), ", ".join(failed))
        raise typer.Exit(ExitCode.CHECK_FAILURE)


def main() -> None:
    """Run the command-line application."""
    app(prog_name="dispmap")


if __name__ == "__main__":  # pragma: nocover
    main()
