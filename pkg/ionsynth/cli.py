#!/usr/bin/env python3
"""
ionsynth command line

    ionsynth synthesize --target cat --alpha 2 --mmax 6 --nmax 6
    ionsynth simulate --sequence out/cat_prepare.json --target-file out/cat.json --deltas 0,0.01
    ionsynth check --g 1 --eps-x 0.1 --eps-y 0.1 --nu-x 1 --nu-y 5 --mmax 6 --nmax 6
    ionsynth targets --kind correlated --alpha 2 --mmax 12
    ionsynth truncate --kind cat --alpha 2 --epsilon 1e-3

Exit codes: 0 success, 1 input error, 2 computation failure, 3 feasibility failure.
"""

import sys
import logging
from enum import IntEnum
from pathlib import Path
from typing import Any, Callable, List, Optional

import click
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from . import __version__
from .channels import FeasibilityParams, LambDicke, Nonlinear, RabiRegime, check_feasibility
from .config import NOISE_MODELS, Settings, get_settings
from .errors import ComputationError, InputError
from .fileio import (
    provenance_block,
    read_sequence,
    write_provenance,
    write_report,
    write_sequence,
    write_sweep_csv,
    write_sweep_json,
)
from .fock import embed_target, mean_quanta
from .noise import TRUNCATION_CAP, sweep, truncate_cutoffs
from .synthesizer import de_evolve, op_count_expected, op_count_gczs, preparation_sequence
from .targets import (
    TargetSpec,
    build_target,
    cat_amplitude_rule,
    cat_state,
    correlated_amplitude_rule,
    correlated_state,
    load_custom,
    save,
)

console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    OK = 0
    INPUT_ERROR = 1
    COMPUTATION_ERROR = 2
    FEASIBILITY_FAILED = 3


class ComplexParamType(click.ParamType):
    """Accepts 2, -1.5, 1+2j or 1+2i"""

    name = "complex"

    def convert(
        self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]
    ) -> complex:
        if isinstance(value, complex):
            return value
        try:
            return complex(str(value).replace(" ", "").replace("i", "j"))
        except ValueError:
            self.fail(f"{value!r} is not a complex number", param, ctx)


COMPLEX = ComplexParamType()


class IonSynthGroup(click.Group):
    """Maps library exceptions onto the exit-code contract"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            code = super().main(
                args=args,
                prog_name=prog_name,
                complete_var=complete_var,
                standalone_mode=False,
                **extra,
            )
        except click.exceptions.Abort:
            err_console.print("[red]Aborted[/red]")
            code = ExitCode.INPUT_ERROR
        except click.ClickException as e:
            e.show()
            code = ExitCode.INPUT_ERROR
        except (InputError, ValueError) as e:
            err_console.print(f"[red]Input error: {escape(str(e))}[/red]")
            code = ExitCode.INPUT_ERROR
        except ComputationError as e:
            err_console.print(f"[red]Computation failed: {escape(str(e))}[/red]")
            logger.debug("Computation failure", exc_info=True)
            code = ExitCode.COMPUTATION_ERROR
        code = int(code or 0)
        if standalone_mode:
            sys.exit(code)
        return code


def _settings(ctx: click.Context) -> Settings:
    return ctx.obj["settings"]


def _regime_options(f: Callable[..., Any]) -> Callable[..., Any]:
    f = click.option(
        "--strict", is_flag=True, help="Refuse nonlinear factors for channels 1, 2, 5"
    )(f)
    f = click.option("--eps-y", type=float, default=None, help="Lamb-Dicke parameter, y mode")(f)
    f = click.option("--eps-x", type=float, default=None, help="Lamb-Dicke parameter, x mode")(f)
    f = click.option(
        "--regime",
        type=click.Choice(["lamb-dicke", "nonlinear"]),
        default="lamb-dicke",
        show_default=True,
        help="Rabi factors used for every pulse",
    )(f)
    return f


def _build_regime(
    regime: str, eps_x: Optional[float], eps_y: Optional[float], strict: bool
) -> RabiRegime:
    if regime == "lamb-dicke":
        return LambDicke()
    if eps_x is None or eps_y is None:
        raise InputError("--regime nonlinear needs --eps-x and --eps-y")
    return Nonlinear(eps_x, eps_y, strict)


def _parse_deltas(text: str) -> List[float]:
    try:
        deltas = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InputError(f"--deltas must be a comma-separated list of numbers, got '{text}'")
    if not deltas:
        raise InputError("--deltas needs at least one value")
    if any(d < 0 for d in deltas):
        raise InputError("Noise ranges must be nonnegative")
    return deltas


def _default_path(settings: Settings, name: str) -> Path:
    return Path(settings.output_dir) / name


@click.group(cls=IonSynthGroup)
@click.version_option(__version__, prog_name="ionsynth")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.pass_context
def cli(ctx: click.Context, verbose: bool):
    """Compile and simulate two-mode trapped-ion state preparation"""
    settings = get_settings()
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, settings.log_level, logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    ctx.ensure_object(dict)
    ctx.obj["settings"] = settings


@cli.command()
@click.option("--target", "kind", required=True, help="cat, correlated or custom")
@click.option("--alpha", type=COMPLEX, default=2.0, show_default=True, help="Coherent amplitude")
@click.option("--mmax", type=int, default=6, show_default=True, help="Cutoff of the x mode")
@click.option("--nmax", type=int, default=6, show_default=True, help="Cutoff of the y mode")
@click.option("--file", "source", type=click.Path(path_type=Path), help="Coefficient file (custom)")
@_regime_options
@click.option("--out-dir", type=click.Path(path_type=Path), default=None, help="Output directory")
@click.option("--name", default=None, help="Output file stem (defaults to the target label)")
@click.pass_context
def synthesize(ctx, kind, alpha, mmax, nmax, source, regime, eps_x, eps_y, strict, out_dir, name):
    """Compile a target into de-evolution and preparation sequences"""
    settings = _settings(ctx)
    spec = TargetSpec(kind, alpha, mmax, nmax, source)
    rabi = _build_regime(regime, eps_x, eps_y, strict)
    target = build_target(spec)

    result = de_evolve(target, rabi, settings.skip_tol, settings.residual_tol)
    prepare = preparation_sequence(result)

    out_dir = out_dir or Path(settings.output_dir)
    stem = name or target.label
    config = {
        "target": kind,
        "alpha": [alpha.real, alpha.imag],
        "mmax": target.m_max,
        "nmax": target.n_max,
        "regime": rabi.to_dict(),
        "settings": settings.to_dict(),
    }
    block = provenance_block("synthesize", config, {"target": source} if source else None)

    deevolve_path = write_sequence(result.sequence, out_dir / f"{stem}_deevolve.json")
    prepare_path = write_sequence(prepare, out_dir / f"{stem}_prepare.json")
    report = {**result.report(), "op_count_gczs": op_count_gczs(target.m_max), "provenance": block}
    report_path = write_report(report, out_dir / f"{stem}_report.json")
    for path in (deevolve_path, prepare_path):
        write_provenance(path, block)

    seq = result.sequence
    console.print(f"[green]✓ Synthesized {target.label} (j_max={seq.j_max})[/green]")
    console.print(
        f"  pulses: {len(seq.pulses)} emitted, {seq.skipped} skipped, "
        f"{seq.slots}/{op_count_expected(seq.j_max)} slots"
    )
    console.print(f"  residual vacuum infidelity: {result.residual_vacuum_infidelity:.3e}")
    console.print(f"  mean quanta: {mean_quanta(embed_target(target)):.4f}")
    console.print(f"[dim]Wrote {prepare_path}, {deevolve_path}, {report_path}[/dim]")
    return ExitCode.OK


@cli.command()
@click.option("--sequence", "sequence_path", required=True, type=click.Path(path_type=Path))
@click.option("--target-file", "target_path", required=True, type=click.Path(path_type=Path))
@click.option("--deltas", default="0", show_default=True, help="Comma-separated noise ranges")
@click.option("--runs", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--model", type=click.Choice(NOISE_MODELS), default=None, help="Noise distribution")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Monte Carlo threads")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Output file")
@click.option("--progress/--no-progress", default=False, help="Show a progress bar")
@click.pass_context
def simulate(
    ctx, sequence_path, target_path, deltas, runs, seed, model, workers, fmt, out, progress
):
    """Monte Carlo fidelity of a preparation sequence under pulse-area noise"""
    settings = _settings(ctx)
    delta_list = _parse_deltas(deltas)
    seq = read_sequence(sequence_path)
    target = load_custom(target_path)
    model = model or settings.noise_model

    reports = sweep(
        seq, target, delta_list, runs, seed, workers=workers, model=model, show_progress=progress
    )

    out = out or _default_path(settings, f"sweep.{fmt}")
    config = {
        "deltas": delta_list,
        "runs": runs,
        "seed": seed,
        "model": model,
        "settings": {k: v for k, v in settings.to_dict().items() if k != "mc_workers"},
    }
    block = provenance_block(
        "simulate", config, {"sequence": sequence_path, "target": target_path}
    )
    if fmt == "csv":
        write_sweep_csv(reports, out)
    else:
        write_sweep_json(reports, out, block)
    write_provenance(out, block)

    table = Table(title=f"Fidelity of {target.label} ({runs} runs, seed {seed})")
    table.add_column("delta", justify="right")
    table.add_column("mean fidelity", justify="right")
    table.add_column("std error", justify="right")
    for r in reports:
        table.add_row(f"{r.delta:g}", f"{r.mean_fidelity:.6f}", f"{r.std_error:.2e}")
    console.print(table)
    console.print(f"[dim]Wrote {out}[/dim]")
    return ExitCode.OK


@cli.command()
@click.option("--g", "g_mag", type=float, required=True, help="Raman coupling |g|")
@click.option("--eps-x", type=float, required=True)
@click.option("--eps-y", type=float, required=True)
@click.option("--nu-x", type=float, required=True, help="Trap frequency of the x mode")
@click.option("--nu-y", type=float, required=True, help="Trap frequency of the y mode")
@click.option("--mmax", type=int, required=True)
@click.option("--nmax", type=int, required=True)
@click.option("--margin", type=float, default=None, help="Largest allowed coupling ratio")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="JSON report file")
@click.pass_context
def check(ctx, g_mag, eps_x, eps_y, nu_x, nu_y, mmax, nmax, margin, out):
    """Check the trap-frequency restrictions of the two-mode exchange channel"""
    settings = _settings(ctx)
    margin = settings.feasibility_margin if margin is None else margin
    fp = FeasibilityParams(g_mag, eps_x, eps_y, nu_x, nu_y, mmax, nmax, margin)
    report = check_feasibility(fp)

    table = Table(title="Feasibility")
    table.add_column("restriction")
    table.add_column("ratio", justify="right")
    table.add_column("bound", justify="right")
    table.add_column("status")
    rows = (
        (
            "|g| eps_x eps_y max(N,M) / min(nu)",
            report.coupling_ratio,
            f"<= {margin:g}",
            report.coupling_ok,
        ),
        ("max(nu) / min(nu)", report.anisotropy_ratio, ">= 5", report.anisotropy_ok),
    )
    for label, ratio, bound, ok in rows:
        status = "[green]pass[/green]" if ok else "[red]fail[/red]"
        table.add_row(label, f"{ratio:.4g}", bound, status)
    console.print(table)

    config = {
        "g": g_mag,
        "eps_x": eps_x,
        "eps_y": eps_y,
        "nu_x": nu_x,
        "nu_y": nu_y,
        "mmax": mmax,
        "nmax": nmax,
        "margin": margin,
    }
    block = provenance_block("check", config)
    if out:
        write_report({**report.to_dict(), "provenance": block}, out)
        write_provenance(out, block)
    else:
        logger.debug(f"Provenance: {block}")
    if not report.passed:
        console.print(
            f"[red]✗ Infeasible: r1={report.coupling_ratio:.4g}, "
            f"r2={report.anisotropy_ratio:.4g}[/red]"
        )
        return ExitCode.FEASIBILITY_FAILED
    console.print("[green]✓ Feasible[/green]")
    return ExitCode.OK


@cli.command()
@click.option("--kind", required=True, help="cat, correlated or custom")
@click.option("--alpha", type=COMPLEX, default=2.0, show_default=True)
@click.option("--mmax", type=int, default=12, show_default=True)
@click.option("--nmax", type=int, default=None, help="Cutoff of the y mode (defaults to --mmax)")
@click.option("--file", "source", type=click.Path(path_type=Path), help="Coefficient file (custom)")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Output file")
@click.pass_context
def targets(ctx, kind, alpha, mmax, nmax, source, out):
    """Write a benchmark target as a coefficient file"""
    settings = _settings(ctx)
    nmax = mmax if nmax is None else nmax
    spec = TargetSpec(kind, alpha, mmax, nmax, source)
    target = build_target(spec)

    out = out or _default_path(settings, f"{target.label}.json")
    save(target, out)
    config = {"kind": kind, "alpha": [alpha.real, alpha.imag], "mmax": mmax, "nmax": nmax}
    inputs = {"source": source} if source else None
    write_provenance(out, provenance_block("targets", config, inputs))

    n_bar = mean_quanta(embed_target(target))
    console.print(
        f"[green]✓ {target.label}: {target.nonzero_count()} nonzero coefficients, "
        f"tail mass {target.tail_mass:.3e}, mean quanta {n_bar:.4f}[/green]"
    )
    console.print(f"[dim]Wrote {out}[/dim]")
    return ExitCode.OK


@cli.command()
@click.option("--kind", type=click.Choice(["cat", "correlated"]), required=True)
@click.option("--alpha", type=COMPLEX, default=2.0, show_default=True)
@click.option("--epsilon", type=float, required=True, help="Largest excluded probability")
@click.option("--cap", type=click.IntRange(min=0), default=TRUNCATION_CAP, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="JSON report file")
def truncate(kind, alpha, epsilon, cap, out):
    """Smallest cutoffs whose excluded probability is at most epsilon"""
    if alpha == 0:
        raise InputError("Coherent amplitude alpha must be nonzero")
    rule = cat_amplitude_rule(alpha) if kind == "cat" else correlated_amplitude_rule(alpha)
    m_max, n_max = truncate_cutoffs(rule, epsilon, cap)
    if kind == "cat":
        target = cat_state(alpha, m_max, n_max)
    else:
        target = correlated_state(alpha, m_max)
    console.print(f"[green]✓ {kind}: M_max={m_max}, N_max={n_max}[/green]")
    console.print(f"  tail mass {target.tail_mass:.3e} (epsilon {epsilon:g})")

    config = {"kind": kind, "alpha": [alpha.real, alpha.imag], "epsilon": epsilon, "cap": cap}
    block = provenance_block("truncate", config)
    if out:
        payload = {
            "m_max": m_max,
            "n_max": n_max,
            "tail_mass": target.tail_mass,
            "provenance": block,
        }
        write_report(payload, out)
        write_provenance(out, block)
        console.print(f"[dim]Wrote {out}[/dim]")
    else:
        logger.debug(f"Provenance: {block}")
    return ExitCode.OK


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
