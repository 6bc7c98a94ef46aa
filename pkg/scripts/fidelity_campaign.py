#!/usr/bin/env python3
"""
Technical-noise campaign

Compiles the cat-like and correlated benchmark targets at several cutoffs,
sweeps the pulse-area noise range, writes one CSV per (target, cutoff) and
checks the expected trends: fidelity falls with the noise range and with the
cutoff, and the sparser correlated state is never clearly worse than the cat
state (within 10 % of the infidelity).
"""

import sys
from pathlib import Path

# Add parent directory to path
sys.path.append(str(Path(__file__).parent.parent))

import logging  # noqa: E402
from typing import Dict, List, Tuple  # noqa: E402

import click  # noqa: E402
from rich.console import Console  # noqa: E402
from rich.progress import Progress, SpinnerColumn, TextColumn  # noqa: E402
from rich.table import Table  # noqa: E402
from ionsynth.config import NOISE_MODELS, get_settings  # noqa: E402
from ionsynth.fileio import provenance_block, write_provenance, write_sweep_csv  # noqa: E402
from ionsynth.noise import FidelityReport, consistent_below, is_nonincreasing, sweep  # noqa: E402
from ionsynth.synthesizer import de_evolve, preparation_sequence  # noqa: E402
from ionsynth.targets import cat_state, correlated_state  # noqa: E402

console = Console()
logger = logging.getLogger(__name__)

DEFAULT_DELTAS = (0.0, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1)
KINDS = ("cat", "correlated")
# cat may exceed correlated by this fraction of the infidelity
TARGET_ORDER_TOL = 0.1

Curves = Dict[Tuple[str, int], List[FidelityReport]]


class FidelityCampaign:
    """Runs the noise sweeps of every (target, cutoff) pair"""

    def __init__(
        self,
        out_dir: Path,
        alpha: complex = 2.0,
        runs: int = 100,
        seed: int = 0,
        model: str = "centered",
        workers: int = 1,
    ):
        self.out_dir = Path(out_dir)
        self.alpha = alpha
        self.runs = runs
        self.seed = seed
        self.model = model
        self.workers = workers

    def run_one(self, kind: str, m_max: int, deltas: List[float]) -> List[FidelityReport]:
        """Compile one target and sweep it"""
        if kind == "cat":
            target = cat_state(self.alpha, m_max, m_max)
        else:
            target = correlated_state(self.alpha, m_max)

        result = de_evolve(target)
        seq = preparation_sequence(result)
        console.print(
            f"[cyan]{kind} M_max={m_max}: {len(seq)} pulses "
            f"({seq.skipped} skipped)[/cyan]"
        )
        reports = sweep(
            seq, target, deltas, self.runs, self.seed, workers=self.workers, model=self.model
        )

        path = self.out_dir / f"{kind}_m{m_max}.csv"
        write_sweep_csv(reports, path)
        config = {
            "kind": kind,
            "alpha": [complex(self.alpha).real, complex(self.alpha).imag],
            "m_max": m_max,
            "deltas": deltas,
            "runs": self.runs,
            "seed": self.seed,
            "model": self.model,
        }
        write_provenance(path, provenance_block("fidelity_campaign", config))
        return reports

    def run_all(self, m_values: List[int], deltas: List[float]) -> Curves:
        curves: Curves = {}
        with Progress(
            SpinnerColumn(), TextColumn("[progress.description]{task.description}"), console=console
        ) as progress:
            for kind in KINDS:
                for m_max in m_values:
                    task = progress.add_task(f"Sweeping {kind} M_max={m_max}...", total=None)
                    curves[(kind, m_max)] = self.run_one(kind, m_max, deltas)
                    progress.update(task, completed=True)
        return curves


def trend_checks(curves: Curves, m_values: List[int]) -> List[Tuple[str, bool]]:
    """Named pass/fail results of the three expected trends, at two standard errors"""
    checks = []
    for (kind, m_max), reports in sorted(curves.items()):
        checks.append((f"{kind} M_max={m_max} nonincreasing in delta", is_nonincreasing(reports)))

    ordered = sorted(m_values)
    for kind in KINDS:
        for small, large in zip(ordered, ordered[1:]):
            ok = all(
                consistent_below(big, little)
                for little, big in zip(curves[(kind, small)], curves[(kind, large)])
                if big.delta > 0
            )
            checks.append((f"{kind}: M_max={large} below M_max={small}", ok))

    for m_max in ordered:
        ok = all(
            consistent_below(cat, corr, rel_tol=TARGET_ORDER_TOL)
            for cat, corr in zip(curves[("cat", m_max)], curves[("correlated", m_max)])
            if cat.delta > 0
        )
        checks.append((f"M_max={m_max}: cat not clearly above correlated", ok))
    return checks


@click.command()
@click.option("--mmax", "m_values", multiple=True, type=int, help="Cutoffs (default 6 and 10)")
@click.option("--deltas", default=None, help="Comma-separated noise ranges")
@click.option("--alpha", type=float, default=2.0, show_default=True)
@click.option("--runs", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--model", type=click.Choice(NOISE_MODELS), default=None)
@click.option("--workers", type=click.IntRange(min=1), default=None)
@click.option("--out-dir", default=None, help="Directory for the CSV tables")
def main(m_values, deltas, alpha, runs, seed, model, workers, out_dir):
    """Reproduce the fidelity-versus-noise study of the benchmark targets"""

    # Configure logging
    logging.basicConfig(
        level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )

    settings = get_settings()
    m_list = sorted(set(m_values)) or [6, 10]
    delta_list = [float(d) for d in deltas.split(",")] if deltas else list(DEFAULT_DELTAS)
    campaign = FidelityCampaign(
        Path(out_dir or settings.output_dir) / "campaign",
        alpha=alpha,
        runs=runs,
        seed=seed,
        model=model or settings.noise_model,
        workers=workers or settings.mc_workers,
    )

    console.print("\n[bold]Configuration:[/bold]")
    console.print(f"Cutoffs: {', '.join(map(str, m_list))}")
    console.print(f"Noise ranges: {', '.join(f'{d:g}' for d in delta_list)}")
    console.print(f"Runs per point: {runs}, seed {seed}, model {campaign.model}")

    curves = campaign.run_all(m_list, delta_list)

    table = Table(title="Mean fidelity")
    table.add_column("target")
    for d in delta_list:
        table.add_column(f"{d:g}", justify="right")
    for (kind, m_max), reports in sorted(curves.items()):
        table.add_row(f"{kind} {m_max}", *(f"{r.mean_fidelity:.4f}" for r in reports))
    console.print(table)

    failed = 0
    console.print("\n[bold]Trend checks:[/bold]")
    for name, ok in trend_checks(curves, m_list):
        mark = "[green]✓[/green]" if ok else "[red]✗[/red]"
        console.print(f"  {mark} {name}")
        failed += not ok

    if failed:
        console.print(f"\n[bold red]{failed} trend check(s) failed[/bold red]")
        sys.exit(1)
    console.print("\n[bold green]All trend checks passed[/bold green]")


if __name__ == "__main__":
    main()
