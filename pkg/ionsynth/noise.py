"""
Technical noise

Monte Carlo preparation with randomly perturbed pulse areas. Each emitted
pulse's complex area z = base_angle e^{i theta} is shifted by independent
uniform draws on its real and imaginary parts; the fidelity is the squared
overlap with the ideal target averaged over runs. Every run draws from its own
PCG64 stream spawned from the seed, so reports are reproducible bit for bit
regardless of how many worker threads execute them.
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence
from tqdm.auto import tqdm

from .channels import Pulse
from .config import NOISE_MODELS, get_settings
from .errors import DirectionMismatchError, TruncationError
from .fock import TargetState, fidelity_single, vacuum
from .synthesizer import Direction, PulseSequence, apply_sequence

logger = logging.getLogger(__name__)

RNG_NAME = "PCG64"
TRUNCATION_CAP = 200

AmplitudeRule = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class NoiseSpec:
    """Fluctuation range, number of runs and seed of one noise point"""

    delta: float
    runs: int = 100
    seed: int = 0
    model: Optional[str] = None

    def __post_init__(self) -> None:
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be a finite nonnegative number, got {self.delta}")
        if self.runs < 1:
            raise ValueError(f"runs must be at least 1, got {self.runs}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.model is not None and self.model not in NOISE_MODELS:
            raise ValueError(f"Unknown noise model '{self.model}', expected one of {NOISE_MODELS}")


@dataclass
class FidelityReport:
    """Mean fidelity and its standard error at one noise range"""

    delta: float
    mean_fidelity: float
    std_error: float
    runs: int
    seed: int
    rng: str = RNG_NAME
    model: str = "centered"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _interval(delta: float, model: str) -> Tuple[float, float]:
    if model == "centered":
        return -0.5 * delta, 0.5 * delta
    if model == "wide":
        return -delta, delta
    if model == "one_sided":
        return 0.0, delta
    raise ValueError(f"Unknown noise model '{model}', expected one of {NOISE_MODELS}")


def perturb(p: Pulse, delta: float, rng: Generator, model: str = "centered") -> Pulse:
    """Copy of ``p`` whose complex area is shifted by u1 + i u2, u1 and u2 uniform"""
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    if delta == 0:
        return p
    lo, hi = _interval(delta, model)
    u1, u2 = rng.uniform(lo, hi, size=2)
    z = p.area + complex(u1, u2)
    return replace(p, theta=math.atan2(z.imag, z.real), base_angle=abs(z))


def _make_run(
    seq: PulseSequence, t: TargetState, delta: float, model: str
) -> Callable[[SeedSequence], float]:
    start = vacuum(seq.j_max)

    def one_run(child: SeedSequence) -> float:
        rng = Generator(PCG64(child))
        noisy = replace(seq, pulses=[perturb(p, delta, rng, model) for p in seq.pulses])
        return fidelity_single(apply_sequence(start, noisy), t)

    return one_run


def _fidelities(
    seq: PulseSequence,
    t: TargetState,
    delta: float,
    runs: int,
    root: SeedSequence,
    model: str,
    workers: int,
    show_progress: bool,
) -> np.ndarray:
    if seq.direction != Direction.PREPARE:
        raise DirectionMismatchError(
            f"Noise runs need a prepare sequence, got a {seq.direction.value} sequence"
        )
    one_run = _make_run(seq, t, delta, model)
    children = root.spawn(runs)

    if delta == 0:
        # every run is the ideal one
        return np.full(runs, one_run(children[0]))

    desc = f"delta={delta:g}"
    if workers <= 1:
        values = [one_run(c) for c in tqdm(children, desc=desc, disable=not show_progress)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            values = list(
                tqdm(
                    executor.map(one_run, children),
                    total=runs,
                    desc=desc,
                    disable=not show_progress,
                )
            )
    return np.asarray(values, dtype=np.float64)


def _summarize(values: np.ndarray, delta: float, seed: int, model: str) -> FidelityReport:
    runs = len(values)
    mean = float(min(1.0, max(0.0, np.mean(values))))
    std_error = float(np.std(values, ddof=1) / math.sqrt(runs)) if runs > 1 else 0.0
    return FidelityReport(delta, mean, std_error, runs, seed, RNG_NAME, model)


def run_noisy(
    seq: PulseSequence,
    t: TargetState,
    ns: NoiseSpec,
    workers: Optional[int] = None,
    show_progress: bool = False,
) -> FidelityReport:
    """Mean fidelity of ``ns.runs`` noisy preparations from the vacuum"""
    settings = get_settings()
    model = ns.model or settings.noise_model
    workers = settings.mc_workers if workers is None else workers
    values = _fidelities(
        seq, t, ns.delta, ns.runs, SeedSequence(ns.seed), model, workers, show_progress
    )
    report = _summarize(values, ns.delta, ns.seed, model)
    logger.info(
        f"delta={ns.delta:g}: f={report.mean_fidelity:.6f} +/- {report.std_error:.2e} "
        f"({ns.runs} runs)"
    )
    return report


def sweep(
    seq: PulseSequence,
    t: TargetState,
    deltas: Sequence[float],
    runs: int = 100,
    seed: int = 0,
    workers: Optional[int] = None,
    model: Optional[str] = None,
    show_progress: bool = False,
) -> List[FidelityReport]:
    """One report per noise range; range i draws from the stream (seed, i)"""
    if len(deltas) == 0:
        raise ValueError("sweep needs at least one delta")
    settings = get_settings()
    model = model or settings.noise_model
    workers = settings.mc_workers if workers is None else workers

    reports = []
    for i, delta in enumerate(deltas):
        ns = NoiseSpec(float(delta), runs, seed, model)
        values = _fidelities(
            seq, t, ns.delta, runs, SeedSequence([seed, i]), model, workers, show_progress
        )
        report = _summarize(values, ns.delta, seed, model)
        logger.info(
            f"Sweep point {i + 1}/{len(deltas)} delta={ns.delta:g}: "
            f"f={report.mean_fidelity:.6f} +/- {report.std_error:.2e}"
        )
        reports.append(report)
    return reports


def truncate_cutoffs(
    rule: AmplitudeRule, epsilon: float, cap: int = TRUNCATION_CAP
) -> Tuple[int, int]:
    """Smallest cutoffs (M, N) whose excluded probability is at most ``epsilon``

    ``rule(m, n)`` gives the untruncated normalized amplitudes on index grids.
    Minimizes M + N, then |M - N|, then M.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if epsilon >= 1:
        return 0, 0

    m = np.arange(cap + 1)[:, None]
    n = np.arange(cap + 1)[None, :]
    probs = np.abs(rule(m, n) * np.ones((cap + 1, cap + 1))) ** 2
    tail = 1.0 - np.cumsum(np.cumsum(probs, axis=0), axis=1)

    ms, ns = np.nonzero(tail <= epsilon)
    if len(ms) == 0:
        raise TruncationError(f"No cutoffs up to {cap} leave a tail of at most {epsilon:g}")
    best = np.lexsort((ms, np.abs(ms - ns), ms + ns))[0]
    cutoffs = int(ms[best]), int(ns[best])
    logger.debug(f"Cutoffs {cutoffs} leave tail {tail[cutoffs]:.3e} (epsilon {epsilon:g})")
    return cutoffs


def consistent_below(
    lower: FidelityReport, upper: FidelityReport, sigmas: float = 2.0, rel_tol: float = 0.0
) -> bool:
    """lower.mean <= upper.mean up to ``sigmas`` combined standard errors

    ``rel_tol`` widens the slack by that fraction of the larger infidelity 1 - f.
    """
    slack = sigmas * math.hypot(lower.std_error, upper.std_error)
    slack += rel_tol * (1.0 - min(lower.mean_fidelity, upper.mean_fidelity))
    return lower.mean_fidelity <= upper.mean_fidelity + slack


def is_nonincreasing(reports: Sequence[FidelityReport], sigmas: float = 2.0) -> bool:
    """Mean fidelity does not grow along a sweep ordered by delta"""
    return all(
        consistent_below(later, earlier, sigmas)
        for earlier, later in zip(reports, reports[1:])
    )
