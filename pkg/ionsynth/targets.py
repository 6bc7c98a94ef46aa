"""
Benchmark and custom target states

Analytic two-mode families (cat-like and correlated coherent superpositions),
single Fock states, random targets, and coefficient files. Analytic
constructors truncate to the requested rectangle, renormalize, and record the
probability the untruncated state had outside it.
"""

import cmath
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from scipy.special import gammaln

from .errors import InputError, UnnormalizableTarget
from .fileio import read_target, write_target
from .fock import TargetState

logger = logging.getLogger(__name__)

TARGET_KINDS = ("cat", "correlated", "custom")

AmplitudeRule = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class TargetSpec:
    """What to build: an analytic family with its amplitude, or a coefficient file"""

    kind: str
    alpha: complex = 2.0
    m_max: int = 0
    n_max: int = 0
    source: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.kind not in TARGET_KINDS:
            raise InputError(f"Unknown target kind '{self.kind}', expected one of {TARGET_KINDS}")
        if self.m_max < 0 or self.n_max < 0:
            raise InputError("Cutoffs must be nonnegative")
        if self.kind != "custom" and abs(self.alpha) == 0:
            raise InputError("Coherent amplitude alpha must be nonzero")
        if self.kind == "custom" and self.source is None:
            raise InputError("A custom target needs a coefficient file")


def _log_coherent(alpha: complex, k: np.ndarray) -> np.ndarray:
    """log |alpha^k / sqrt(k!)|, overflow-free for large k"""
    return k * np.log(abs(alpha)) - 0.5 * gammaln(k + 1)


def cat_amplitude_rule(alpha: complex) -> AmplitudeRule:
    """Untruncated normalized amplitudes of N (|alpha>|alpha> + |-alpha>|-alpha>)"""
    r2 = abs(alpha) ** 2
    norm = np.sqrt(2.0 + 2.0 * np.exp(-4.0 * r2))
    phase = cmath.phase(alpha)

    def rule(m: np.ndarray, n: np.ndarray) -> np.ndarray:
        m, n = np.asarray(m), np.asarray(n)
        total = m + n
        log_mag = _log_coherent(alpha, m) + _log_coherent(alpha, n) - r2
        parity = 1.0 + (-1.0) ** total
        return parity * np.exp(log_mag) * np.exp(1j * phase * total) / norm

    return rule


def correlated_amplitude_rule(alpha: complex) -> AmplitudeRule:
    """Untruncated amplitudes of exp(-|alpha|^2/2) sum_m alpha^m / sqrt(m!) |m,m>"""
    r2 = abs(alpha) ** 2
    phase = cmath.phase(alpha)

    def rule(m: np.ndarray, n: np.ndarray) -> np.ndarray:
        m, n = np.asarray(m), np.asarray(n)
        diag = np.exp(_log_coherent(alpha, m) - 0.5 * r2) * np.exp(1j * phase * m)
        return np.where(m == n, diag, 0.0)

    return rule


def _truncate(rule: AmplitudeRule, m_max: int, n_max: int, label: str) -> TargetState:
    m = np.arange(m_max + 1)[:, None]
    n = np.arange(n_max + 1)[None, :]
    table = rule(m, n) * np.ones((m_max + 1, n_max + 1))
    kept = float(np.sum(np.abs(table) ** 2))
    if kept == 0.0:
        raise UnnormalizableTarget(
            f"{label} target has no nonzero coefficient within ({m_max}, {n_max})"
        )
    tail = max(0.0, 1.0 - kept)
    logger.debug(f"{label} target truncated at ({m_max}, {n_max}): tail mass {tail:.3e}")
    return TargetState.from_unnormalized(table, tail_mass=tail, label=label)


def cat_state(alpha: complex, m_max: int, n_max: int) -> TargetState:
    """Two-mode cat-like state truncated to m <= m_max, n <= n_max and renormalized"""
    if abs(alpha) == 0:
        raise ValueError("Cat state needs a nonzero alpha")
    return _truncate(cat_amplitude_rule(alpha), m_max, n_max, "cat")


def correlated_state(alpha: complex, m_max: int) -> TargetState:
    """Two-mode correlated state on the diagonal m = n <= m_max, renormalized"""
    if abs(alpha) == 0:
        raise ValueError("Correlated state needs a nonzero alpha")
    return _truncate(correlated_amplitude_rule(alpha), m_max, m_max, "correlated")


def fock_state(m: int, n: int) -> TargetState:
    """Single Fock component |m,n>"""
    table = np.zeros((m + 1, n + 1), dtype=np.complex128)
    table[m, n] = 1.0
    return TargetState(table, label=f"fock_{m}_{n}")


def random_target(m_max: int, n_max: int, rng: np.random.Generator) -> TargetState:
    """Normalized target with independent complex Gaussian coefficients"""
    shape = (m_max + 1, n_max + 1)
    table = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return TargetState.from_unnormalized(table, label="random")


def load_custom(path: Union[str, Path]) -> TargetState:
    """Read a coefficient file, renormalizing if needed"""
    return read_target(Path(path))


def save(t: TargetState, path: Union[str, Path]) -> Path:
    """Write a target as a coefficient file"""
    return write_target(t, Path(path))


def build_target(spec: TargetSpec) -> TargetState:
    """Construct the target a spec describes"""
    if spec.kind == "cat":
        return cat_state(spec.alpha, spec.m_max, spec.n_max)
    if spec.kind == "correlated":
        return correlated_state(spec.alpha, spec.m_max)
    assert spec.source is not None
    return load_custom(spec.source)
