"""
Composite Fock space of two vibrational modes and three internal levels

Basis vectors |m,n> (x) |i> with m + n <= J_max are stored densely, ordered by
total quanta J ascending, then m ascending, then internal level a < b < c.
"""

import logging
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionMismatchError

logger = logging.getLogger(__name__)

NORM_TOL = 1e-12


class InternalLevel(IntEnum):
    """Electronic level of the ion; the integer value is its slot within a lattice point"""

    A = 0
    B = 1
    C = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "InternalLevel":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"Unknown internal level '{label}', expected one of a, b, c")


@dataclass(frozen=True, order=True)
class BasisIndex:
    """Label of one basis vector |m,n> (x) |level>"""

    m: int
    n: int
    level: InternalLevel

    def __post_init__(self) -> None:
        if self.m < 0 or self.n < 0:
            raise ValueError(f"Quanta must be nonnegative, got m={self.m}, n={self.n}")
        object.__setattr__(self, "level", InternalLevel(self.level))

    @property
    def j(self) -> int:
        return self.m + self.n

    def __str__(self) -> str:
        return f"|{self.m},{self.n},{self.level.label}>"


def dim(j_max: int) -> int:
    """Number of basis vectors for the triangle m + n <= j_max times three levels"""
    if j_max < 0:
        raise ValueError(f"j_max must be nonnegative, got {j_max}")
    return 3 * (j_max + 1) * (j_max + 2) // 2


def index_of(b: BasisIndex, j_max: int) -> int:
    """Offset of a basis vector inside a state of the given j_max"""
    if b.j > j_max:
        raise IndexError(f"{b} lies outside the space with j_max={j_max}")
    j = b.j
    return 3 * (j * (j + 1) // 2 + b.m) + int(b.level)


def inverse_index(offset: int, j_max: int) -> BasisIndex:
    """Basis vector stored at an offset"""
    if not 0 <= offset < dim(j_max):
        raise IndexError(f"Offset {offset} out of range for j_max={j_max}")
    point, level = divmod(offset, 3)
    j = int((np.sqrt(8 * point + 1) - 1) // 2)
    # guard against rounding at perfect squares
    while j * (j + 1) // 2 > point:
        j -= 1
    while (j + 1) * (j + 2) // 2 <= point:
        j += 1
    m = point - j * (j + 1) // 2
    return BasisIndex(m, j - m, InternalLevel(level))


@lru_cache(maxsize=64)
def basis_arrays(j_max: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arrays (m, n, level) for every offset, in storage order"""
    ms, ns = [], []
    for j in range(j_max + 1):
        for m in range(j + 1):
            ms.append(m)
            ns.append(j - m)
    m_arr = np.repeat(np.array(ms, dtype=np.int64), 3)
    n_arr = np.repeat(np.array(ns, dtype=np.int64), 3)
    level_arr = np.tile(np.arange(3, dtype=np.int64), len(ms))
    for arr in (m_arr, n_arr, level_arr):
        arr.setflags(write=False)
    return m_arr, n_arr, level_arr


@dataclass
class CompositeState:
    """Pure state of the vibrational modes and the internal level"""

    j_max: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (dim(self.j_max),):
            raise DimensionMismatchError(
                f"Expected {dim(self.j_max)} amplitudes for j_max={self.j_max}, "
                f"got shape {self.amplitudes.shape}"
            )

    @classmethod
    def zeros(cls, j_max: int) -> "CompositeState":
        return cls(j_max, np.zeros(dim(j_max), dtype=np.complex128))

    def copy(self) -> "CompositeState":
        return CompositeState(self.j_max, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, b: BasisIndex) -> complex:
        return complex(self.amplitudes[index_of(b, self.j_max)])

    def set_amplitude(self, b: BasisIndex, value: complex) -> None:
        self.amplitudes[index_of(b, self.j_max)] = value

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass
class TargetState:
    """Two-mode target coefficients Q_mn on the rectangle m <= m_max, n <= n_max

    ``tail_mass`` is the probability the untruncated state had outside the
    rectangle (zero for finite targets); ``norm_factor`` is the norm the
    coefficients had before renormalization (1.0 when none was needed).
    """

    coefficients: np.ndarray
    tail_mass: float = 0.0
    norm_factor: float = 1.0
    label: str = field(default="custom")

    def __post_init__(self) -> None:
        self.coefficients = np.atleast_2d(np.asarray(self.coefficients, dtype=np.complex128))
        if self.coefficients.ndim != 2:
            raise ValueError("Target coefficients must be a 2-D table")
        total = float(np.sum(np.abs(self.coefficients) ** 2))
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"Target is not normalized (sum |Q|^2 = {total!r})")

    @classmethod
    def from_unnormalized(
        cls, coefficients: np.ndarray, tail_mass: float = 0.0, label: str = "custom"
    ) -> "TargetState":
        """Rescale a coefficient table to unit norm, recording the original norm"""
        table = np.atleast_2d(np.asarray(coefficients, dtype=np.complex128))
        norm = float(np.linalg.norm(table))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("Target coefficients have zero norm and cannot be normalized")
        factor = norm if abs(norm - 1.0) > NORM_TOL else 1.0
        return cls(table / norm, tail_mass=tail_mass, norm_factor=factor, label=label)

    @property
    def m_max(self) -> int:
        return self.coefficients.shape[0] - 1

    @property
    def n_max(self) -> int:
        return self.coefficients.shape[1] - 1

    @property
    def j_max(self) -> int:
        return self.m_max + self.n_max

    def nonzero_count(self, tol: float = 0.0) -> int:
        return int(np.count_nonzero(np.abs(self.coefficients) > tol))


def vacuum(j_max: int) -> CompositeState:
    """|0,0> (x) |a>"""
    state = CompositeState.zeros(j_max)
    state.amplitudes[0] = 1.0
    return state


def embed_target(
    t: TargetState, level: InternalLevel = InternalLevel.A, j_max: Optional[int] = None
) -> CompositeState:
    """Place a target on one internal level of the composite space

    The space is the triangle with j_max = M_max + N_max unless a larger j_max is
    given.
    """
    j_max = t.j_max if j_max is None else j_max
    if j_max < t.j_max:
        raise DimensionMismatchError(
            f"j_max={j_max} cannot hold a target with M_max + N_max = {t.j_max}"
        )
    state = CompositeState.zeros(j_max)
    rows, cols = np.nonzero(t.coefficients)
    for m, n in zip(rows.tolist(), cols.tolist()):
        state.amplitudes[index_of(BasisIndex(m, n, level), j_max)] = t.coefficients[m, n]
    return state


def overlap(s1: CompositeState, s2: CompositeState) -> complex:
    """Inner product <s1|s2>"""
    if s1.j_max != s2.j_max:
        raise DimensionMismatchError(f"Cannot overlap j_max={s1.j_max} with j_max={s2.j_max}")
    return complex(np.vdot(s1.amplitudes, s2.amplitudes))


def fidelity_single(
    s: CompositeState, t: TargetState, level: InternalLevel = InternalLevel.A
) -> float:
    """|<s|target (x) level>|^2 for one realization"""
    reference = embed_target(t, level, j_max=s.j_max)
    value = abs(overlap(s, reference)) ** 2
    return float(min(1.0, max(0.0, value)))


def mean_quanta(s: CompositeState) -> float:
    """Mean total number of vibrational quanta n_x + n_y"""
    m_arr, n_arr, _ = basis_arrays(s.j_max)
    return float(np.dot(s.probabilities(), m_arr + n_arr))


def mode_populations(s: CompositeState) -> Tuple[float, float]:
    """Mean quanta in the x and y modes separately"""
    m_arr, n_arr, _ = basis_arrays(s.j_max)
    probs = s.probabilities()
    return float(np.dot(probs, m_arr)), float(np.dot(probs, n_arr))


def subspace_probabilities(s: CompositeState) -> np.ndarray:
    """Probability held by each subspace H_J (x) H_in, J = 0..j_max"""
    m_arr, n_arr, _ = basis_arrays(s.j_max)
    return np.bincount(m_arr + n_arr, weights=s.probabilities(), minlength=s.j_max + 1)


def reduced_vibrational_state(s: CompositeState, level: InternalLevel) -> np.ndarray:
    """Amplitudes Q_{m,n;level} as a (j_max+1) x (j_max+1) table, zero outside the triangle"""
    m_arr, n_arr, level_arr = basis_arrays(s.j_max)
    mask = level_arr == int(level)
    table = np.zeros((s.j_max + 1, s.j_max + 1), dtype=np.complex128)
    table[m_arr[mask], n_arr[mask]] = s.amplitudes[mask]
    return table
