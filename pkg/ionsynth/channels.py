"""
Interaction channels

Each of the five stimulated-Raman channels couples basis vectors in disjoint
pairs, so its propagator is a set of independent 2x2 rotations. This module
holds the coupling topology, the Rabi factors of every pair (Lamb-Dicke and
beyond), pulse application and inversion, and the trap-parameter feasibility
check for the two-mode channel.
"""

import math
import logging
from dataclasses import dataclass, asdict
from enum import IntEnum
from functools import lru_cache
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from scipy.linalg import expm

from .errors import UnsupportedRegimeError
from .fock import BasisIndex, CompositeState, InternalLevel, basis_arrays, dim, index_of

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
ZERO_COUPLING = 1e-12
MIN_ANISOTROPY = 5.0


class ChannelId(IntEnum):
    """The five elementary interactions

    1, 2: carriers a<->b and b<->c
    3, 4: two-mode exchange a_x^+ a_y with a->b and b->c
    5: single-mode red sideband a_x with a->b
    """

    CARRIER_AB = 1
    CARRIER_BC = 2
    EXCHANGE_AB = 3
    EXCHANGE_BC = 4
    SIDEBAND_X = 5

    @property
    def levels(self) -> Tuple[InternalLevel, InternalLevel]:
        """(source level, partner level); the source is always the lower one"""
        return _LEVELS[self]

    @property
    def shift(self) -> Tuple[int, int]:
        """Change (dm, dn) of the vibrational quanta from source to partner"""
        return _SHIFTS[self]


_LEVELS = {
    ChannelId.CARRIER_AB: (InternalLevel.A, InternalLevel.B),
    ChannelId.CARRIER_BC: (InternalLevel.B, InternalLevel.C),
    ChannelId.EXCHANGE_AB: (InternalLevel.A, InternalLevel.B),
    ChannelId.EXCHANGE_BC: (InternalLevel.B, InternalLevel.C),
    ChannelId.SIDEBAND_X: (InternalLevel.A, InternalLevel.B),
}

_SHIFTS = {
    ChannelId.CARRIER_AB: (0, 0),
    ChannelId.CARRIER_BC: (0, 0),
    ChannelId.EXCHANGE_AB: (1, -1),
    ChannelId.EXCHANGE_BC: (1, -1),
    ChannelId.SIDEBAND_X: (-1, 0),
}

NONLINEAR_CHANNELS = (ChannelId.EXCHANGE_AB, ChannelId.EXCHANGE_BC)


@dataclass(frozen=True)
class LambDicke:
    """Couplings reduced to their square-root forms (eps_x, eps_y << 1)"""

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "lamb_dicke"}


@dataclass(frozen=True)
class Nonlinear:
    """Beyond-Lamb-Dicke couplings for the two-mode exchange channels

    Channels 1, 2 and 5 keep their Lamb-Dicke factors unless ``strict`` is set,
    in which case asking for them raises UnsupportedRegimeError.
    """

    eps_x: float
    eps_y: float
    strict: bool = False

    def __post_init__(self) -> None:
        for name in ("eps_x", "eps_y"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "nonlinear", **asdict(self)}


RabiRegime = Union[LambDicke, Nonlinear]


def regime_from_dict(data: Dict[str, Any]) -> RabiRegime:
    kind = data.get("kind", "lamb_dicke")
    if kind == "lamb_dicke":
        return LambDicke()
    if kind == "nonlinear":
        return Nonlinear(
            eps_x=float(data["eps_x"]),
            eps_y=float(data["eps_y"]),
            strict=bool(data.get("strict", False)),
        )
    raise ValueError(f"Unknown Rabi regime '{kind}'")


@dataclass(frozen=True)
class Pulse:
    """One elementary unitary: channel, cancelled component, and g t = base_angle e^{i theta}"""

    channel: ChannelId
    cancel: BasisIndex
    theta: float
    base_angle: float
    regime: RabiRegime = LambDicke()

    def __post_init__(self) -> None:
        object.__setattr__(self, "channel", ChannelId(self.channel))
        if not (math.isfinite(self.base_angle) and math.isfinite(self.theta)):
            raise ValueError(f"Pulse angles must be finite, got {self.theta}, {self.base_angle}")
        if self.base_angle < 0:
            raise ValueError(f"base_angle must be nonnegative, got {self.base_angle}")
        theta = math.fmod(self.theta, TWO_PI) % TWO_PI
        object.__setattr__(self, "theta", 0.0 if theta >= TWO_PI else theta)

    @property
    def area(self) -> complex:
        """The complex pulse area |g| t e^{i theta}"""
        return self.base_angle * complex(math.cos(self.theta), math.sin(self.theta))


def coupled_partner(
    channel: ChannelId, b: BasisIndex, j_max: Optional[int] = None
) -> Optional[BasisIndex]:
    """Basis vector coupled to ``b`` by ``channel``, or None

    With ``j_max`` given, partners outside the triangle m + n <= j_max are None.
    """
    channel = ChannelId(channel)
    source, target = channel.levels
    dm, dn = channel.shift
    if b.level == source:
        m, n, level = b.m + dm, b.n + dn, target
    elif b.level == target:
        m, n, level = b.m - dm, b.n - dn, source
    else:
        return None
    if m < 0 or n < 0:
        return None
    if j_max is not None and m + n > j_max:
        return None
    return BasisIndex(m, n, level)


def laguerre_assoc1(m: int, x: float) -> float:
    """Associated Laguerre polynomial L_m^1(x)"""
    if m < 0:
        raise ValueError(f"Laguerre degree must be nonnegative, got {m}")
    if m == 0:
        return 1.0
    l_2, l_1 = 1.0, 2.0 - x
    for k in range(2, m + 1):
        l_2, l_1 = l_1, ((2 * k - x) * l_1 - k * l_2) / k
    return l_1


def laguerre_assoc1_range(m_end: int, x: float) -> np.ndarray:
    """[L_0^1(x), ..., L_{m_end-1}^1(x)] in linear time"""
    out = np.empty(max(m_end, 0), dtype=np.float64)
    if m_end > 0:
        out[0] = 1.0
    if m_end > 1:
        out[1] = 2.0 - x
    for k in range(2, m_end):
        out[k] = ((2 * k - x) * out[k - 1] - k * out[k - 2]) / k
    return out


def _source_side(channel: ChannelId, b: BasisIndex) -> BasisIndex:
    if b.level == channel.levels[0]:
        return b
    partner = coupled_partner(channel, b)
    if partner is None:
        raise ValueError(f"{b} is not coupled by channel {int(channel)}")
    return partner


def relative_rabi(channel: ChannelId, pair_source: BasisIndex, regime: RabiRegime) -> float:
    """Factor multiplying |g| t to give the rotation angle of one coupled pair

    Either member of the pair may be passed. Lamb-Dicke factors are
    nonnegative; beyond Lamb-Dicke the exchange factor carries the sign of the
    Laguerre polynomials.
    """
    channel = ChannelId(channel)
    if coupled_partner(channel, pair_source) is None:
        raise ValueError(f"{pair_source} has no partner under channel {int(channel)}")
    src = _source_side(channel, pair_source)
    m, n = src.m, src.n

    if isinstance(regime, Nonlinear):
        if channel in NONLINEAR_CHANNELS:
            x, y = regime.eps_x**2, regime.eps_y**2
            return (
                math.exp(-0.5 * (x + y))
                * laguerre_assoc1(m, x)
                * laguerre_assoc1(n - 1, y)
                / math.sqrt((m + 1) * n)
            )
        if regime.strict:
            raise UnsupportedRegimeError(
                f"No nonlinear matrix element is known for channel {int(channel)}"
            )

    if channel in (ChannelId.CARRIER_AB, ChannelId.CARRIER_BC):
        return 1.0
    if channel in NONLINEAR_CHANNELS:
        return math.sqrt((m + 1) * n)
    return math.sqrt(m)


@lru_cache(maxsize=256)
def pair_table(
    channel: ChannelId, j_max: int, regime: RabiRegime
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Offsets (source, partner) and Rabi factors of every coupled pair in the space"""
    channel = ChannelId(channel)
    source, target = channel.levels
    dm, dn = channel.shift
    m_arr, n_arr, level_arr = basis_arrays(j_max)

    src = np.flatnonzero(level_arr == int(source))
    m_src, n_src = m_arr[src], n_arr[src]
    m_dst, n_dst = m_src + dm, n_src + dn
    valid = (m_dst >= 0) & (n_dst >= 0) & (m_dst + n_dst <= j_max)
    src, m_src, n_src = src[valid], m_src[valid], n_src[valid]
    m_dst, n_dst = m_dst[valid], n_dst[valid]
    j_dst = m_dst + n_dst
    dst = 3 * (j_dst * (j_dst + 1) // 2 + m_dst) + int(target)

    if isinstance(regime, Nonlinear) and channel in NONLINEAR_CHANNELS:
        x, y = regime.eps_x**2, regime.eps_y**2
        lag_x = laguerre_assoc1_range(j_max + 1, x)
        lag_y = laguerre_assoc1_range(j_max + 1, y)
        rel = (
            math.exp(-0.5 * (x + y))
            * lag_x[m_src]
            * lag_y[n_src - 1]
            / np.sqrt((m_src + 1) * n_src)
        )
        zeros = int(np.count_nonzero(np.abs(rel) <= ZERO_COUPLING))
        if zeros:
            logger.warning(
                f"Channel {int(channel)} has {zeros} vanishing couplings at "
                f"eps=({regime.eps_x}, {regime.eps_y}), j_max={j_max}"
            )
    else:
        rel = np.array(
            [
                relative_rabi(channel, BasisIndex(int(m), int(n), source), regime)
                for m, n in zip(m_src, n_src)
            ],
            dtype=np.float64,
        )

    for arr in (src, dst, rel):
        arr.setflags(write=False)
    logger.debug(f"Built pair table for channel {int(channel)}, j_max={j_max}: {len(src)} pairs")
    return src, dst, rel


def apply_pulse(s: CompositeState, p: Pulse, inplace: bool = False) -> CompositeState:
    """Apply one pulse to every coupled pair at once

    For a pair (u = source, v = partner) with x = base_angle * relative_rabi(u):
        Q'_u = cos(x) Q_u - i e^{-i theta} sin(x) Q_v
        Q'_v = -i e^{i theta} sin(x) Q_u + cos(x) Q_v
    """
    out = s if inplace else s.copy()
    if p.base_angle == 0.0:
        return out
    u, v, rel = pair_table(p.channel, s.j_max, p.regime)
    x = p.base_angle * rel
    c, sn = np.cos(x), np.sin(x)
    phase = complex(math.cos(p.theta), math.sin(p.theta))
    amps = out.amplitudes
    q_u, q_v = amps[u], amps[v]
    amps[u] = c * q_u - 1j * phase.conjugate() * sn * q_v
    amps[v] = -1j * phase * sn * q_u + c * q_v
    return out


def inverse(p: Pulse) -> Pulse:
    """The pulse undoing ``p``: same area, laser phase shifted by pi"""
    return Pulse(p.channel, p.cancel, p.theta + math.pi, p.base_angle, p.regime)


def channel_generator(
    channel: ChannelId, j_max: int, theta: float, regime: RabiRegime = LambDicke()
) -> np.ndarray:
    """Dense Hermitian generator G with apply_pulse == expm(-i base_angle G)"""
    u, v, rel = pair_table(ChannelId(channel), j_max, regime)
    gen = np.zeros((dim(j_max), dim(j_max)), dtype=np.complex128)
    phase = complex(math.cos(theta), math.sin(theta))
    gen[v, u] = rel * phase
    gen[u, v] = rel * phase.conjugate()
    return gen


def channel_propagator(p: Pulse, j_max: int) -> np.ndarray:
    """Dense propagator of one pulse via the matrix exponential"""
    return expm(-1j * p.base_angle * channel_generator(p.channel, j_max, p.theta, p.regime))


def amplitude_pair(
    s: CompositeState, channel: ChannelId, cancel: BasisIndex
) -> Tuple[complex, complex, BasisIndex]:
    """(Q_cancel, Q_partner, partner) for a cancellation request"""
    partner = coupled_partner(channel, cancel, s.j_max)
    if partner is None:
        raise ValueError(f"{cancel} has no partner under channel {int(channel)}")
    return (
        complex(s.amplitudes[index_of(cancel, s.j_max)]),
        complex(s.amplitudes[index_of(partner, s.j_max)]),
        partner,
    )


@dataclass
class FeasibilityParams:
    """Physical parameters entering the trap-frequency RWA restrictions"""

    g_mag: float
    eps_x: float
    eps_y: float
    nu_x: float
    nu_y: float
    m_max: int
    n_max: int
    margin: float = 0.1

    def __post_init__(self) -> None:
        for name in ("g_mag", "nu_x", "nu_y", "margin"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.m_max < 0 or self.n_max < 0:
            raise ValueError("Cutoffs must be nonnegative")


@dataclass
class FeasibilityReport:
    """Outcome of the RWA restrictions for the two-mode exchange channel"""

    coupling_ratio: float
    coupling_ok: bool
    anisotropy_ratio: float
    anisotropy_ok: bool
    margin: float

    @property
    def passed(self) -> bool:
        return self.coupling_ok and self.anisotropy_ok

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "passed": self.passed}


def check_feasibility(fp: FeasibilityParams) -> FeasibilityReport:
    """Check |g| eps_x eps_y max(N, M) << min(nu) and trap anisotropy max(nu)/min(nu) >= 5"""
    nu_min, nu_max = min(fp.nu_x, fp.nu_y), max(fp.nu_x, fp.nu_y)
    r1 = fp.g_mag * abs(fp.eps_x * fp.eps_y) * max(fp.n_max, fp.m_max) / nu_min
    r2 = nu_max / nu_min
    report = FeasibilityReport(
        coupling_ratio=r1,
        coupling_ok=r1 <= fp.margin,
        anisotropy_ratio=r2,
        anisotropy_ok=r2 >= MIN_ANISOTROPY,
        margin=fp.margin,
    )
    if not report.passed:
        logger.warning(f"Feasibility check failed: r1={r1:.3g} (margin {fp.margin}), r2={r2:.3g}")
    return report
