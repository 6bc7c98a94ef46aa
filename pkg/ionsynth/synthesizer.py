"""
Pulse-sequence compiler

Compiles a two-mode target into a sequence of elementary pulses by
de-evolving |target> (x) |a> into the vacuum |0,0> (x) |a>. Every pulse is
solved against the live simulated state and applied immediately, subspace by
subspace from the highest total quanta J down to zero:

    for J = J_max .. 1:  A_J (channels 3, 1), B_{J-1} (channels 2, 4), C_J (channel 5)
    finally A_0: one channel-1 pulse on |0,0,b>

Reversing the sequence and shifting every laser phase by pi prepares the
target from the vacuum.
"""

import math
import time
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .channels import (
    ZERO_COUPLING,
    ChannelId,
    LambDicke,
    Pulse,
    RabiRegime,
    amplitude_pair,
    apply_pulse,
    inverse,
    relative_rabi,
)
from .config import get_settings
from .errors import DimensionMismatchError, PulseInfeasible, SynthesisFailed
from .fock import BasisIndex, CompositeState, InternalLevel, TargetState, embed_target

logger = logging.getLogger(__name__)

A, B, C = InternalLevel.A, InternalLevel.B, InternalLevel.C


class Direction(str, Enum):
    DEEVOLVE = "deevolve"
    PREPARE = "prepare"


@dataclass
class PulseSequence:
    """Ordered pulses (application order) plus bookkeeping

    ``skipped`` counts slots whose amplitude was already zero. ``global_phase``
    is the phase the sequence leaves on the vacuum (deevolve) or on the target
    (prepare), so preparation yields exp(i global_phase) |target> (x) |a>.
    """

    direction: Direction
    j_max: int
    pulses: List[Pulse] = field(default_factory=list)
    skipped: int = 0
    regime: RabiRegime = LambDicke()
    global_phase: float = 0.0

    def __post_init__(self) -> None:
        self.direction = Direction(self.direction)
        for seq, pulse in enumerate(self.pulses):
            if pulse.cancel.j > self.j_max:
                raise DimensionMismatchError(
                    f"Pulse {seq} cancels {pulse.cancel} outside j_max={self.j_max}"
                )
            if pulse.regime != self.regime:
                raise ValueError(
                    f"Pulse {seq} uses regime {pulse.regime}, the sequence uses {self.regime}"
                )

    @property
    def slots(self) -> int:
        return len(self.pulses) + self.skipped

    def __len__(self) -> int:
        return len(self.pulses)


@dataclass
class SynthesisResult:
    """Outcome of one de-evolution"""

    sequence: PulseSequence
    residual_vacuum_infidelity: float
    global_phase: float
    wall_time: float = 0.0

    def report(self) -> Dict[str, Any]:
        return {
            "residual_vacuum_infidelity": self.residual_vacuum_infidelity,
            "global_phase": self.global_phase,
            "emitted": len(self.sequence.pulses),
            "skipped": self.sequence.skipped,
            "slots": self.sequence.slots,
            "expected_slots": op_count_expected(self.sequence.j_max),
            "j_max": self.sequence.j_max,
            "wall_time": self.wall_time,
        }


Block = Tuple[List[Pulse], int]


def solve_cancellation(
    q_cancel: complex,
    q_partner: complex,
    rel_rabi: float,
    cancel_is_source: bool = True,
    skip_tol: float = 1e-14,
) -> Tuple[float, float]:
    """Pulse phase and area that zero ``q_cancel`` by rotating it into its partner

    Returns (theta, base_angle). The cancelled amplitude sits on the pair's
    source (lower level) when ``cancel_is_source`` is true, otherwise on the
    partner; the phase condition differs between the two sides.
    """
    if abs(q_cancel) < skip_tol:
        return 0.0, 0.0
    if abs(rel_rabi) <= ZERO_COUPLING:
        raise PulseInfeasible(rel_rabi, abs(q_cancel))

    arg_cancel = math.atan2(q_cancel.imag, q_cancel.real)
    arg_partner = math.atan2(q_partner.imag, q_partner.real) if q_partner != 0 else 0.0
    if cancel_is_source:
        theta = arg_partner - arg_cancel + math.pi / 2
    else:
        theta = arg_cancel - arg_partner - math.pi / 2
    # a negative coupling is a rotation by -x, i.e. the same rotation with theta + pi
    if rel_rabi < 0:
        theta += math.pi
    base_angle = math.atan2(abs(q_cancel), abs(q_partner)) / abs(rel_rabi)
    return theta % (2 * math.pi), base_angle


def _cancel(
    s: CompositeState,
    channel: ChannelId,
    cancel: BasisIndex,
    regime: RabiRegime,
    skip_tol: float,
) -> Optional[Pulse]:
    """Solve and apply one slot in place; None when the slot is skipped"""
    q_cancel, q_partner, _ = amplitude_pair(s, channel, cancel)
    if abs(q_cancel) < skip_tol:
        return None
    rel = relative_rabi(channel, cancel, regime)
    cancel_is_source = cancel.level == channel.levels[0]
    try:
        theta, base_angle = solve_cancellation(
            q_cancel, q_partner, rel, cancel_is_source=cancel_is_source, skip_tol=skip_tol
        )
    except PulseInfeasible as e:
        raise PulseInfeasible(e.rel_rabi, e.amplitude, int(channel), cancel) from e
    pulse = Pulse(channel, cancel, theta, base_angle, regime)
    apply_pulse(s, pulse, inplace=True)
    return pulse


def _run_slots(
    s: CompositeState,
    slots: List[Tuple[ChannelId, BasisIndex]],
    regime: RabiRegime,
    skip_tol: float,
) -> Block:
    pulses: List[Pulse] = []
    skipped = 0
    for channel, cancel in slots:
        pulse = _cancel(s, channel, cancel, regime, skip_tol)
        if pulse is None:
            skipped += 1
        else:
            pulses.append(pulse)
    return pulses, skipped


def build_A(
    J: int, s: CompositeState, regime: RabiRegime = LambDicke(), skip_tol: float = 1e-14
) -> Block:
    """Shrink H_J (x) H_in onto |J,0,a> with alternating channel-3 and channel-1 pulses

    Mutates ``s``; returns (emitted pulses, skipped slot count).
    """
    if J < 1:
        raise ValueError(f"A_J needs J >= 1, got {J}")
    slots: List[Tuple[ChannelId, BasisIndex]] = []
    for k in range(J):
        slots.append((ChannelId.EXCHANGE_AB, BasisIndex(k, J - k, A)))
        slots.append((ChannelId.CARRIER_AB, BasisIndex(k + 1, J - k - 1, B)))
    return _run_slots(s, slots, regime, skip_tol)


def build_B(
    J: int, s: CompositeState, regime: RabiRegime = LambDicke(), skip_tol: float = 1e-14
) -> Block:
    """Clear levels b, c of H_J except |J,0,b> so channel 5 cannot push population back up"""
    if J < 0:
        raise ValueError(f"B_J needs J >= 0, got {J}")
    slots: List[Tuple[ChannelId, BasisIndex]] = []
    for k in range(J):
        slots.append((ChannelId.CARRIER_BC, BasisIndex(k, J - k, C)))
        slots.append((ChannelId.EXCHANGE_BC, BasisIndex(k, J - k, B)))
    slots.append((ChannelId.CARRIER_BC, BasisIndex(J, 0, C)))
    return _run_slots(s, slots, regime, skip_tol)


def build_C(
    J: int, s: CompositeState, regime: RabiRegime = LambDicke(), skip_tol: float = 1e-14
) -> Block:
    """Move |J,0,a> down to |J-1,0,b> with one channel-5 pulse"""
    if J < 1:
        raise ValueError(f"C_J needs J >= 1, got {J}")
    return _run_slots(s, [(ChannelId.SIDEBAND_X, BasisIndex(J, 0, A))], regime, skip_tol)


def de_evolve(
    t: TargetState,
    regime: RabiRegime = LambDicke(),
    skip_tol: Optional[float] = None,
    residual_tol: Optional[float] = None,
) -> SynthesisResult:
    """Compile ``t`` into a de-evolution sequence ending in the vacuum"""
    settings = get_settings()
    skip_tol = settings.skip_tol if skip_tol is None else skip_tol
    residual_tol = settings.residual_tol if residual_tol is None else residual_tol

    start = time.perf_counter()
    s = embed_target(t, A)
    j_max = s.j_max
    pulses: List[Pulse] = []
    skipped = 0

    for J in range(j_max, 0, -1):
        for builder, subspace in ((build_A, J), (build_B, J - 1), (build_C, J)):
            emitted, skips = builder(subspace, s, regime, skip_tol)
            pulses.extend(emitted)
            skipped += skips
        logger.debug(f"Cleared J={J}: {len(pulses)} pulses emitted so far")

    # A_0
    emitted, skips = _run_slots(
        s, [(ChannelId.CARRIER_AB, BasisIndex(0, 0, B))], regime, skip_tol
    )
    pulses.extend(emitted)
    skipped += skips

    vacuum_amp = complex(s.amplitudes[0])
    residual = max(0.0, 1.0 - abs(vacuum_amp) ** 2)
    phase = float(np.angle(vacuum_amp))
    elapsed = time.perf_counter() - start

    if residual > residual_tol:
        logger.error(f"De-evolution of {t.label} left residual {residual:.3e}")
        raise SynthesisFailed(residual, residual_tol)

    sequence = PulseSequence(
        direction=Direction.DEEVOLVE,
        j_max=j_max,
        pulses=pulses,
        skipped=skipped,
        regime=regime,
        global_phase=phase,
    )
    logger.info(
        f"Synthesized {t.label} (j_max={j_max}): {len(pulses)} pulses, {skipped} skipped, "
        f"residual {residual:.2e} in {elapsed:.3f}s"
    )
    return SynthesisResult(sequence, residual, phase, elapsed)


def preparation_sequence(r: SynthesisResult) -> PulseSequence:
    """Reverse a de-evolution and invert every pulse: vacuum -> target"""
    deevolve = r.sequence
    return replace(
        deevolve,
        direction=Direction.PREPARE,
        pulses=[inverse(p) for p in reversed(deevolve.pulses)],
        global_phase=-r.global_phase,
    )


def apply_sequence(
    s: CompositeState, seq: PulseSequence, inplace: bool = False
) -> CompositeState:
    """Forward-simulate a sequence on a state"""
    if s.j_max != seq.j_max:
        raise DimensionMismatchError(
            f"Sequence compiled for j_max={seq.j_max} applied to j_max={s.j_max}"
        )
    out = s if inplace else s.copy()
    for pulse in seq.pulses:
        apply_pulse(out, pulse, inplace=True)
    return out


def op_count_expected(j_max: int) -> int:
    """Pulse slots of the full sequence: A_0 plus 4J per subspace J = 1..j_max"""
    return 1 + 2 * j_max * (j_max + 1)


def op_count_gczs(m_max: int) -> int:
    """Operation count 2 M_max 2^M_max of the exponential two-level scheme, for comparison"""
    return 2 * m_max * 2**m_max
