"""
ionsynth

Compiles arbitrary two-mode vibrational states of a trapped ion into sequences
of elementary laser pulses, simulates them, and estimates their sensitivity to
technical noise.
"""

__version__ = "0.1.0"

from .fock import BasisIndex, CompositeState, InternalLevel, TargetState  # noqa: E402
from .channels import ChannelId, LambDicke, Nonlinear, Pulse  # noqa: E402
from .synthesizer import (  # noqa: E402
    PulseSequence,
    SynthesisResult,
    de_evolve,
    preparation_sequence,
)
from .noise import FidelityReport, NoiseSpec, run_noisy, sweep  # noqa: E402
from .targets import TargetSpec, build_target, cat_state, correlated_state  # noqa: E402

__all__ = [
    "BasisIndex",
    "CompositeState",
    "InternalLevel",
    "TargetState",
    "ChannelId",
    "LambDicke",
    "Nonlinear",
    "Pulse",
    "PulseSequence",
    "SynthesisResult",
    "de_evolve",
    "preparation_sequence",
    "FidelityReport",
    "NoiseSpec",
    "run_noisy",
    "sweep",
    "TargetSpec",
    "build_target",
    "cat_state",
    "correlated_state",
]
