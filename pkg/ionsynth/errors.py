"""
Exceptions raised by ionsynth

Library code raises these; the command-line front end maps the two families
(input errors and computation errors) onto its exit codes.
"""

from typing import Optional


class IonSynthError(Exception):
    """Base class for all ionsynth errors"""


class InputError(IonSynthError):
    """Something the user supplied (file, flag, parameter) is unusable"""


class ComputationError(IonSynthError):
    """A well-formed request could not be carried out numerically"""


class TargetFileError(InputError):
    """Malformed or unnormalizable target coefficient file"""

    def __init__(self, message: str, entry: Optional[int] = None):
        self.entry = entry
        if entry is not None:
            message = f"coefficients[{entry}]: {message}"
        super().__init__(message)


class SequenceFileError(InputError):
    """Malformed pulse-sequence file"""


class DimensionMismatchError(InputError, ValueError):
    """Two objects live in different composite spaces"""


class PulseInfeasible(ComputationError):
    """A cancellation condition cannot be met by the requested channel"""

    def __init__(
        self,
        rel_rabi: float,
        amplitude: float,
        channel: Optional[int] = None,
        cancel: Optional[object] = None,
    ):
        self.rel_rabi = rel_rabi
        self.amplitude = amplitude
        self.channel = channel
        self.cancel = cancel
        where = "cannot cancel"
        if channel is not None:
            where = f"channel {channel} cannot cancel {cancel}"
        super().__init__(
            f"{where}: coupling factor {rel_rabi:.3e} vanishes while "
            f"|amplitude| = {amplitude:.3e}"
        )


class SynthesisFailed(ComputationError):
    """De-evolution did not terminate in the vacuum"""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"residual vacuum infidelity {residual:.3e} exceeds tolerance {tolerance:.1e}"
        )


class TruncationError(ComputationError):
    """Cutoff search exceeded its cap"""


class UnsupportedRegimeError(ComputationError):
    """The requested Rabi regime has no known matrix element for this channel"""


class DirectionMismatchError(ComputationError):
    """A de-evolution sequence was given where a preparation sequence is needed (or vice versa)"""


class UnnormalizableTarget(ComputationError):
    """A target construction left no nonzero coefficient inside the cutoffs"""
