"""
File formats

Target coefficient files and pulse-sequence files (JSON, validated with
pydantic), Monte Carlo sweep tables (CSV / JSON) and provenance sidecars.
Primary outputs carry no timestamps so reruns are byte-identical; timing and
hashes go into ``<output>.provenance.json``.
"""

import csv
import json
import hashlib
import logging
import platform
from datetime import datetime, timezone
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from . import __version__
from .channels import ChannelId, LambDicke, Nonlinear, Pulse, RabiRegime, coupled_partner
from .errors import SequenceFileError, TargetFileError
from .fock import BasisIndex, InternalLevel, TargetState
from .synthesizer import Direction, PulseSequence

if TYPE_CHECKING:
    from .noise import FidelityReport

logger = logging.getLogger(__name__)

SWEEP_HEADER = ["delta", "mean_fidelity", "std_error", "runs", "seed"]


class CoefficientEntry(BaseModel):
    m: int = Field(ge=0)
    n: int = Field(ge=0)
    re: float
    im: float = 0.0


class TargetFile(BaseModel):
    m_max: int = Field(ge=0)
    n_max: int = Field(ge=0)
    coefficients: List[CoefficientEntry]
    label: Optional[str] = None


class CancelEntry(BaseModel):
    m: int = Field(ge=0)
    n: int = Field(ge=0)
    level: Literal["a", "b", "c"]


class PulseEntry(BaseModel):
    seq: int = Field(ge=0)
    channel: int = Field(ge=1, le=5)
    cancel: CancelEntry
    theta: float
    base_angle: float = Field(ge=0.0)


class RegimeEntry(BaseModel):
    kind: Literal["lamb_dicke", "nonlinear"] = "lamb_dicke"
    eps_x: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    eps_y: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    strict: bool = False


class SequenceFile(BaseModel):
    direction: Literal["deevolve", "prepare"]
    j_max: int = Field(ge=0)
    regime: RegimeEntry = Field(default_factory=RegimeEntry)
    pulses: List[PulseEntry]
    skipped: int = Field(default=0, ge=0)
    global_phase: float = 0.0


def _describe(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}" for err in error.errors()
    )


def _first_entry(error: ValidationError, key: str) -> Optional[int]:
    for err in error.errors():
        loc = err["loc"]
        if len(loc) >= 2 and loc[0] == key and isinstance(loc[1], int):
            return loc[1]
    return None


def _load_json(path: Path, error_cls: type) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise error_cls(f"{path}: file not found")
    except json.JSONDecodeError as e:
        raise error_cls(f"{path}: invalid JSON ({e})")


def _dump_json(payload: Dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    return path


def read_target(path: Path) -> TargetState:
    """Load a target coefficient file; unlisted (m, n) are zero"""
    data = _load_json(path, TargetFileError)
    try:
        parsed = TargetFile.model_validate(data)
    except ValidationError as e:
        entry = _first_entry(e, "coefficients")
        if entry is not None:
            raise TargetFileError(f"{path}: {_describe(e)}", entry=entry)
        raise TargetFileError(f"{path}: {_describe(e)}")

    table = np.zeros((parsed.m_max + 1, parsed.n_max + 1), dtype=np.complex128)
    seen = set()
    for i, c in enumerate(parsed.coefficients):
        if c.m > parsed.m_max or c.n > parsed.n_max:
            raise TargetFileError(
                f"({c.m},{c.n}) lies outside m_max={parsed.m_max}, n_max={parsed.n_max}",
                entry=i,
            )
        if (c.m, c.n) in seen:
            raise TargetFileError(f"({c.m},{c.n}) listed twice", entry=i)
        seen.add((c.m, c.n))
        table[c.m, c.n] = complex(c.re, c.im)

    try:
        target = TargetState.from_unnormalized(table, label=parsed.label or path.stem)
    except ValueError as e:
        raise TargetFileError(f"{path}: {e}")
    if target.norm_factor != 1.0:
        logger.warning(f"Renormalized {path} (norm was {target.norm_factor:.17g})")
    return target


def write_target(t: TargetState, path: Path) -> Path:
    """Write the nonzero coefficients of a target"""
    entries = []
    for m, n in zip(*np.nonzero(t.coefficients)):
        q = t.coefficients[m, n]
        entries.append({"m": int(m), "n": int(n), "re": float(q.real), "im": float(q.imag)})
    payload = {"m_max": t.m_max, "n_max": t.n_max, "label": t.label, "coefficients": entries}
    _dump_json(payload, path)
    logger.info(f"Wrote target {t.label} to {path}")
    return path


def _regime_entry(regime: RabiRegime) -> Dict[str, Any]:
    return regime.to_dict()


def _regime_from_entry(entry: RegimeEntry) -> RabiRegime:
    if entry.kind == "nonlinear":
        if entry.eps_x is None or entry.eps_y is None:
            raise SequenceFileError("Nonlinear regime needs eps_x and eps_y")
        return Nonlinear(entry.eps_x, entry.eps_y, entry.strict)
    return LambDicke()


def write_sequence(seq: PulseSequence, path: Path) -> Path:
    """Write a pulse sequence in application order"""
    pulses = [
        {
            "seq": i,
            "channel": int(p.channel),
            "cancel": {"m": p.cancel.m, "n": p.cancel.n, "level": p.cancel.level.label},
            "theta": float(p.theta),
            "base_angle": float(p.base_angle),
        }
        for i, p in enumerate(seq.pulses)
    ]
    payload = {
        "direction": seq.direction.value,
        "j_max": seq.j_max,
        "regime": _regime_entry(seq.regime),
        "skipped": seq.skipped,
        "global_phase": float(seq.global_phase),
        "pulses": pulses,
    }
    _dump_json(payload, path)
    logger.info(f"Wrote {seq.direction.value} sequence ({len(pulses)} pulses) to {path}")
    return path


def read_sequence(path: Path) -> PulseSequence:
    """Load a pulse-sequence file"""
    data = _load_json(path, SequenceFileError)
    try:
        parsed = SequenceFile.model_validate(data)
    except ValidationError as e:
        raise SequenceFileError(f"{path}: {_describe(e)}")

    regime = _regime_from_entry(parsed.regime)
    ordered = sorted(parsed.pulses, key=lambda entry: entry.seq)
    if [entry.seq for entry in ordered] != list(range(len(ordered))):
        raise SequenceFileError(f"{path}: pulse 'seq' numbers must be 0..{len(ordered) - 1}")

    pulses = []
    for entry in ordered:
        cancel = BasisIndex(
            entry.cancel.m, entry.cancel.n, InternalLevel.from_label(entry.cancel.level)
        )
        if cancel.j > parsed.j_max:
            raise SequenceFileError(
                f"{path}: pulse {entry.seq} cancels {cancel} outside j_max={parsed.j_max}"
            )
        channel = ChannelId(entry.channel)
        if coupled_partner(channel, cancel, parsed.j_max) is None:
            raise SequenceFileError(
                f"{path}: pulse {entry.seq} cancels {cancel}, which channel {int(channel)} "
                "does not couple inside the triangle"
            )
        pulses.append(Pulse(channel, cancel, entry.theta, entry.base_angle, regime))
    return PulseSequence(
        direction=Direction(parsed.direction),
        j_max=parsed.j_max,
        pulses=pulses,
        skipped=parsed.skipped,
        regime=regime,
        global_phase=parsed.global_phase,
    )


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_sweep_csv(reports: Iterable["FidelityReport"], path: Path) -> Path:
    """One row per noise range, floats with 17 significant digits"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for r in reports:
            writer.writerow(
                [_fmt(r.delta), _fmt(r.mean_fidelity), _fmt(r.std_error), r.runs, r.seed]
            )
    logger.info(f"Wrote sweep table to {path}")
    return path


def write_sweep_json(
    reports: Iterable["FidelityReport"], path: Path, provenance: Dict[str, Any]
) -> Path:
    """The CSV rows as JSON, plus the inputs they were computed from"""
    payload = {"reports": [r.to_dict() for r in reports], "provenance": provenance}
    return _dump_json(payload, path)


def write_report(payload: Dict[str, Any], path: Path) -> Path:
    return _dump_json(payload, path)


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def provenance_block(
    command: str, config: Dict[str, Any], inputs: Optional[Dict[str, Path]] = None
) -> Dict[str, Any]:
    """Tool version, configuration echo and input hashes (no timestamps)"""
    return {
        "tool": "ionsynth",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": {name: file_sha256(p) for name, p in sorted((inputs or {}).items())},
    }


def write_provenance(output: Path, block: Dict[str, Any]) -> Path:
    """Sidecar next to a primary output, with the run timestamp and platform"""
    payload = {
        **block,
        "created": datetime.now(timezone.utc).isoformat(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    return _dump_json(payload, output.with_name(output.name + ".provenance.json"))
