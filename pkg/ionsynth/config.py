"""
Runtime configuration

Settings come from the environment (optionally a .env file) with defaults;
command-line flags override them per run.
"""

import os
import logging
from dataclasses import dataclass, asdict
from typing import Any, Dict

from dotenv import load_dotenv

load_dotenv()
logger = logging.getLogger(__name__)

NOISE_MODELS = ("centered", "wide", "one_sided")


@dataclass(frozen=True)
class Settings:
    """Effective configuration for a run"""

    output_dir: str = "./output"
    log_level: str = "INFO"
    skip_tol: float = 1e-14
    residual_tol: float = 1e-9
    mc_workers: int = 1
    noise_model: str = "centered"
    feasibility_margin: float = 0.1

    def __post_init__(self) -> None:
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(
                f"Unknown noise model '{self.noise_model}', expected one of {NOISE_MODELS}"
            )
        if self.mc_workers < 1:
            raise ValueError("mc_workers must be at least 1")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def get_settings() -> Settings:
    """Read settings from environment variables"""
    settings = Settings(
        output_dir=os.getenv("IONSYNTH_OUTPUT_DIR", "./output"),
        log_level=os.getenv("IONSYNTH_LOG_LEVEL", "INFO").upper(),
        skip_tol=float(os.getenv("IONSYNTH_SKIP_TOL", "1e-14")),
        residual_tol=float(os.getenv("IONSYNTH_RESIDUAL_TOL", "1e-9")),
        mc_workers=int(os.getenv("IONSYNTH_MC_WORKERS", "1")),
        noise_model=os.getenv("IONSYNTH_NOISE_MODEL", "centered"),
        feasibility_margin=float(os.getenv("IONSYNTH_FEASIBILITY_MARGIN", "0.1")),
    )
    logger.debug(f"Loaded settings: {settings}")
    return settings
