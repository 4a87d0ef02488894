import logging
from pathlib import Path
from typing import Any

from pydantic import ConfigDict, Field

from src.core.settings.base import BaseAppSettings


class AppSettings(BaseAppSettings):
    model_config = ConfigDict(
        validate_assignment=True,
    )

    title: str = "filament-lab"
    version: str = "0.1.0"
    debug: bool = False

    calibration_path: str = str(Path(__file__).resolve().parent.parent.parent / "calibration.yaml")
    logging_level: int = logging.INFO
    workers: int = Field(1, ge=1)
    float_digits: int = 17

    # frame marches
    chunk_size: int = Field(1 << 16, ge=64)
    space_step: float = Field(1e-3, gt=0)
    time_phase_step: float = Field(0.05, gt=0)
    oscillation_threshold: float = 1.0

    # spectral quadrature
    resolution_factor: float = Field(2.0, gt=0)
    taper_width: float = Field(2.0, gt=0)
    extra_length: float = 4.0
    xi_samples_per_unit: int = Field(64, ge=8)
    frame_keep_step: float = Field(1e-3, gt=0)

    # self-similar profile
    profile_ymax: float = Field(200.0, ge=50)
    profile_phase_step: float = Field(0.02, gt=0)
    profile_max_refinements: int = 4

    # direct simulation
    stability_factor: float = Field(0.2, gt=0)
    blowup_guard: float = 0.1

    @property
    def numerics_kwargs(self) -> dict[str, Any]:
        return {
            "chunk_size": self.chunk_size,
            "space_step": self.space_step,
            "time_phase_step": self.time_phase_step,
            "resolution_factor": self.resolution_factor,
            "taper_width": self.taper_width,
            "profile_ymax": self.profile_ymax,
            "stability_factor": self.stability_factor,
        }
