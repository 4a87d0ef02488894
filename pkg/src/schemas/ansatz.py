import math
from functools import cached_property
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from src.schemas.geometry import CornerData


class AnsatzField(BaseModel):
    """
    Ведущий порядок решения NLS по данным углов.

    Калибровка фазы a(t) = M/t; поправки R_j считаются нулевыми.
    """
    model_config = ConfigDict(frozen=True, ignored_types=(cached_property,))

    corners: CornerData
    gauge: Literal["M/t"] = "M/t"

    @cached_property
    def positions(self) -> np.ndarray:
        return self.corners.positions

    @cached_property
    def alphas(self) -> np.ndarray:
        return self.corners.alphas

    @cached_property
    def mass(self) -> float:
        return self.corners.mass

    @cached_property
    def beta(self) -> np.ndarray:
        """|alpha_j|^2 - M для логарифмической поправки фазы."""
        return np.abs(self.alphas) ** 2 - self.mass

    @property
    def v_period(self) -> float:
        """Период спутника v по y: 2pi, если все позиции чётные, иначе 4pi."""
        if self.positions.size and np.all(np.mod(self.positions, 2) == 0):
            return 2.0 * math.pi
        return 4.0 * math.pi


class ComplexScalarSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float
    x: float
    value: complex

    @field_validator("value")
    @classmethod
    def _finite(cls, value: complex) -> complex:
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise ValueError("sample value must be finite")
        return value
