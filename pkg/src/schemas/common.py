from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

UNIT_TOL = 1e-12


class ArrayModel(BaseModel):
    """Базовая модель для полей с массивами numpy (неизменяемая после создания)."""
    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        frozen=True,
    )


class UnitVec3(BaseModel):
    """
    Единичный вектор в R^3.

    Attributes:
    - x, y, z (float): компоненты; |v| = 1 с точностью 1e-12.
    """
    model_config = ConfigDict(frozen=True)

    x: float
    y: float
    z: float

    @model_validator(mode="before")
    @classmethod
    def _renormalize(cls, data: Any) -> Any:
        if isinstance(data, dict):
            vec = np.array([data.get("x", 0.0), data.get("y", 0.0), data.get("z", 0.0)], dtype=float)
            norm = np.linalg.norm(vec)
            if norm == 0.0:
                raise ValueError("zero vector has no direction")
            vec = vec / norm
            return {"x": float(vec[0]), "y": float(vec[1]), "z": float(vec[2])}
        return data

    @classmethod
    def from_array(cls, vec: np.ndarray) -> "UnitVec3":
        return cls(x=float(vec[0]), y=float(vec[1]), z=float(vec[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.z]


def complex_vec_to_reals(vec: np.ndarray) -> list[float]:
    """Комплексный 3-вектор -> [re_x, im_x, re_y, im_y, re_z, im_z]."""
    out: list[float] = []
    for value in np.asarray(vec, dtype=complex):
        out.extend([float(value.real), float(value.imag)])
    return out
