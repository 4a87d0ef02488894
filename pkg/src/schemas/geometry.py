import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.schemas.common import UnitVec3


class Corner(BaseModel):
    """Угол ломаной: целая позиция и комплексная амплитуда alpha."""
    model_config = ConfigDict(frozen=True)

    pos: int
    alpha_re: float
    alpha_im: float = 0.0

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)

    @property
    def modulus(self) -> float:
        return abs(self.alpha)


class CornerData(BaseModel):
    """
    Дискретная гребёнка Дирака: позиции углов и амплитуды alpha_j.

    Attributes:
    - entries (list[Corner]): углы со строго возрастающими целыми позициями.
    - s (float): вес нормы l^{2,s}, s > 1/2.
    - gamma (float): показатель затухания поправок R_j; при R_j = 0 только метаданные.
    """
    model_config = ConfigDict(frozen=True)

    entries: list[Corner] = []
    s: float = Field(1.0, gt=0.5)
    gamma: float = Field(0.75, gt=0.5, lt=1.0)

    @field_validator("entries")
    @classmethod
    def _increasing(cls, entries: list[Corner]) -> list[Corner]:
        positions = [c.pos for c in entries]
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError("corner positions must be strictly increasing")
        return entries

    @property
    def positions(self) -> np.ndarray:
        return np.array([c.pos for c in self.entries], dtype=float)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([c.alpha for c in self.entries], dtype=complex)

    @property
    def mass(self) -> float:
        return float(sum(abs(c.alpha) ** 2 for c in self.entries))

    @property
    def weighted_norm(self) -> float:
        """sqrt(sum |j|^{2s} |alpha_j|^2); угол в нуле в норму не входит."""
        total = sum(abs(c.pos) ** (2.0 * self.s) * abs(c.alpha) ** 2 for c in self.entries)
        return math.sqrt(total)

    @property
    def l1_norm(self) -> float:
        return float(sum(abs(c.alpha) for c in self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def is_planar_equal(self, tol: float = 1e-12) -> bool:
        """Все alpha вещественны и одного модуля (гипотезы теорем о росте)."""
        if not self.entries:
            return True
        ref = self.entries[0].modulus
        return all(
            abs(c.alpha_im) <= tol and abs(c.modulus - ref) <= tol * max(1.0, ref)
            for c in self.entries
        )


class PolyLine(BaseModel):
    """
    Ломаная chi_0 с углами в целых точках.

    segment_directions[0] и [-1] - это T^{-inf} и T^{+inf}; vertices - chi_0 в
    позициях углов.
    twists[j] - поворот плоскости угла j+1 относительно угла j вокруг отрезка между ними.
    """
    model_config = ConfigDict(frozen=True)

    corners: CornerData
    theta: float | None = None
    segment_directions: list[UnitVec3]
    twists: list[float] = []
    vertices: list[tuple[float, float, float]] = []
    middle_index: int = 0

    def directions_array(self) -> np.ndarray:
        return np.array([d.as_array() for d in self.segment_directions])

    def to_json_dict(self) -> dict:
        return {
            "corners": [
                {"pos": c.pos, "alpha_re": c.alpha_re, "alpha_im": c.alpha_im}
                for c in self.corners.entries
            ],
            "theta": self.theta,
            "directions": [d.as_list() for d in self.segment_directions],
            "twists": list(self.twists),
        }


class GrowthVector(BaseModel):
    """
    Вектор роста V (или V_m) = i * scale * real_part.

    Attributes:
    - real_part (list[float]): вещественный 3-вектор в скобках.
    - scale (float): (-2/pi) log sin(theta/2) = |alpha|^2.
    - closed_form_modulus (float | None): |alpha|^2 * 2(1 - cos(pi - theta)) для двух углов.
    - degenerate (bool): V = 0 (нет угла или вырожденная геометрия).
    """
    model_config = ConfigDict(frozen=True)

    real_part: tuple[float, float, float]
    scale: float
    m: int = 1
    closed_form_modulus: float | None = None
    small_angle_modulus: float | None = None
    degenerate: bool = False

    @property
    def value(self) -> np.ndarray:
        return 1j * self.scale * np.array(self.real_part)

    @property
    def modulus(self) -> float:
        return float(np.linalg.norm(self.value))
