import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.schemas.common import ArrayModel, UnitVec3

FRAME_TOL = 1e-10
DET_TOL = 1e-8


class Frame(BaseModel):
    """
    Ортонормированная тройка (T, e1, e2), N = e1 + i e2.

    Ортогональность и нормы проверяются с точностью 1e-10, det = +1 с 1e-8.
    """
    model_config = ConfigDict(frozen=True)

    T: UnitVec3
    e1: UnitVec3
    e2: UnitVec3

    @model_validator(mode="after")
    def _orthonormal(self) -> "Frame":
        mat = self.matrix()
        gram = mat.T @ mat
        if np.max(np.abs(gram - np.eye(3))) > FRAME_TOL:
            raise ValueError("frame vectors are not orthonormal")
        if abs(np.linalg.det(mat) - 1.0) > DET_TOL:
            raise ValueError("frame is not positively oriented")
        return self

    @classmethod
    def canonical(cls) -> "Frame":
        return cls.from_matrix(np.eye(3))

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "Frame":
        """Столбцы матрицы - T, e1, e2."""
        return cls(
            T=UnitVec3.from_array(mat[:, 0]),
            e1=UnitVec3.from_array(mat[:, 1]),
            e2=UnitVec3.from_array(mat[:, 2]),
        )

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.T.as_array(), self.e1.as_array(), self.e2.as_array()])

    @property
    def N(self) -> np.ndarray:
        return self.e1.as_array() + 1j * self.e2.as_array()


class FrameField(ArrayModel):
    """
    Рамки на равномерной сетке при фиксированном t.

    Attributes:
    - t (float): время.
    - x (np.ndarray): узлы сетки (n,).
    - frames (np.ndarray): (n, 3, 3), столбцы T, e1, e2.
    - tx (np.ndarray): (n, 3), T_x = Re(conj(u) N).
    - max_drift (float): наибольший дефект ортонормальности шага до перепроекции.
    """
    t: float
    x: np.ndarray
    frames: np.ndarray
    tx: np.ndarray
    max_drift: float = 0.0

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0]) if self.x.size > 1 else 0.0

    @property
    def T(self) -> np.ndarray:
        return self.frames[:, :, 0]

    @property
    def e1(self) -> np.ndarray:
        return self.frames[:, :, 1]

    @property
    def e2(self) -> np.ndarray:
        return self.frames[:, :, 2]

    def frame_at(self, index: int) -> Frame:
        return Frame.from_matrix(self.frames[index])

    def index_of(self, x0: float) -> int:
        return int(np.argmin(np.abs(self.x - x0)))

    def tangent_at(self, x: np.ndarray) -> np.ndarray:
        """Линейная интерполяция T с перенормировкой."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        cols = [np.interp(x, self.x, self.T[:, k]) for k in range(3)]
        vec = np.stack(cols, axis=-1)
        return vec / np.linalg.norm(vec, axis=-1, keepdims=True)

    def rotated(self, rotation: np.ndarray) -> "FrameField":
        """Жёсткий поворот всех векторов поля."""
        return FrameField(
            t=self.t,
            x=self.x,
            frames=np.einsum("ij,njk->nik", rotation, self.frames),
            tx=self.tx @ rotation.T,
            max_drift=self.max_drift,
        )

    def csv_rows(self) -> list[list[float]]:
        """x, Tx,Ty,Tz, e1x..e2z, txx,txy,txz."""
        flat = np.concatenate(
            [self.x[:, None], self.T, self.e1, self.e2, self.tx], axis=1
        )
        return flat.tolist()


class Curve(ArrayModel):
    """chi(t, .) на сетке; параметризация длиной дуги."""
    t: float
    x: np.ndarray
    points: np.ndarray

    def csv_rows(self) -> list[list[float]]:
        return np.concatenate([self.x[:, None], self.points], axis=1).tolist()


class SpaceGrid(BaseModel):
    """Равномерная сетка x_min..x_max с шагом dx."""
    model_config = ConfigDict(frozen=True)

    x_min: float
    x_max: float
    dx: float

    @model_validator(mode="after")
    def _ordered(self) -> "SpaceGrid":
        if not (self.x_max > self.x_min and self.dx > 0):
            raise ValueError("grid must satisfy x_min < x_max and dx > 0")
        return self

    def nodes(self) -> np.ndarray:
        count = int(round((self.x_max - self.x_min) / self.dx))
        return self.x_min + self.dx * np.arange(count + 1)


class MarchStats(BaseModel):
    """Статистика марша по времени: число шагов, дрейф до перепроекции, смещение якоря."""
    model_config = ConfigDict(frozen=True)

    steps: int
    max_drift: float
    reached_t: float
    anchor_shift: tuple[float, float, float] = (0.0, 0.0, 0.0)


class AlignmentReport(BaseModel):
    """
    Жёсткое выравнивание вычисленного поля по канонической ломаной.

    Attributes:
    - rotation (list[list[float]]): матрица поворота 3x3.
    - angle (float): угол этого поворота, рад.
    - rmsd (float): остаточное рассогласование направлений отрезков после поворота.
    - segments (int): сколько отрезков участвовало.
    """
    model_config = ConfigDict(frozen=True)

    rotation: list[list[float]]
    angle: float
    rmsd: float
    segments: int

    def matrix(self) -> np.ndarray:
        return np.array(self.rotation)
