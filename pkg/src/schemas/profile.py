import numpy as np
from pydantic import BaseModel, ConfigDict

from src.schemas.common import ArrayModel


class ProfileTrajectory(ArrayModel):
    """
    Профиль автомодельного решения chi(t, x) = sqrt(t) G(x / sqrt(t)).

    Attributes:
    - alpha (float): кривизна профиля (постоянная).
    - y (np.ndarray): возрастающая симметричная сетка -Ymax..Ymax с шагом keep_step.
    - G (np.ndarray): (n, 3), точки профиля.
    - frames (np.ndarray): (n, 3, 3), столбцы T, n, b (тройка Френе).
    - dy (float): шаг интегрирования после измельчения.
    - max_drift (float): дефект ортонормальности шага до перепроекции.
    """
    alpha: float
    y: np.ndarray
    G: np.ndarray
    frames: np.ndarray
    dy: float
    max_drift: float = 0.0

    @property
    def y_max(self) -> float:
        return float(self.y[-1])

    @property
    def T(self) -> np.ndarray:
        return self.frames[:, :, 0]

    @property
    def normal(self) -> np.ndarray:
        return self.frames[:, :, 1]

    @property
    def binormal(self) -> np.ndarray:
        return self.frames[:, :, 2]

    def csv_rows(self) -> list[list[float]]:
        """y, Gx,Gy,Gz, Tx,Ty,Tz."""
        return np.concatenate([self.y[:, None], self.G, self.T], axis=1).tolist()


class AsymptoticTangents(BaseModel):
    """Пределы T при y -> -inf и y -> +inf и амплитуда осцилляций у концов."""
    model_config = ConfigDict(frozen=True)

    minus: tuple[float, float, float]
    plus: tuple[float, float, float]
    oscillation: float

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.minus), np.array(self.plus)


class AngleLawEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    theta_measured: float
    theta_law: float
    abs_err: float
