import numpy as np
from pydantic import BaseModel, ConfigDict

from src.schemas.common import ArrayModel


class TangentField(ArrayModel):
    """
    Поле касательных T на равномерной сетке для прямого интегрирования T_t = T x T_xx.

    Attributes:
    - t (float): время.
    - x (np.ndarray): узлы сетки (n,), шаг h.
    - T (np.ndarray): (n, 3), единичные векторы; крайние узлы закреплены.
    - drift (float): max | |T_i| - 1 | последнего шага до перенормировки.
    """
    t: float
    x: np.ndarray
    T: np.ndarray
    drift: float = 0.0

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def csv_rows(self) -> list[list[float]]:
        """x, Tx, Ty, Tz."""
        return np.concatenate([self.x[:, None], self.T], axis=1).tolist()


class SimulationRun(BaseModel):
    """
    Итог прогона: снимки, ряд энергии и параметры схемы.

    Attributes:
    - snapshots (list[TangentField]): поля в запрошенные моменты (фактические t в полях).
    - energy_times, energy_values (list[float]): ряд дискретной энергии sum |dT|^2 / h.
    - energy_drift (float): max относительного отклонения энергии от начальной.
    - max_drift (float): наибольший дефект нормы до перенормировки за прогон.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    final: TangentField
    snapshots: list[TangentField]
    dt: float
    steps: int
    mollify_eps: float | None = None
    energy_times: list[float]
    energy_values: list[float]
    energy_drift: float
    max_drift: float

    def manifest_dict(self) -> dict:
        return {
            "grid": {"x_min": float(self.final.x[0]), "x_max": float(self.final.x[-1]), "h": self.final.h},
            "dt": self.dt,
            "steps": self.steps,
            "mollify_eps": self.mollify_eps,
            "energy_times": self.energy_times,
            "energy_values": self.energy_values,
            "energy_drift": self.energy_drift,
            "max_drift": self.max_drift,
        }


class CompareMetrics(BaseModel):
    """
    Расстояние между прямым решением и полем рамок Хасимото.

    Attributes:
    - sup, l2 (float): нормы |T_direct - R T_hasimoto| на общей области без краевых слоёв.
    - x_min, x_max (float): область сравнения.
    - rotation_angle (float): угол жёсткого поворота, совмещающего поля.
    """
    model_config = ConfigDict(frozen=True)

    t: float
    sup: float
    l2: float
    x_min: float
    x_max: float
    nodes: int
    rotation_angle: float
    mollify_eps: float | None = None
