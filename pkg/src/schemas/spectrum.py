import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.schemas.common import ArrayModel

XI_CONVENTION = "exp(+i2pi x xi)"


class Window(BaseModel):
    """Резонансное окно |xi - sign * m / (2 pi t)| <= 1/n."""
    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=1)
    sign: int
    center: float
    radius: float

    def contains(self, xi: float) -> bool:
        return abs(xi - self.center) <= self.radius


class Spectrum(ArrayModel):
    """
    Значения T_x^(t, xi) = int e^{i 2 pi x xi} T_x(t, x) dx.

    Attributes:
    - t (float): время.
    - xi (np.ndarray): частоты (k,).
    - values (np.ndarray): (k, 3) комплексные.
    - window_m (np.ndarray): номер окна для каждой частоты, 0 - вне окон.
    - window_sign (np.ndarray): знак окна (+1 / -1), 0 - вне окон.
    - truncation (float): полуширина области интегрирования L.
    - taper (float): ширина сглаживающего края.
    - two_grid_error (float): расхождение с вдвое более грубой сеткой.
    """
    t: float
    xi: np.ndarray
    values: np.ndarray
    window_m: np.ndarray
    window_sign: np.ndarray
    truncation: float
    taper: float
    two_grid_error: float = 0.0

    @property
    def magnitudes(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    def rotated(self, rotation: np.ndarray) -> "Spectrum":
        """Поворот значений вместе с полем (преобразование линейно по T_x)."""
        return self.model_copy(update={"values": self.values @ rotation.T})

    def csv_rows(self) -> list[list[float]]:
        """xi, re_x, im_x, re_y, im_y, re_z, im_z, abs, window_m, window_sign."""
        rows = []
        for xi, vec, mag, m, sign in zip(
            self.xi, self.values, self.magnitudes, self.window_m, self.window_sign
        ):
            row = [float(xi)]
            for value in vec:
                row.extend([float(value.real), float(value.imag)])
            row.extend([float(mag), int(m), int(sign)])
            rows.append(row)
        return rows


class SlopeFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    slope: float
    intercept: float
    rvalue: float
    target: float
    rel_err: float
    within_tolerance: bool


class GrowthEntry(BaseModel):
    """
    Одна частота сканирования: окно (m, sign), смещение delta и сравнение с V log n.

    Attributes:
    - measured (list[float]): T_x^ как [re_x, im_x, re_y, im_y, re_z, im_z].
    - center (list[float]): предсказанный центр V log n (или conj(V) log n при sign = -1).
    - center_mag (float): |центр|.
    - band (float): 1/2 |V| log n.
    - distance (float): |measured - center|.
    - passed (bool): distance <= band (для вырожденного V - всегда True).
    - lemma_error (float | None): |measured - резонансный предиктор| на этой частоте.
    """
    model_config = ConfigDict(frozen=True)

    n: int
    t: float
    xi: float
    sign: int
    delta: float
    measured: list[float]
    center: list[float]
    center_mag: float
    band: float
    distance: float
    passed: bool = Field(serialization_alias="pass")
    lemma_error: float | None = None


class ScanPoint(BaseModel):
    """Сводка сканирования для одного n."""
    model_config = ConfigDict(frozen=True)

    n: int
    t: float
    tau: float
    peak: float
    log_statistic: float
    offwindow: float | None = None
    offwindow_sup: float | None = None
    lemma_error: float | None = None
    alignment_angle: float | None = None
    alignment_rmsd: float | None = None
    two_grid_error: float | None = None
    error: dict | None = None


class GrowthReport(BaseModel):
    """
    Итог сканирования роста по n.

    pass_flags[n] верен, только если верны все entries с этим n.

    Тренды по соседним n (None - недостаточно точек или V вырожден):
    - offwindow_ratios / offwindow_flat: отношение статистики вне окон, флаг < tolerances.offwindow_ratio.
    - lemma_shrink / lemma_trend_ok: во сколько раз падает ошибка предиктора, флаг >= tolerances.lemma_shrink.
    - offwindow_below_peak: sup вне окон меньше пика в окнах для каждого n.
    """
    model_config = ConfigDict(frozen=True)

    theta: float
    N: int
    m: int
    V: list[float]
    V_modulus: float
    degenerate: bool
    n_values: list[int]
    t_values: list[float]
    entries: list[GrowthEntry]
    points: list[ScanPoint]
    slope_fit: SlopeFit | None = None
    offwindow_ratios: list[float] = []
    offwindow_flat: bool | None = None
    lemma_shrink: list[float] = []
    lemma_trend_ok: bool | None = None
    offwindow_below_peak: bool | None = None
    xi_convention: str = XI_CONVENTION

    @property
    def trend_flags(self) -> dict[str, bool | None]:
        return {
            "offwindow_flat": self.offwindow_flat,
            "lemma_trend": self.lemma_trend_ok,
            "offwindow_below_peak": self.offwindow_below_peak,
        }

    @property
    def pass_flags(self) -> dict[int, bool]:
        flags = {n: True for n in self.n_values}
        for point in self.points:
            if point.error is not None:
                flags[point.n] = False
        for entry in self.entries:
            flags[entry.n] = flags.get(entry.n, True) and entry.passed
        return flags

    @property
    def all_passed(self) -> bool:
        return all(self.pass_flags.values())


class XiInterval(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    value: float


class XiReport(BaseModel):
    """Плотность энергии Xi по единичным интервалам частот и цель 4 pi M."""
    model_config = ConfigDict(frozen=True)

    t: float
    target: float
    measured: float
    rel_err: float
    intervals: list[XiInterval]
    excluded: list[int]
    within_tolerance: bool
