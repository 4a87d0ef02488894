import math
from typing import Any, ClassVar

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator


class RunConfig(BaseModel):
    """
    Общие параметры запуска; ключи плоского файла конфигурации совпадают с именами полей.

    Attributes:
    - out (str): каталог результатов.
    - threads (int): число процессов для независимых заданий.
    - calibration_path (str | None): путь к calibration.yaml.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    list_fields: ClassVar[tuple[str, ...]] = ()

    out: str = "runs"
    threads: int = Field(1, ge=1)
    calibration_path: str | None = None

    @field_validator("*", mode="before")
    @classmethod
    def _split_lists(cls, value: Any, info: ValidationInfo) -> Any:
        if info.field_name in cls.list_fields and isinstance(value, str):
            return [v.strip() for v in value.replace(";", ",").split(",") if v.strip()]
        return value

    def to_flat(self) -> dict[str, str]:
        """Обратное к разбору файла: списки через запятую, числа с 17 значащими цифрами."""
        flat = {}
        for key, value in self.model_dump().items():
            if value is None:
                continue
            if isinstance(value, list):
                flat[key] = ", ".join(_scalar(v) for v in value)
            else:
                flat[key] = _scalar(value)
        return flat


def _scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


class SelfSimilarConfig(RunConfig):
    list_fields: ClassVar[tuple[str, ...]] = ("alphas",)

    alphas: list[float] = [0.25, 0.5, 1.0]
    y_max: float | None = None
    dy: float | None = None
    profile_csv: bool = True


class GrowthScanConfig(RunConfig):
    """
    Сканирование роста: 2N углов в точках -2N+1..2N-1 (N = 1 - два угла в -1, 1).

    single_corner=true заменяет ломаную одним углом в 0 (нулевой тест).
    offwindow_samples случайных частот вне окон берутся из генератора с зерном seed.
    """
    list_fields: ClassVar[tuple[str, ...]] = ("n_values", "m_values")

    theta: float = Field(math.pi / 2, gt=0, le=math.pi)
    N: int = Field(1, ge=1)
    single_corner: bool = False
    n_values: list[int] = [16, 32, 64]
    m_values: list[int] = [1]
    snap_8pi: bool | None = None
    offwindow_samples: int = Field(0, ge=0)
    seed: int = 0


class DirectSimConfig(RunConfig):
    list_fields: ClassVar[tuple[str, ...]] = ("snapshots",)

    theta: float = Field(math.pi / 2, gt=0, le=math.pi)
    N: int = Field(1, ge=1)
    single_corner: bool = False
    L: float = Field(6.0, gt=0)
    h: float = Field(0.01, gt=0)
    mollify_eps: float = Field(0.05, gt=0)
    t_final: float = Field(0.01, ge=0)
    dt: float | None = None
    snapshots: list[float] = []


class XiConfig(RunConfig):
    list_fields: ClassVar[tuple[str, ...]] = ("t_values",)

    theta: float = Field(math.pi / 2, gt=0, le=math.pi)
    N: int = Field(1, ge=1)
    single_corner: bool = False
    t_values: list[float] = [1e-3, 2e-3]
    n: int | None = None


class CompareConfig(RunConfig):
    """Сравнение прямого решения и поля Хасимото в один и тот же момент t."""
    list_fields: ClassVar[tuple[str, ...]] = ("eps_values",)

    theta: float = Field(math.pi / 2, gt=0, le=math.pi)
    N: int = Field(1, ge=1)
    single_corner: bool = True
    t: float = Field(0.01, gt=0)
    eps_values: list[float] = [0.2, 0.1, 0.05]
    L: float = Field(4.0, gt=1)
    h: float | None = None


class CalibrateConfig(RunConfig):
    """Эмпирическая калибровка допустимых tau для угла theta по сетке tau."""
    list_fields: ClassVar[tuple[str, ...]] = ("n_values",)

    theta: float = Field(math.pi / 2, gt=0, lt=math.pi)
    N: int = Field(1, ge=1)
    n_values: list[int] = [16, 32]
    tau_min: float = Field(1e-3, gt=0)
    tau_max: float = Field(2e-2, gt=0)
    tau_points: int = Field(6, ge=2)


class ProducedFile(BaseModel):
    model_config = ConfigDict(frozen=True)

    path: str
    sha256: str
    size: int


class RunManifest(BaseModel):
    """
    Манифест запуска: эхо конфигурации, версия, время, файлы с хешами и итог.

    Attributes:
    - passed (bool | None): итог приёмочной проверки, None - команда без проверки.
    - summary (dict): краткие числа для чтения без разбора отчётов.
    - numerics (dict): численные параметры настроек, влияющие на результат.
    """
    model_config = ConfigDict(frozen=True)

    command: str
    version: str
    run_id: str
    config: dict[str, Any]
    numerics: dict[str, Any] = {}
    started: str
    finished: str
    elapsed_seconds: float
    files: list[ProducedFile]
    passed: bool | None = None
    summary: dict[str, Any] = {}
    error: dict[str, Any] | None = None
