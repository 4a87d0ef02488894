from pydantic import BaseModel, ConfigDict, Field


class CalibrationEntry(BaseModel):
    """
    Эмпирические константы допустимых времён для одного угла.

    Attributes:
    - theta (float): угол, рад.
    - corners (int): число углов ломаной (2 или 2N).
    - t_theta (float): верхняя граница tau = t n^2.
    - t_tilde_theta (float): нижняя граница tau log^2 n.
    - n_theta (int): наименьшее n, с которого полоса устойчива.
    - c_lower, c_upper (float): константы условия на sqrt(tau).
    """
    model_config = ConfigDict(frozen=True)

    theta: float = Field(gt=0)
    corners: int = Field(2, ge=1)
    t_theta: float = Field(gt=0, lt=1)
    t_tilde_theta: float = Field(gt=0, lt=1)
    n_theta: int = Field(ge=2)
    c_lower: float = Field(gt=0)
    c_upper: float = Field(gt=0)


class Tolerances(BaseModel):
    model_config = ConfigDict(frozen=True)

    slope_rel: float = 0.35
    xi_rel: float = 0.25
    offwindow_ratio: float = 2.0
    lemma_shrink: float = 1.5
    angle_abs: float = 5e-3
    two_grid_rel: float = 1e-3


class Calibration(BaseModel):
    model_config = ConfigDict(frozen=True)

    tolerances: Tolerances = Tolerances()
    entries: list[CalibrationEntry] = []

    def for_corners(self, corners: int) -> list[CalibrationEntry]:
        """Записи для данного числа углов; при их отсутствии - записи для двух углов."""
        own = [e for e in self.entries if e.corners == corners]
        chosen = own or [e for e in self.entries if e.corners == 2]
        return sorted(chosen, key=lambda e: e.theta)
