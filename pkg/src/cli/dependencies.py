from src.core import settings
from src.schemas.geometry import PolyLine
from src.schemas.run import RunConfig
from src.services.geometry import build_polyline, corners_from_angle, symmetric_positions
from src.utils.init_calibration import load_calibration


def apply_settings(config: RunConfig) -> None:
    """Переносит общие поля запуска в настройки процесса."""
    settings.workers = config.threads
    if config.calibration_path:
        settings.calibration_path = config.calibration_path
        load_calibration.cache_clear()


def polyline_from_config(theta: float, N: int, single_corner: bool = False) -> PolyLine:
    """Один угол в 0 либо 2N углов в -2N+1, ..., 2N-1, все раствора theta."""
    positions = [0] if single_corner else symmetric_positions(N)
    return build_polyline(corners_from_angle(theta, positions))
