from functools import lru_cache
from pathlib import Path

import yaml
from loguru import logger
from pydantic import ValidationError

from src.core import settings
from src.core.constant import FAIL_IO, SUCCESS_CALIBRATION_SAVED
from src.core.errors import DomainValidationError, InfrastructureError
from src.schemas.calibration import Calibration
from src.utils.io import atomic_write


def read_calibration(path: str | Path | None = None) -> Calibration:
    """
    Читает calibration.yaml (по умолчанию settings.calibration_path) и проверяет схему.
    """
    path = Path(path or settings.calibration_path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError:
        logger.warning(f"Файл {path} не найден, используются пустые калибровки.")
        return Calibration()
    except OSError as exc:
        raise InfrastructureError(FAIL_IO, path=str(path), reason=str(exc)) from exc

    try:
        return Calibration.model_validate(data)
    except ValidationError as exc:
        raise DomainValidationError(str(exc), path=str(path)) from exc


@lru_cache
def load_calibration(path: str | None = None) -> Calibration:
    return read_calibration(path)


def save_calibration(calibration: Calibration, path: str | Path | None = None) -> Path:
    path = atomic_write(
        path or settings.calibration_path,
        yaml.safe_dump(
            calibration.model_dump(mode="json"),
            default_flow_style=False,
            sort_keys=False,
            allow_unicode=True,
        ),
    )
    load_calibration.cache_clear()
    logger.info(f"{SUCCESS_CALIBRATION_SAVED} {path}")
    return path
