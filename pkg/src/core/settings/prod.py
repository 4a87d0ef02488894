import logging
import os

from src.core.settings.app import AppSettings


class ProdAppSettings(AppSettings):
    debug: bool = False
    title: str = "filament-lab"

    workers: int = max(1, (os.cpu_count() or 2) - 1)
    logging_level: int = logging.INFO
