import logging

from src.core.settings.app import AppSettings


class DevAppSettings(AppSettings):
    debug: bool = True
    title: str = "filament-lab (dev)"

    workers: int = 1
    logging_level: int = logging.DEBUG
