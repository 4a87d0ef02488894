from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any, TypeVar

from loguru import logger

from src.core import settings
from src.utils.init_calibration import load_calibration

R = TypeVar("R")


def init_worker(overrides: dict[str, Any]) -> None:
    """
    Переносит настройки родителя в рабочий процесс.

    При spawn/forkserver процесс заново читает окружение, а поправки из
    командной строки (потоки, путь калибровки) живут только в родителе.
    """
    for key, value in overrides.items():
        if getattr(settings, key, None) != value:
            setattr(settings, key, value)
    load_calibration.cache_clear()


def run_jobs(func: Callable[..., R], jobs: Sequence[tuple[Any, ...]], workers: int = 1) -> list[R]:
    """
    Независимые задания в пуле процессов; результаты в порядке подачи.

    При workers <= 1 или одном задании всё считается в текущем процессе.
    """
    if workers <= 1 or len(jobs) <= 1:
        return [func(*args) for args in jobs]
    logger.info(f"dispatching {len(jobs)} jobs to {workers} workers")
    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=init_worker,
        initargs=(settings.model_dump(),),
    ) as ex:
        futures = [ex.submit(func, *args) for args in jobs]
        return [f.result() for f in futures]
