import logging
import time
import uuid
from collections.abc import Callable
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from loguru import logger

from src.core.constant import SUCCESS_MANIFEST_WRITTEN, SUCCESS_RUN_FINISHED
from src.core.errors import FilamentLabError
from src.core.settings.app import AppSettings
from src.schemas.run import RunConfig, RunManifest
from src.utils.custom_logging import CustomizeLogger
from src.utils.io import produced_file, write_json

config_path = Path(__file__).resolve().parent.parent / "logging_conf.json"

MANIFEST_NAME = "manifest.json"


class RunContext:
    """
    Состояние одного запуска CLI.

    Attributes:
    - command (str): имя подкоманды.
    - out_dir (Path): каталог результатов.
    - run_id (str): короткий идентификатор для логов.
    - files (list[Path]): созданные файлы, попадут в манифест.
    """

    def __init__(self, command: str, config: RunConfig, out_dir: Path) -> None:
        self.command = command
        self.config = config
        self.out_dir = out_dir
        self.run_id = uuid.uuid4().hex[:8]
        self.files: list[Path] = []
        self.passed: bool | None = None
        self.summary: dict[str, Any] = {}
        self.error: dict[str, Any] | None = None
        self.started = datetime.now(timezone.utc)
        self._clock = time.perf_counter()

    def produced(self, path: Path) -> Path:
        self.files.append(path)
        return path


def create_start_run_handler(context: RunContext, settings: AppSettings) -> Callable[[], None]:
    def start_run() -> None:
        context.out_dir.mkdir(parents=True, exist_ok=True)
        CustomizeLogger.make_logger(
            config_path,
            run_id=context.run_id,
            level=logging.getLevelName(settings.logging_level),
            log_dir=context.out_dir,
        )
        logger.info(f"{settings.title} {settings.version} {context.command}: run {context.run_id} -> {context.out_dir}")

    return start_run


def create_stop_run_handler(context: RunContext, settings: AppSettings) -> Callable[[], Path]:
    def stop_run() -> Path:
        """Манифест пишется последним: в нём хеши всех созданных файлов."""
        finished = datetime.now(timezone.utc)
        manifest = RunManifest(
            command=context.command,
            version=settings.version,
            run_id=context.run_id,
            config=context.config.to_flat(),
            numerics=settings.numerics_kwargs,
            started=context.started.isoformat(),
            finished=finished.isoformat(),
            elapsed_seconds=time.perf_counter() - context._clock,
            files=[produced_file(p, context.out_dir) for p in context.files if p.exists()],
            passed=context.passed,
            summary=context.summary,
            error=context.error,
        )
        path = write_json(context.out_dir / MANIFEST_NAME, manifest)
        logger.info(f"{SUCCESS_MANIFEST_WRITTEN} {path}")
        if context.error is None:
            logger.info(SUCCESS_RUN_FINISHED)
        return path

    return stop_run


def record_error(context: RunContext, exc: FilamentLabError) -> None:
    context.error = exc.to_dict()
