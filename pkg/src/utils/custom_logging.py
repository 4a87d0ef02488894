import json
import logging
import sys
from logging import LogRecord
from pathlib import Path

from loguru import logger


class InterceptHandler(logging.Handler):
    """Перенаправляет записи стандартного logging (scipy, numpy, warnings) в loguru."""
    loglevel_mapping = {
        50: "CRITICAL",
        40: "ERROR",
        30: "WARNING",
        20: "INFO",
        10: "DEBUG",
        0: "NOTSET",
    }

    def emit(self, record: LogRecord) -> None:
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = self.loglevel_mapping[record.levelno]

        frame, depth = logging.currentframe(), 2
        while frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


class CustomizeLogger:
    @classmethod
    def make_logger(
        cls,
        config_path: Path,
        run_id: str = "-",
        level: str | None = None,
        log_dir: Path | None = None,
    ) -> "logger":
        """
        Настройка loguru по logging_conf.json: stdout и файл с ротацией.

        Возвращаемый логгер привязан к run_id.
        """
        config = cls.load_logging_config(config_path)
        logging_config = config.get("logger")
        directory = log_dir or Path(logging_config.get("path"))
        return cls.customize_logging(
            directory / logging_config.get("filename"),
            level=level or logging_config.get("level"),
            retention=logging_config.get("retention"),
            rotation=logging_config.get("rotation"),
            format=logging_config.get("format"),
            run_id=run_id,
        )

    @classmethod
    def customize_logging(
            cls,
            filepath: Path,
            level: str,
            rotation: str,
            retention: str,
            format: str,
            run_id: str = "-",
    ) -> "logger":
        logger.remove()
        logger.configure(extra={"run_id": run_id})
        logger.add(
            sys.stderr,
            backtrace=True,
            level=level.upper(),
            format=format,
        )
        logger.add(
            str(filepath),
            rotation=rotation,
            retention=retention,
            backtrace=True,
            level=level.upper(),
            format=format,
        )
        logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
        logging.captureWarnings(True)

        return logger.bind(run_id=run_id)

    @classmethod
    def load_logging_config(cls, config_path: str | Path) -> dict:
        with open(config_path) as config_file:
            return json.load(config_file)
