"""
Командная строка: filament-lab <подкоманда> [--config PATH] [--out DIR] [--threads K]
[--theta F] [--n LIST] [--snap-8pi].

Коды выхода: 0 - успех, 1 - приёмочная проверка не пройдена, 2 - ошибка входных
данных, 3 - инфраструктурная или вычислительная ошибка.
"""
import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from loguru import logger
from pydantic import ValidationError

from src.cli.commands import cli_router
from src.cli.dependencies import apply_settings
from src.cli.router import Command
from src.core import settings
from src.core.constant import FAIL_CONFIG_KEY
from src.core.errors import DomainValidationError, FilamentLabError
from src.core.events import RunContext, create_start_run_handler, create_stop_run_handler, record_error
from src.schemas.run import RunConfig
from src.utils.io import dumps_json, read_flat_config

EXIT_OK = 0
EXIT_ACCEPTANCE = 1
ERROR_NAME = "error.json"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="filament-lab", description=__doc__.splitlines()[1])
    sub = parser.add_subparsers(dest="command", required=True)
    for command in cli_router.commands.values():
        p = sub.add_parser(command.name, help=command.summary)
        p.add_argument("--config", type=Path, help="файл key = value")
        p.add_argument("--out", type=str, help="каталог результатов")
        p.add_argument("--threads", type=int, help="число процессов")
        p.add_argument("--theta", type=float, help="угол, рад")
        p.add_argument("--n", type=str, help="список n через запятую")
        p.add_argument("--snap-8pi", action="store_true", default=None, help="1/t в 8 pi Z")
    return parser


def resolve_config(command: Command, args: argparse.Namespace) -> RunConfig:
    """Файл конфигурации, затем флаги командной строки поверх него."""
    values: dict[str, Any] = read_flat_config(args.config) if args.config else {}
    if args.out is not None:
        values["out"] = args.out
    if args.threads is not None:
        values["threads"] = args.threads
    flag_values = {"theta": args.theta, "snap_8pi": args.snap_8pi}
    if args.n is not None:
        flag_values["n_values" if "n_values" in command.flags else "n"] = args.n
    for key, value in flag_values.items():
        if value is None:
            continue
        if key not in command.flags:
            raise DomainValidationError(FAIL_CONFIG_KEY, key=key, command=command.name)
        values[key] = value
    try:
        return command.config_model.model_validate(values)
    except ValidationError as exc:
        unknown = [e["loc"][0] for e in exc.errors() if e["type"] == "extra_forbidden"]
        if unknown:
            raise DomainValidationError(FAIL_CONFIG_KEY, keys=unknown) from exc
        raise DomainValidationError(str(exc), command=command.name) from exc


def _emit_error(exc: FilamentLabError, out_dir: Path | None = None) -> None:
    text = json.dumps(exc.to_dict(), ensure_ascii=False, default=str)
    sys.stdout.write(text + "\n")
    if out_dir is not None:
        try:
            (out_dir / ERROR_NAME).write_text(text + "\n", encoding="utf-8")
        except OSError:
            logger.exception("error report could not be written")


def run_command(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    command = cli_router.commands[args.command]
    try:
        config = resolve_config(command, args)
        apply_settings(config)
    except FilamentLabError as exc:
        _emit_error(exc)
        return exc.exit_code

    context = RunContext(command.name, config, Path(config.out))
    code = EXIT_OK
    try:
        create_start_run_handler(context, settings)()
        command.handler(config, context)
        if context.passed is False:
            code = EXIT_ACCEPTANCE
    except FilamentLabError as exc:
        log = logger.exception if settings.debug else logger.error
        log(f"{command.name}: {exc.message} {dumps_json(exc.details).strip()}")
        record_error(context, exc)
        _emit_error(exc, context.out_dir)
        code = exc.exit_code
    try:
        create_stop_run_handler(context, settings)()
    except FilamentLabError as exc:
        _emit_error(exc)
        code = exc.exit_code
    return code
