from collections.abc import Callable
from dataclasses import dataclass, field

from src.core.events import RunContext
from src.schemas.run import RunConfig


@dataclass(frozen=True)
class Command:
    """
    Подкоманда CLI.

    Attributes:
    - name (str): имя в командной строке.
    - config_model (type[RunConfig]): схема плоской конфигурации.
    - handler (Callable): выполняет расчёт, пишет файлы через context.
    - summary (str): строка справки.
    - flags (tuple[str, ...]): какие общие флаги переопределяют поля конфигурации.
    """
    name: str
    config_model: type[RunConfig]
    handler: Callable[[RunConfig, RunContext], None]
    summary: str = ""
    flags: tuple[str, ...] = field(default_factory=tuple)


class CommandRouter:
    def __init__(self) -> None:
        self.commands: dict[str, Command] = {}

    def command(
        self,
        name: str,
        config_model: type[RunConfig],
        summary: str = "",
        flags: tuple[str, ...] = (),
    ) -> Callable[[Callable[[RunConfig, RunContext], None]], Callable[[RunConfig, RunContext], None]]:
        def decorator(handler: Callable[[RunConfig, RunContext], None]) -> Callable[[RunConfig, RunContext], None]:
            self.commands[name] = Command(name, config_model, handler, summary, flags)
            return handler

        return decorator

    def include_router(self, other: "CommandRouter") -> None:
        self.commands.update(other.commands)
