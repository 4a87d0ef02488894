from typing import Any


class FilamentLabError(Exception):
    """
    Базовая ошибка лаборатории.

    Attributes:
    - message (str): текст из src.core.constant.
    - exit_code (int): код выхода CLI (2 - валидация, 3 - инфраструктура).
    - details (dict): машиночитаемые подробности для error JSON.
    """

    exit_code: int = 3

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "details": self.details,
        }


class DomainValidationError(FilamentLabError, ValueError):
    exit_code = 2


class AdmissibilityError(DomainValidationError):
    def __init__(self, message: str, required_n: int | None = None, **details: Any) -> None:
        super().__init__(message, required_n=required_n, **details)
        self.required_n = required_n


class RefinementError(DomainValidationError):
    def __init__(self, message: str, suggested_step: float | None = None, **details: Any) -> None:
        super().__init__(message, suggested_step=suggested_step, **details)
        self.suggested_step = suggested_step


class ConvergenceError(FilamentLabError, ArithmeticError):
    exit_code = 3


class InfrastructureError(FilamentLabError, OSError):
    exit_code = 3
