"""Запись отчётов: JSON и CSV с атомарной заменой файла, SHA-256, плоские конфигурации."""
import csv
import hashlib
import io
import json
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from src.core import settings
from src.core.constant import FAIL_CONFIG_LINE, FAIL_IO
from src.core.errors import DomainValidationError, InfrastructureError
from src.schemas.run import ProducedFile

HASH_CHUNK = 1 << 20


def _plain(obj: Any) -> Any:
    """Приведение к типам json: модели pydantic, массивы и скаляры numpy."""
    if isinstance(obj, BaseModel):
        return _plain(obj.model_dump(mode="json", by_alias=True))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def format_float(value: float) -> str:
    return format(float(value), f".{settings.float_digits}g")


def atomic_write(path: str | Path, text: str) -> Path:
    """Запись во временный файл того же каталога и os.replace поверх цели."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise InfrastructureError(FAIL_IO, path=str(path), reason=str(exc)) from exc
    return path


def dumps_json(data: Any) -> str:
    """
    JSON с числами в кратчайшей форме, однозначно восстанавливающей float
    (не длиннее 17 значащих цифр).
    """
    return json.dumps(_plain(data), indent=2, ensure_ascii=False) + "\n"


def write_json(path: str | Path, data: Any) -> Path:
    return atomic_write(path, dumps_json(data))


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """CSV; вещественные числа с float_digits значащими цифрами."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [format_float(v) if isinstance(v, (float, np.floating)) else v for v in row]
        )
    return atomic_write(path, buffer.getvalue())


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(HASH_CHUNK), b""):
                digest.update(chunk)
    except OSError as exc:
        raise InfrastructureError(FAIL_IO, path=str(path), reason=str(exc)) from exc
    return digest.hexdigest()


def produced_file(path: Path, root: Path) -> ProducedFile:
    return ProducedFile(
        path=str(path.relative_to(root)),
        sha256=sha256_file(path),
        size=path.stat().st_size,
    )


def parse_flat_config(text: str) -> dict[str, str]:
    """
    Разбор `key = value` построчно; `#` начинает комментарий, пустые строки пропускаются.
    """
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise DomainValidationError(FAIL_CONFIG_LINE, line=number, text=raw)
        values[key.strip()] = value.strip()
    return values


def read_flat_config(path: str | Path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InfrastructureError(FAIL_IO, path=str(path), reason=str(exc)) from exc
    return parse_flat_config(text)


def dump_flat_config(values: dict[str, str]) -> str:
    return "".join(f"{key} = {value}\n" for key, value in values.items())
