"""Deterministic CSV / JSON writers (17 significant digits, LF line endings)."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(value: Any) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format_float(value)
    if value is None:
        return ""
    if isinstance(value, enum.Enum):
        return str(value.value)
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=",", lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows), encoding="utf-8", newline="\n")
    return path


def _encode(value: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return _encode(value.value, indent, level)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        # Non-finite numbers are not JSON; they travel as strings.
        if not math.isfinite(value):
            return '"' + format_float(value) + '"'
        return format_float(value)
    if isinstance(value, str):
        return _quote(value)
    if isinstance(value, Mapping):
        if not value:
            return "{}"
        items = [f"{pad}{_quote(str(k))}: {_encode(v, indent, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(isinstance(v, (int, float, bool, str)) or v is None for v in value):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in value) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(value, "to_dict"):
        return _encode(value.to_dict(), indent, level)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _quote(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def dumps_json(value: Any, indent: int = 2) -> str:
    """JSON text with insertion-ordered keys and 17-digit floats."""
    return _encode(value, indent, 0) + "\n"


def write_json(path: str | Path, value: Any) -> Path:
    path = Path(path)
    path.write_text(dumps_json(value), encoding="utf-8", newline="\n")
    return path


def parse_float(value: Any) -> float:
    """Inverse of the float encoding used in :func:`dumps_json`."""
    return float(value)
