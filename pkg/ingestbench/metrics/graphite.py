"""Graphite plaintext プロトコルの 1 行を符号化・復号します。
行の形式は `<path> <value> <ts>\n` で、値は往復可能な最短の十進表記にします。
不正な行は MalformedLine として報告し、呼び出し側で数えて捨てられるようにします。
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ingestbench.errors import MalformedLine


def format_value(value: float) -> str:
    value = float(value)
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _check_path(path: str) -> None:
    if not path or not path.isascii() or any(ch.isspace() for ch in path):
        raise MalformedLine(f"invalid metric path: {path!r}")


@dataclass(frozen=True)
class MetricPoint:
    path: str
    value: float
    ts: int

    def __post_init__(self) -> None:
        _check_path(self.path)
        value = float(self.value)
        if not math.isfinite(value):
            raise MalformedLine(f"metric value must be finite: {self.value!r}")
        ts = int(self.ts)
        if not -(2 ** 63) <= ts < 2 ** 63:
            raise MalformedLine(f"timestamp out of range: {self.ts!r}")
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "ts", ts)


def encode_line(point: MetricPoint) -> str:
    return f"{point.path} {format_value(point.value)} {point.ts}\n"


def parse_line(text: str) -> MetricPoint:
    line = text[:-1] if text.endswith("\n") else text
    if line.endswith("\r"):
        line = line[:-1]
    fields = line.split(" ")
    if len(fields) != 3:
        raise MalformedLine(f"expected 3 fields, got {len(fields)}: {text!r}")
    path, raw_value, raw_ts = fields
    try:
        # int() と float() は "_" 区切りや非 ASCII の数字も受け付ける
        if not raw_value.isascii() or "_" in raw_value:
            raise ValueError(raw_value)
        if not (raw_ts.isascii() and raw_ts.lstrip("-").isdigit()):
            raise ValueError(raw_ts)
        value = float(raw_value)
        ts = int(raw_ts)
    except (ValueError, OverflowError) as exc:
        raise MalformedLine(f"non-numeric value or timestamp: {text!r}") from exc
    return MetricPoint(path, value, ts)
