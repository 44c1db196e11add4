"""データ送信側のレコードソースです。
合成データ生成と区切り文字ファイルの読み込みを行い、末尾に達したら先頭へ巻き戻します。
各ソースはレコードサイズの累積和を numpy で持ち、バイト数計算とバッチ詰めを O(1) で行います。
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from ingestbench.constants import (
    DEFAULT_DELIMITER,
    DEFAULT_READ_LATENCY_NS,
    DEFAULT_SEED,
    DEFAULT_SOURCE_RECORDS,
    SYNTHETIC_COLUMNS,
)
from ingestbench.core import Record
from ingestbench.errors import SourceError

IntOrArray = Union[int, np.ndarray]

# 合成レコードの列構成（合計 66 列）
_ID_WIDTH = 9
_WIDE_READINGS = 12
_NARROW_READINGS = 6


class SourceKind(str, Enum):
    SYNTHETIC = "synthetic"
    DELIMITED_FILE = "file"


@dataclass(frozen=True)
class DataSourceSpec:
    kind: SourceKind = SourceKind.SYNTHETIC
    path: Optional[str] = None
    delimiter: str = DEFAULT_DELIMITER
    columns: int = SYNTHETIC_COLUMNS
    seed: int = DEFAULT_SEED
    records: int = DEFAULT_SOURCE_RECORDS
    read_latency_ns: int = DEFAULT_READ_LATENCY_NS

    def __post_init__(self) -> None:
        if self.kind == SourceKind.DELIMITED_FILE and not self.path:
            raise ValueError("file sources need a path")
        if self.read_latency_ns < 0:
            raise ValueError("read_latency_ns must be >= 0")
        if self.records < 1:
            raise ValueError("records must be >= 1")

    @classmethod
    def parse(cls, text: str, **kwargs) -> "DataSourceSpec":
        value = text.strip()
        if value == "synthetic":
            return cls(kind=SourceKind.SYNTHETIC, **kwargs)
        if value.startswith("file:"):
            return cls(kind=SourceKind.DELIMITED_FILE, path=value[len("file:"):].strip(), **kwargs)
        raise ValueError(f"source must be 'synthetic' or 'file:<path>', got {text!r}")


def _synthetic_payloads(seed: int, n: int, columns: int) -> List[bytes]:
    readings = _WIDE_READINGS + _NARROW_READINGS
    flags = columns - 1 - readings
    if flags < 0:
        raise ValueError(f"synthetic records need at least {readings + 1} columns")
    rng = np.random.default_rng(seed)
    wide = rng.integers(0, 100_000, size=(n, _WIDE_READINGS)) / 10.0
    narrow = rng.integers(0, 1_000, size=(n, _NARROW_READINGS)) / 10.0
    bits = rng.integers(0, 2, size=(n, flags))
    base = int(rng.integers(100_000_000, 500_000_000))
    payloads = []
    for i in range(n):
        fields = [f"{(base + i) % 10 ** _ID_WIDTH:0{_ID_WIDTH}d}"]
        fields.extend(f"{v:.1f}" for v in wide[i])
        fields.extend(f"{v:.1f}" for v in narrow[i])
        fields.extend("1" if b else "0" for b in bits[i])
        payloads.append("\t".join(fields).encode("ascii"))
    return payloads


def gen_synthetic(seed: int, n: int, columns: int = SYNTHETIC_COLUMNS) -> List[Record]:
    """Deterministic sensor-like records: one id, numeric readings, boolean flags."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return [Record(payload, create_ts=0) for payload in _synthetic_payloads(seed, n, columns)]


class DataSource:
    """Opened, wrapping record source with prefix sums of record sizes."""

    def __init__(self, sizes: Sequence[int], read_in_ram: bool, read_latency_ns: int):
        if len(sizes) == 0:
            raise SourceError("source holds no records")
        self.sizes = np.asarray(sizes, dtype=np.int64)
        self.prefix = np.concatenate(([0], np.cumsum(self.sizes)))
        self.length = int(self.sizes.size)
        self.total_bytes = int(self.prefix[-1])
        self.read_in_ram = read_in_ram
        self.read_latency_ns = read_latency_ns
        self.position = 0
        self.delimiter = DEFAULT_DELIMITER

    @property
    def per_record_cost_ns(self) -> int:
        return 0 if self.read_in_ram else self.read_latency_ns

    def payload_at(self, index: int) -> bytes:
        raise NotImplementedError

    def size_at(self, index: IntOrArray) -> IntOrArray:
        if isinstance(index, np.ndarray):
            return self.sizes[index % self.length]
        return int(self.sizes[index % self.length])

    def fields_at(self, index: int) -> List[str]:
        return self.payload_at(index).decode("utf-8").split(self.delimiter)

    def cum_bytes(self, index: IntOrArray) -> IntOrArray:
        """Bytes of stream records [0, index) across wraps."""
        if isinstance(index, np.ndarray):
            q, r = np.divmod(index, self.length)
            return q * self.total_bytes + self.prefix[r]
        q, r = divmod(int(index), self.length)
        return q * self.total_bytes + int(self.prefix[r])

    def bytes_between(self, lo: IntOrArray, hi: IntOrArray) -> IntOrArray:
        return self.cum_bytes(hi) - self.cum_bytes(lo)

    def index_at_bytes(self, target: IntOrArray) -> IntOrArray:
        """Largest stream index j with cum_bytes(j) <= target."""
        if isinstance(target, np.ndarray):
            q, r = np.divmod(target, self.total_bytes)
            return q * self.length + np.searchsorted(self.prefix, r, side="right") - 1
        q, r = divmod(int(target), self.total_bytes)
        return q * self.length + int(np.searchsorted(self.prefix, r, side="right")) - 1

    def records_within(self, start: int, budget: int) -> int:
        """How many records from stream index start fit into budget bytes."""
        if budget <= 0:
            return 0
        return int(self.index_at_bytes(self.cum_bytes(start) + budget)) - start

    def close(self) -> None:
        pass


class InMemorySource(DataSource):
    """Whole data set held in memory."""

    def __init__(self, payloads: List[bytes], read_in_ram: bool = True, read_latency_ns: int = 0):
        super().__init__([len(p) for p in payloads], read_in_ram, read_latency_ns)
        self._payloads = payloads

    def payload_at(self, index: int) -> bytes:
        return self._payloads[index % self.length]


class IteratorSource(DataSource):
    """Delimited file read on demand through a line-offset index."""

    def __init__(self, path: Path, offsets: np.ndarray, sizes: np.ndarray, read_latency_ns: int):
        super().__init__(sizes, read_in_ram=False, read_latency_ns=read_latency_ns)
        self.path = path
        self._offsets = offsets
        self._handle = path.open("rb")

    def payload_at(self, index: int) -> bytes:
        i = index % self.length
        self._handle.seek(int(self._offsets[i]))
        return self._handle.read(int(self.sizes[i]))

    def close(self) -> None:
        self._handle.close()


def _index_file(path: Path) -> tuple:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise SourceError(f"cannot read source file {path}: {exc}") from exc
    try:
        data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SourceError(f"source file {path} is not UTF-8: {exc}") from exc
    offsets, sizes, lines = [], [], []
    pos = 0
    for raw in data.split(b"\n"):
        line = raw[:-1] if raw.endswith(b"\r") else raw
        if line.strip():
            offsets.append(pos)
            sizes.append(len(line))
            lines.append(line)
        pos += len(raw) + 1
    if not sizes:
        raise SourceError(f"source file {path} holds no records")
    return np.asarray(offsets, dtype=np.int64), np.asarray(sizes, dtype=np.int64), lines


def open_source(spec: DataSourceSpec, read_in_ram: bool) -> DataSource:
    if spec.kind == SourceKind.SYNTHETIC:
        payloads = _synthetic_payloads(spec.seed, spec.records, spec.columns)
        return InMemorySource(payloads, read_in_ram, spec.read_latency_ns)
    path = Path(spec.path or "")
    offsets, sizes, lines = _index_file(path)
    source: DataSource
    if read_in_ram:
        source = InMemorySource(lines, True, spec.read_latency_ns)
    else:
        source = IteratorSource(path, offsets, sizes, spec.read_latency_ns)
    source.delimiter = spec.delimiter
    return source


def next_record(source: DataSource, now_ns: int = 0) -> Record:
    """Next record of the stream, wrapping to the first after the last."""
    payload = source.payload_at(source.position)
    source.position += 1
    return Record(payload, create_ts=now_ns)
