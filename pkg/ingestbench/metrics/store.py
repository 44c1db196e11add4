"""固定解像度・固定保持数の時系列ストアです。
パスごとに numpy のリングバッファを持ち、タイムスタンプを 5 秒グリッドに揃えて格納します。
同じスロットへの書き込みは上書きになり、保持数を超えた古い点は読み出し時に除外されます。
"""

from __future__ import annotations

import fnmatch
import threading
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ingestbench.constants import SERIES_RETENTION, TICK_INTERVAL_S
from ingestbench.errors import UnknownSeries
from ingestbench.metrics.graphite import MetricPoint

_EMPTY = np.iinfo(np.int64).min


def match_path(pattern: str, path: str) -> bool:
    """Graphite globbing: wildcards never cross a dot."""
    wanted = pattern.split(".")
    parts = path.split(".")
    return len(parts) == len(wanted) and all(
        fnmatch.fnmatchcase(part, glob) for part, glob in zip(parts, wanted)
    )


class _Ring:
    """Whisper-style archive: slot = (ts // step) mod retention."""

    def __init__(self, retention: int, step: int):
        self.retention = retention
        self.step = step
        self.ts = np.full(retention, _EMPTY, dtype=np.int64)
        self.values = np.zeros(retention, dtype=np.float64)
        self.latest: Optional[int] = None

    def put(self, ts: int, value: float) -> None:
        aligned = ts - ts % self.step
        if self.latest is not None and aligned <= self.latest - self.retention * self.step:
            # 保持期間より古い点は捨てる
            return
        slot = (aligned // self.step) % self.retention
        self.ts[slot] = aligned
        self.values[slot] = value
        if self.latest is None or aligned > self.latest:
            self.latest = aligned

    def window(self, t0: Optional[int], t1: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
        if self.latest is None:
            return np.empty(0, dtype=np.int64), np.empty(0)
        oldest = self.latest - (self.retention - 1) * self.step
        lo = oldest if t0 is None else max(oldest, t0)
        hi = self.latest if t1 is None else t1
        mask = (self.ts >= lo) & (self.ts <= hi)
        ts = self.ts[mask]
        order = np.argsort(ts, kind="stable")
        return ts[order], self.values[mask][order]


class SeriesStore:
    """Per-path rings of (ts, value) at a fixed resolution."""

    def __init__(self, retention: int = SERIES_RETENTION, step_s: int = TICK_INTERVAL_S):
        if retention < 1 or step_s < 1:
            raise ValueError("retention and step must be >= 1")
        self.retention = retention
        self.step_s = step_s
        self._rings: Dict[str, _Ring] = {}
        self._lock = threading.Lock()

    def __contains__(self, path: str) -> bool:
        return path in self._rings

    def put(self, path: str, ts: int, value: float) -> None:
        self.ingest(MetricPoint(path, value, ts))

    def ingest(self, point: MetricPoint) -> None:
        with self._lock:
            ring = self._rings.get(point.path)
            if ring is None:
                ring = _Ring(self.retention, self.step_s)
                self._rings[point.path] = ring
            ring.put(point.ts, point.value)

    def ingest_many(self, points: Iterable[MetricPoint]) -> None:
        for point in points:
            self.ingest(point)

    def paths(self) -> List[str]:
        return sorted(self._rings)

    def find(self, pattern: str) -> List[str]:
        return [path for path in self.paths() if match_path(pattern, path)]

    def points(self, path: str, t0: Optional[int] = None, t1: Optional[int] = None) -> List[Tuple[int, float]]:
        ring = self._rings.get(path)
        if ring is None:
            raise UnknownSeries(f"unknown series: {path}")
        with self._lock:
            ts, values = ring.window(t0, t1)
        return [(int(t), float(v)) for t, v in zip(ts, values)]

    def last(self, path: str) -> Optional[Tuple[int, float]]:
        pts = self.points(path)
        return pts[-1] if pts else None
