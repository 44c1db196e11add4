"""プロデューサのバッチ詰めを担当します。
レコードを 1 件ずつ追加する try_add と、巻き戻るソース全体のバッチ境界を前計算する BatchPlan を持ちます。
どちらも「入らなければ封をして次のバッチを始める」同じ規則に従います。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple

import numpy as np

from ingestbench.core import Record


class AddResult(str, Enum):
    ADDED = "Added"
    SEALED = "Sealed"


@dataclass
class Batch:
    batch_size_bytes: int
    target: Tuple[str, int]
    records: List[Record] = field(default_factory=list)
    bytes: int = 0
    sealed: bool = False

    def __len__(self) -> int:
        return len(self.records)


def try_add(batch: Batch, record: Record) -> AddResult:
    """Add record to batch, or seal the batch when it would overflow.

    On SEALED the record was not taken, except for an oversize record reaching an
    empty batch: it becomes the single member of the sealed batch.
    """
    if batch.sealed:
        raise ValueError("cannot add to a sealed batch")
    if batch.bytes + record.size_bytes <= batch.batch_size_bytes:
        batch.records.append(record)
        batch.bytes += record.size_bytes
        return AddResult.ADDED
    if not batch.records:
        batch.records.append(record)
        batch.bytes = record.size_bytes
    batch.sealed = True
    return AddResult.SEALED


class BatchPlan:
    """Batch boundaries of a wrapping record stream under the try_add rule.

    Boundaries only depend on record sizes, so the walk from an origin through the
    source residues is eventually periodic and can be indexed in O(log n).
    """

    def __init__(self, source, batch_size_bytes: int, origin: int = 0):
        self.source = source
        self.batch_size_bytes = batch_size_bytes
        starts = np.arange(source.length, dtype=np.int64)
        fit = source.index_at_bytes(source.cum_bytes(starts) + batch_size_bytes) - starts
        self._batch_len = np.maximum(fit, 1)
        self.anchor(origin)

    def anchor(self, origin: int) -> None:
        length = self.source.length
        seen: Dict[int, int] = {}
        bounds = [origin]
        pos = origin
        while pos % length not in seen:
            seen[pos % length] = len(bounds) - 1
            pos += int(self._batch_len[pos % length])
            bounds.append(pos)
        self.origin = origin
        self._bounds = np.asarray(bounds, dtype=np.int64)
        self._mu = seen[pos % length]
        self._period = len(bounds) - 1 - self._mu
        self._advance = int(self._bounds[-1] - self._bounds[self._mu])

    def boundary(self, j):
        """Stream index where batch j (counted from the origin) starts."""
        j = np.asarray(j, dtype=np.int64)
        head = self._bounds[np.minimum(j, self._mu)]
        q, r = np.divmod(np.maximum(j - self._mu, 0), self._period)
        periodic = self._bounds[self._mu + r] + q * self._advance
        out = np.where(j < self._mu, head, periodic)
        return int(out) if out.ndim == 0 else out

    def batch_index(self, x: int) -> int:
        """Index of the batch holding stream index x (x >= origin)."""
        mu_start = int(self._bounds[self._mu])
        if x < mu_start:
            return int(np.searchsorted(self._bounds[: self._mu + 1], x, side="right")) - 1
        q, rest = divmod(x - mu_start, self._advance)
        cycle = self._bounds[self._mu : self._mu + self._period + 1] - mu_start
        r = int(np.searchsorted(cycle, rest, side="right")) - 1
        return self._mu + q * self._period + r

    def is_oversize(self, j) -> np.ndarray:
        lo = self.boundary(j)
        return (self.boundary(np.asarray(j) + 1) - lo == 1) & (
            self.source.size_at(np.asarray(lo)) > self.batch_size_bytes
        )
