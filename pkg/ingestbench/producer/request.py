"""ブローカへ送るリクエストの単位を定義します。
RequestGroup は 1 パーティション宛てにまとめて送り出した封済みバッチの配列を持ち、
Span はその連続した一部分としてネットワークとディスクの FIFO を流れていきます。
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Dict, List, Optional, Sequence

import numpy as np

from ingestbench.core import Record

if TYPE_CHECKING:
    from ingestbench.producer.client import DeliveryReceipt, Producer


class RequestGroup:
    """Sealed batches for one partition handed to one connection together."""

    def __init__(
        self,
        producer: "Producer",
        partition: int,
        sizes: np.ndarray,
        counts: np.ndarray,
        enqueued_at: np.ndarray,
        first_index: Optional[np.ndarray] = None,
        records: Optional[List[List[Record]]] = None,
        receipts: Optional[List[List["DeliveryReceipt"]]] = None,
    ):
        self.producer = producer
        self.partition = partition
        self.sizes = np.asarray(sizes, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)
        self.enqueued_at = np.asarray(enqueued_at, dtype=np.float64)
        self.first_index = first_index
        self.records = records
        self.receipts = receipts
        self.broker_id = 0
        self.route: List = []
        n = self.sizes.size
        self.appended_at = np.full(n, np.nan)
        self.base_offsets = np.full(n, -1, dtype=np.int64)
        self.replica_done_at: Dict[int, np.ndarray] = {}
        self.replica_done: Dict[int, int] = {}
        self.leader_done = 0
        self.acked = 0

    def __len__(self) -> int:
        return int(self.sizes.size)

    def records_of(self, batch: int) -> Sequence[Record]:
        if self.records is not None:
            return self.records[batch]
        assert self.first_index is not None
        return self.producer.stream_records(int(self.first_index[batch]), int(self.counts[batch]))

    def span(self) -> "Span":
        return Span(self, 0, len(self), self.enqueued_at.copy())


class Span:
    """Contiguous batches [lo, hi) of a group with their ready times at one stage."""

    __slots__ = ("group", "lo", "hi", "ready")

    def __init__(self, group: RequestGroup, lo: int, hi: int, ready: np.ndarray):
        self.group = group
        self.lo = lo
        self.hi = hi
        self.ready = ready

    def __len__(self) -> int:
        return self.hi - self.lo

    @property
    def sizes(self) -> np.ndarray:
        return self.group.sizes[self.lo : self.hi]

    @property
    def counts(self) -> np.ndarray:
        return self.group.counts[self.lo : self.hi]

    @property
    def nbytes(self) -> int:
        return int(self.sizes.sum())

    def head(self, k: int, ready: np.ndarray) -> "Span":
        return Span(self.group, self.lo, self.lo + k, ready)

    def tail(self, k: int) -> "Span":
        return Span(self.group, self.lo + k, self.hi, self.ready[k:])
