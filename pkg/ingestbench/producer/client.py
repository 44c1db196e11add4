"""プロデューサ本体です。
バッファ確保、バッチ詰め、パーティション選択、接続への送り出し、確認応答によるバッファ解放を扱います。
1 件ずつの send と、送信スレッドが使う一括送信 send_run の両方が同じ封の規則に従います。
"""

from __future__ import annotations

import bisect
import heapq
import logging
from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING, Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ingestbench.core import Acks, Locality, ProducerProps, Record
from ingestbench.errors import ProducerClosed
from ingestbench.producer.batch import AddResult, Batch, BatchPlan, try_add
from ingestbench.producer.buffer import BufferAccount
from ingestbench.producer.request import RequestGroup

if TYPE_CHECKING:
    from ingestbench.brokersim.topics import TopicHandle
    from ingestbench.loadgen.schedule import SendWindow
    from ingestbench.loadgen.sources import DataSource

logger = logging.getLogger(__name__)


@dataclass
class DeliveryReceipt:
    record: Record
    partition: int
    enqueued_at: Optional[float] = None
    resolved_at: Optional[float] = None
    offset: Optional[int] = None

    @property
    def done(self) -> bool:
        return self.resolved_at is not None


@dataclass
class _Sealed:
    """Sealed, not yet dispatched batches of one partition."""

    sizes: np.ndarray
    counts: np.ndarray
    seal_at: np.ndarray
    first_index: Optional[np.ndarray] = None
    records: Optional[List[List[Record]]] = None
    receipts: Optional[List[List[DeliveryReceipt]]] = None

    def __len__(self) -> int:
        return int(self.sizes.size)

    def split(self, k: int) -> Tuple["_Sealed", "_Sealed"]:
        def cut(values, a, b):
            return None if values is None else values[a:b]

        head = _Sealed(self.sizes[:k], self.counts[:k], self.seal_at[:k],
                       cut(self.first_index, 0, k), cut(self.records, 0, k), cut(self.receipts, 0, k))
        tail = _Sealed(self.sizes[k:], self.counts[k:], self.seal_at[k:],
                       cut(self.first_index, k, None), cut(self.records, k, None), cut(self.receipts, k, None))
        return head, tail


class Producer:
    """Client producer owned by exactly one sender."""

    def __init__(
        self,
        engine,
        topic: "TopicHandle",
        props: ProducerProps,
        locality: Locality,
        producer_id: int,
        host: str,
    ):
        self.engine = engine
        self.cluster = engine.cluster
        self.topic = topic
        self.props = props
        self.locality = locality
        self.producer_id = producer_id
        self.host = host
        self.buffer = BufferAccount(props.buffer_memory_bytes)
        self.closed = False

        self.records_sent = 0
        self.bytes_sent = 0
        self.batches_dispatched = 0
        self.batches_completed = 0
        self.last_release_at = 0.0

        self._open_batch: Optional[Batch] = None
        self._open_receipts: List[DeliveryReceipt] = []
        self._rr = 0

        self.source: Optional["DataSource"] = None
        self.plan: Optional[BatchPlan] = None
        self._pos = 0
        self._open_lo = 0
        self._rr_base = 0
        self._ledger_lo: List[int] = []
        self._ledger: List["SendWindow"] = []

        self._accumulator: Dict[int, Deque[_Sealed]] = {}
        self._in_flight = 0
        self._pending_release: List[Tuple[float, int, int]] = []
        self._release_seq = 0

    # ------------------------------------------------------------------
    # 状態
    # ------------------------------------------------------------------
    @property
    def has_open_records(self) -> bool:
        return bool(self._open_batch and self._open_batch.records) or self._pos > self._open_lo

    @property
    def undispatched(self) -> int:
        return sum(len(chunk) for queue in self._accumulator.values() for chunk in queue)

    @property
    def idle(self) -> bool:
        return (
            not self.has_open_records
            and self.undispatched == 0
            and self._in_flight == 0
            and not self._pending_release
        )

    def _partition_count(self) -> int:
        return self.topic.config.partitions

    # ------------------------------------------------------------------
    # 1 件ずつの送信
    # ------------------------------------------------------------------
    def send(self, record: Record) -> DeliveryReceipt:
        if self.closed:
            raise ProducerClosed(f"producer {self.producer_id} is closed")
        self.buffer.check_fits(record.size_bytes)
        while not self.buffer.can_reserve(record.size_bytes):
            self.seal_if_exhausted()
            self.engine.step()
        self.buffer.reserve(record.size_bytes)
        self.records_sent += 1
        self.bytes_sent += record.size_bytes
        now = float(self.engine.now)

        if self._open_batch is None:
            self._open_batch = self._new_batch()
        batch = self._open_batch
        receipt = DeliveryReceipt(record, batch.target[1])
        result = try_add(batch, record)
        if result is AddResult.ADDED:
            self._open_receipts.append(receipt)
            return receipt
        if batch.records[-1] is record:
            # 容量超えのレコードが空のバッチに入った
            self._open_receipts.append(receipt)
            self._seal_open_batch(now)
            return receipt
        self._seal_open_batch(now)
        batch = self._open_batch = self._new_batch()
        receipt.partition = batch.target[1]
        self._open_receipts.append(receipt)
        if try_add(batch, record) is AddResult.SEALED:
            self._seal_open_batch(now)
        return receipt

    def _new_batch(self) -> Batch:
        partition = self._rr % self._partition_count()
        self._rr += 1
        return Batch(self.props.batch_size_bytes, (self.topic.config.name, partition))

    def _seal_open_batch(self, now: float) -> None:
        batch = self._open_batch
        if batch is None or not batch.records:
            self._open_batch = None
            return
        batch.sealed = True
        self._enqueue_sealed(batch.target[1], _Sealed(
            sizes=np.array([batch.bytes], dtype=np.int64),
            counts=np.array([len(batch.records)], dtype=np.int64),
            seal_at=np.array([now]),
            records=[list(batch.records)],
            receipts=[list(self._open_receipts)],
        ))
        self._open_batch = None
        self._open_receipts = []

    # ------------------------------------------------------------------
    # ソースからの一括送信
    # ------------------------------------------------------------------
    def attach_source(self, source: "DataSource") -> None:
        self.buffer.check_fits(int(source.sizes.max()))
        self.source = source
        self.plan = BatchPlan(source, self.props.batch_size_bytes, origin=self._pos)
        self._open_lo = self._pos

    def records_that_fit(self, wanted: int) -> int:
        if wanted <= 0 or self.source is None:
            return 0
        return min(self.source.records_within(self._pos, self.buffer.free), wanted)

    def send_run(self, count: int, window: "SendWindow") -> None:
        """Send the next `count` stream records at the execution times of window."""
        if self.closed:
            raise ProducerClosed(f"producer {self.producer_id} is closed")
        if count <= 0:
            return
        assert self.source is not None and self.plan is not None
        pos, new_pos = self._pos, self._pos + count
        nbytes = int(self.source.bytes_between(pos, new_pos))
        self.buffer.in_use += nbytes
        self.records_sent += count
        self.bytes_sent += nbytes
        self._ledger_lo.append(pos)
        self._ledger.append(window)
        self._pos = new_pos

        plan = self.plan
        j_open = plan.batch_index(self._open_lo)
        j_last = plan.batch_index(new_pos - 1)
        j_end = j_last + (1 if bool(plan.is_oversize(j_last)) else 0)
        if j_end <= j_open:
            return
        js = np.arange(j_open, j_end, dtype=np.int64)
        lo = plan.boundary(js)
        hi = plan.boundary(js + 1)
        seal_idx = np.where(plan.is_oversize(js), lo, hi)
        seal_at = np.asarray(window.time_of(seal_idx - pos), dtype=np.float64)
        sizes = self.source.bytes_between(lo, hi)
        partitions = (self._rr_base + js) % self._partition_count()
        for partition in np.unique(partitions):
            mask = partitions == partition
            self._enqueue_sealed(int(partition), _Sealed(
                sizes=sizes[mask], counts=(hi - lo)[mask], seal_at=seal_at[mask], first_index=lo[mask],
            ))
        self._open_lo = int(plan.boundary(j_end))

    def _seal_open_stream(self, now: float) -> None:
        if self.plan is None or self._pos <= self._open_lo:
            return
        assert self.source is not None
        j_open = self.plan.batch_index(self._open_lo)
        partition = (self._rr_base + j_open) % self._partition_count()
        self._enqueue_sealed(partition, _Sealed(
            sizes=np.array([self.source.bytes_between(self._open_lo, self._pos)], dtype=np.int64),
            counts=np.array([self._pos - self._open_lo], dtype=np.int64),
            seal_at=np.array([now]),
            first_index=np.array([self._open_lo], dtype=np.int64),
        ))
        self._rr_base += j_open + 1
        self._open_lo = self._pos
        self.plan.anchor(self._pos)

    def create_time(self, index: int) -> int:
        i = bisect.bisect_right(self._ledger_lo, index) - 1
        if i < 0:
            raise IndexError(f"stream index {index} was never sent")
        return int(round(self._ledger[i].time_of(index - self._ledger_lo[i])))

    def stream_records(self, first: int, count: int) -> List[Record]:
        assert self.source is not None
        return [
            Record(self.source.payload_at(x), create_ts=self.create_time(x))
            for x in range(first, first + count)
        ]

    # ------------------------------------------------------------------
    # 送り出しと確認応答
    # ------------------------------------------------------------------
    def _enqueue_sealed(self, partition: int, chunk: _Sealed) -> None:
        self._accumulator.setdefault(partition, deque()).append(chunk)

    def dispatch(self, now: float) -> int:
        """Move sealed batches into connection socket buffers while they have room."""
        dispatched = 0
        for partition in sorted(self._accumulator):
            queue = self._accumulator[partition]
            broker_id = self.topic.leader_of(partition)
            while queue:
                chunk = queue[0]
                room = self.cluster.connection_room(self, broker_id)
                k = int(np.searchsorted(np.cumsum(chunk.sizes), room, side="right"))
                if k == 0 and self.cluster.connection_unsent(self, broker_id) == 0:
                    k = 1
                if k == 0:
                    break
                if k < len(chunk):
                    chunk, queue[0] = chunk.split(k)
                else:
                    queue.popleft()
                self._submit(partition, broker_id, chunk, now)
                dispatched += len(chunk)
        self._accumulator = {p: q for p, q in self._accumulator.items() if q}
        return dispatched

    def _submit(self, partition: int, broker_id: int, chunk: _Sealed, now: float) -> None:
        enqueued_at = np.maximum(chunk.seal_at, now)
        group = RequestGroup(
            self, partition, chunk.sizes, chunk.counts, enqueued_at,
            first_index=chunk.first_index, records=chunk.records, receipts=chunk.receipts,
        )
        self._in_flight += len(group)
        self.batches_dispatched += len(group)
        if group.receipts is not None:
            for batch, receipts in enumerate(group.receipts):
                for receipt in receipts:
                    receipt.partition = partition
                    receipt.enqueued_at = float(enqueued_at[batch])
        if self.props.acks == Acks.ACKS0:
            self._acknowledge(group, 0, len(group), enqueued_at)
        self.cluster.submit(group.span(), self, broker_id)

    def on_leader_append(self, group: RequestGroup, lo: int, hi: int) -> None:
        if group.receipts is not None:
            for batch in range(lo, hi):
                base = int(group.base_offsets[batch])
                for k, receipt in enumerate(group.receipts[batch]):
                    receipt.offset = base + k
        if self.props.acks == Acks.ACKS0:
            # acks=0 でも追記完了までは内部的に追跡する
            self._in_flight -= hi - lo
            self.batches_completed += hi - lo
        self._settle(group)

    def on_replica_append(self, group: RequestGroup) -> None:
        self._settle(group)

    def _settle(self, group: RequestGroup) -> None:
        if self.props.acks == Acks.ACKS0:
            return
        ready = self.cluster.acked_prefix(group, self.props.acks, self.props.min_insync_replicas)
        if ready <= group.acked:
            return
        lo = group.acked
        times = self.cluster.ack_times(group, lo, ready, self.props.acks)
        self._in_flight -= ready - lo
        self.batches_completed += ready - lo
        self._acknowledge(group, lo, ready, times)

    def _acknowledge(self, group: RequestGroup, lo: int, hi: int, times: np.ndarray) -> None:
        group.acked = max(group.acked, hi)
        if group.receipts is not None:
            for batch in range(lo, hi):
                for receipt in group.receipts[batch]:
                    receipt.resolved_at = float(times[batch - lo])
        nbytes = int(group.sizes[lo:hi].sum())
        due = float(np.max(times))
        self._release_seq += 1
        heapq.heappush(self._pending_release, (due, self._release_seq, nbytes))
        self.release_due(float(self.engine.step_end))

    def release_due(self, until: float) -> int:
        released = 0
        while self._pending_release and self._pending_release[0][0] <= until:
            due, _, nbytes = heapq.heappop(self._pending_release)
            self.buffer.release(nbytes)
            self.last_release_at = max(self.last_release_at, due)
            released += nbytes
        return released

    # ------------------------------------------------------------------
    # flush / close
    # ------------------------------------------------------------------
    def seal_if_exhausted(self) -> None:
        # バッファ待ちで他に解放される見込みがなければ、満杯でないバッチも送り出す
        if self._in_flight == 0 and self.undispatched == 0 and not self._pending_release:
            self.seal_all()

    def seal_all(self) -> None:
        now = float(self.engine.now)
        self._seal_open_batch(now)
        self._seal_open_stream(now)

    def flush(self) -> None:
        self.seal_all()
        while not self.idle:
            self.engine.step()

    def close(self) -> None:
        if self.closed:
            return
        self.flush()
        self.closed = True
        if self.source is not None:
            self.source.close()


def send(producer: Producer, record: Record) -> DeliveryReceipt:
    return producer.send(record)


def flush(producer: Producer) -> None:
    producer.flush()
