"""1 レプリカ分のパーティションログです。
オフセットは 0 から密に並び、追記のみでエントリは変更されません。
バッチはリクエストへの参照として保持し、fetch で読まれたときに初めてレコードを組み立てます。
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, List, Optional, Sequence, Tuple, Union, overload

import numpy as np

from ingestbench.core import Record, TimestampType
from ingestbench.errors import InvalidOffset

if TYPE_CHECKING:
    from ingestbench.metrics.meter import BrokerTopicMeters
    from ingestbench.producer.request import RequestGroup


@dataclass(frozen=True)
class LogEntry:
    offset: int
    record: Record
    log_ts: int


class _RecordSegment:
    """Records appended one at a time."""

    def __init__(self, base_offset: int):
        self.base_offset = base_offset
        self.records: List[Record] = []
        self.stored: List[int] = []

    def __len__(self) -> int:
        return len(self.records)

    def batch_entries(self, start: int) -> Tuple[int, List[Record], List[int]]:
        return start, self.records[start:], self.stored[start:]


class _SpanSegment:
    """Consecutive batches of one request group, held by reference."""

    def __init__(self, base_offset: int, group: "RequestGroup", lo: int, hi: int,
                 append_times: np.ndarray, timestamp_type: TimestampType):
        self.base_offset = base_offset
        self.group = group
        self.lo = lo
        self.cum = np.concatenate(([0], np.cumsum(group.counts[lo:hi])))
        self.append_times = np.round(append_times).astype(np.int64)
        self.timestamp_type = timestamp_type

    def __len__(self) -> int:
        return int(self.cum[-1])

    def batch_entries(self, start: int) -> Tuple[int, List[Record], List[int]]:
        """Entries of the batch holding relative position start, from start on."""
        b = int(np.searchsorted(self.cum, start, side="right")) - 1
        first = int(self.cum[b])
        records = list(self.group.records_of(self.lo + b))
        if self.timestamp_type == TimestampType.LOG_APPEND_TIME:
            stored = [int(self.append_times[b])] * len(records)
        else:
            stored = [r.create_ts for r in records]
        k = start - first
        return first, records[k:], stored[k:]


Segment = Union[_RecordSegment, _SpanSegment]


class LogSlice(Sequence[LogEntry]):
    """Lazy view of the entries with offsets in [start, stop)."""

    def __init__(self, log: "PartitionLog", start: int, stop: int):
        self._log = log
        self._start = start
        self._stop = stop

    def __len__(self) -> int:
        return max(0, self._stop - self._start)

    @overload
    def __getitem__(self, index: int) -> LogEntry: ...

    @overload
    def __getitem__(self, index: slice) -> List[LogEntry]: ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        if index < 0:
            index += len(self)
        if not 0 <= index < len(self):
            raise IndexError(index)
        return self._log.entry(self._start + index)

    def __iter__(self) -> Iterator[LogEntry]:
        offset = self._start
        while offset < self._stop:
            for entry in self._log.entries_from(offset):
                if entry.offset >= self._stop:
                    return
                yield entry
                offset = entry.offset + 1

    @property
    def offsets(self) -> range:
        return range(self._start, max(self._start, self._stop))


class PartitionLog:
    """Append-only, densely offset-indexed log of one partition replica."""

    def __init__(self, topic: str, partition_id: int, broker_id: int = 1,
                 timestamp_type: TimestampType = TimestampType.CREATE_TIME,
                 leader: bool = True, meters: Optional["BrokerTopicMeters"] = None):
        self.topic = topic
        self.partition_id = partition_id
        self.broker_id = broker_id
        self.timestamp_type = timestamp_type
        self.leader = leader
        self.meters = meters
        self.next_offset = 0
        self.appended_bytes = 0
        self._bases: List[int] = []
        self._segments: List[Segment] = []

    def __len__(self) -> int:
        return self.next_offset

    def _mark(self, messages: int, nbytes: int) -> None:
        self.appended_bytes += nbytes
        if self.meters is None:
            return
        if self.leader:
            self.meters.mark_append(messages, nbytes)
        else:
            self.meters.mark_replication(nbytes)

    def append(self, record: Record, broker_clock: int) -> Tuple[int, int]:
        if not self._segments or not isinstance(self._segments[-1], _RecordSegment):
            self._bases.append(self.next_offset)
            self._segments.append(_RecordSegment(self.next_offset))
        segment = self._segments[-1]
        assert isinstance(segment, _RecordSegment)
        stored = broker_clock if self.timestamp_type == TimestampType.LOG_APPEND_TIME else record.create_ts
        segment.records.append(record)
        segment.stored.append(int(stored))
        offset = self.next_offset
        self.next_offset += 1
        self._mark(1, record.size_bytes)
        return offset, int(stored)

    def append_span(self, group: "RequestGroup", lo: int, hi: int, append_times: np.ndarray) -> np.ndarray:
        """Append batches [lo, hi) of group; returns the base offset of each batch."""
        segment = _SpanSegment(self.next_offset, group, lo, hi, append_times, self.timestamp_type)
        count = len(segment)
        if count == 0:
            return np.empty(0, dtype=np.int64)
        self._bases.append(self.next_offset)
        self._segments.append(segment)
        bases = self.next_offset + segment.cum[:-1]
        self.next_offset += count
        self._mark(count, int(group.sizes[lo:hi].sum()))
        return bases

    def _locate(self, offset: int) -> Tuple[Segment, int]:
        i = bisect.bisect_right(self._bases, offset) - 1
        return self._segments[i], offset - self._bases[i]

    def entry(self, offset: int) -> LogEntry:
        if not 0 <= offset < self.next_offset:
            raise IndexError(f"offset {offset} out of range")
        segment, rel = self._locate(offset)
        _, records, stored = segment.batch_entries(rel)
        return LogEntry(offset, records[0], stored[0])

    def entries_from(self, offset: int) -> Iterator[LogEntry]:
        """Entries of the batch holding offset, from offset on."""
        segment, rel = self._locate(offset)
        _, records, stored = segment.batch_entries(rel)
        for k, (record, ts) in enumerate(zip(records, stored)):
            yield LogEntry(offset + k, record, ts)

    def fetch(self, after_offset: int) -> LogSlice:
        """Entries with offset strictly greater than after_offset (-1 reads all)."""
        if after_offset < -1:
            raise InvalidOffset(f"after_offset must be >= -1, got {after_offset}")
        return LogSlice(self, after_offset + 1, self.next_offset)


def fetch(log: PartitionLog, after_offset: int) -> LogSlice:
    return log.fetch(after_offset)


def append(log: PartitionLog, record: Record, broker_clock: int) -> Tuple[int, int]:
    return log.append(record, broker_clock)
