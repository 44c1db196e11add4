"""TCP ウィンドウを超える produce リクエストとブローカ JVM ヒープのモデルです。
ウィンドウを超えるリクエストは分割受信になり、1 件ごとにブローカの CPU を消費します。
応答待ちで保持されたそのバッファは old 世代へ昇格し、満杯になると全停止 GC が走ります。
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Dict

from ingestbench.constants import MB
from ingestbench.core import Acks

if TYPE_CHECKING:
    from ingestbench.producer.client import Producer
    from ingestbench.producer.request import Span

logger = logging.getLogger(__name__)


class BrokerHeap:
    """Old generation of one broker JVM and its stop-the-world collections."""

    def __init__(self, capacity: float, ns_per_mb: float):
        self.capacity = float(capacity)
        self.ns_per_mb = float(ns_per_mb)
        self.old_gen = 0.0
        self.paused_until = 0.0
        self.paused_ns = 0.0
        self.collections = 0

    def paused(self, t: float) -> bool:
        return t < self.paused_until

    def promote(self, nbytes: float, now: float) -> None:
        self.old_gen += nbytes
        if self.old_gen < self.capacity or self.paused(now):
            return
        pause = self.old_gen / MB * self.ns_per_mb
        self.paused_until = now + pause
        self.paused_ns += pause
        self.collections += 1
        logger.debug("full GC %d at %.3fs: %.0f MB, %.1fs pause", self.collections, now / 1e9, self.old_gen / MB, pause / 1e9)
        self.old_gen = 0.0


class HeapMixin:
    """Split receives of oversized requests and the heap pressure they leave behind."""

    def _init_heap(self) -> None:
        self._split_cpu_ns: Dict[str, float] = {}

    def oversized(self, producer: "Producer") -> bool:
        # バッチはプロデューサ側で batch.size ちょうどのバッファに載る
        return producer.props.batch_size_bytes > self.profile.tcp_window_bytes

    def split_receive(self, broker_id: int, span: "Span") -> None:
        if not self.oversized(span.group.producer):
            return
        host = self.broker(broker_id).host.name
        self._split_cpu_ns[host] = self._split_cpu_ns.get(host, 0.0) + len(span) * self.profile.split_receive_cpu_ns

    def split_receive_tasks(self) -> Dict[str, float]:
        """Core equivalents spent on split receives since the last call."""
        tasks = {host: ns / self.step_ns for host, ns in self._split_cpu_ns.items()}
        self._split_cpu_ns.clear()
        return tasks

    def retain(self, broker_id: int, span: "Span") -> None:
        """Promote leader-appended oversized batches that still owe the producer a response."""
        producer = span.group.producer
        if producer.props.acks == Acks.ACKS0 or not self.oversized(producer):
            return
        self.broker(broker_id).heap.promote(span.nbytes, float(span.ready[-1]))

    def gc_paused(self, broker_id: int, t: float) -> bool:
        return self.broker(broker_id).heap.paused(t)
