"""ブローカのディスク書き込みキューです。
ブローカごとに 1 本の FIFO を持ち、ジョブ 1 件はプロデューサのバッチ 1 個です。
サービス速度は effective_disk_bw にホストの CPU 配分を掛けたものです。
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Dict, List, Tuple

import numpy as np

from ingestbench.brokersim.network import Link, packet_count
from ingestbench.constants import IFACE_ETH0, NS_PER_S
from ingestbench.producer.request import Span

if TYPE_CHECKING:
    from ingestbench.producer.request import RequestGroup

DISK = "disk"


class DiskQueue(Link):
    """Single write FIFO of one broker; jobs are batches."""

    def __init__(self, host: str, broker_id: int, bw: float):
        super().__init__(f"{host}/{DISK}", host, DISK, bw, broker_id)

    @property
    def jobs(self) -> int:
        return self.queued_batches

    def serve_at(self, step_end: float, bw: float) -> List[Span]:
        self.ns_per_byte = NS_PER_S / bw
        return self.serve(step_end)


class DiskMixin:
    """Disk queues, log appends and the follower fan-out they trigger."""

    def _init_disk(self) -> None:
        self._conn_on_disk: Dict[Tuple[str, int], int] = {}

    def disk_room(self, broker_id: int) -> int:
        return max(0, self.profile.queued_max_requests - self.broker(broker_id).disk.jobs)

    def _enqueue_disk(self, broker_id: int, span: Span, leader: bool) -> None:
        self.broker(broker_id).disk.push(span)
        if leader:
            conn = (f"producer-{span.group.producer.producer_id}", broker_id)
            self._conn_on_disk[conn] = self._conn_on_disk.get(conn, 0) + len(span)

    def _serve_disks(self, step_end: float) -> None:
        for broker in self.brokers:
            bw = self.profile.effective_disk_bw * broker.host.cpu_share
            for piece in broker.disk.serve_at(step_end, bw):
                group = piece.group
                if group.producer.topic.leader_of(group.partition) == broker.id:
                    self._complete_leader(broker.id, piece)
                else:
                    self._complete_follower(broker.id, piece)
            # GC 中はディスクも止まる
            broker.disk.busy_until = max(broker.disk.busy_until, broker.heap.paused_until)

    def _complete_leader(self, broker_id: int, span: Span) -> None:
        group = span.group
        topic = group.producer.topic
        lo, hi = span.lo, span.hi
        group.base_offsets[lo:hi] = topic.log(group.partition, broker_id).append_span(group, lo, hi, span.ready)
        group.appended_at[lo:hi] = span.ready
        group.leader_done = hi
        self.retain(broker_id, span)
        conn = (f"producer-{group.producer.producer_id}", broker_id)
        self._conn_on_disk[conn] -= len(span)
        self._conn_outstanding[conn] -= len(span)
        for follower in topic.replicas[group.partition].followers:
            self.replicate(group, lo, hi, follower)
        group.producer.on_leader_append(group, lo, hi)

    def _complete_follower(self, broker_id: int, span: Span) -> None:
        group = span.group
        lo, hi = span.lo, span.hi
        group.producer.topic.log(group.partition, broker_id).append_span(group, lo, hi, span.ready)
        done_at = group.replica_done_at.setdefault(broker_id, np.full(len(group), np.nan))
        done_at[lo:hi] = span.ready
        group.replica_done[broker_id] = hi
        group.producer.on_replica_append(group)

    def replicate(self, group: "RequestGroup", lo: int, hi: int, follower: int) -> None:
        """Forward appended batches [lo, hi) to follower after the replica hop delay."""
        span = Span(group, lo, hi, group.appended_at[lo:hi] + self.profile.replication_delay)
        broker = self.broker(follower)
        broker.interfaces[IFACE_ETH0].add(span.nbytes, packet_count(span.sizes, self.profile.mtu_bytes))
        self._enqueue_disk(follower, span, leader=False)
