"""ネットワークのモデルです。
インターフェースごとに FIFO のリンクを持ち、各バッチの完了時刻を正確な漸化式で求めます。
リモート送信はホストの上りリンクとブローカの eth0 を、ローカル送信はループバックを通ります。
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Deque, Dict, List, Optional, Tuple

import numpy as np

from ingestbench.constants import IFACE_ETH0, IFACE_LOOPBACK, NS_PER_S
from ingestbench.core import Locality, ResourceProfile
from ingestbench.metrics.meter import Counter

if TYPE_CHECKING:
    from ingestbench.producer.client import Producer
    from ingestbench.producer.request import Span

UPLINK = "uplink"


@dataclass
class InterfaceCounters:
    bytes_rx: Counter = field(default_factory=Counter)
    packets_rx: Counter = field(default_factory=Counter)

    def add(self, nbytes: float, packets: float) -> None:
        self.bytes_rx.inc(nbytes)
        self.packets_rx.inc(packets)


@dataclass(frozen=True)
class ArrivalEvent:
    arrive_at: float
    host: str
    interface: str
    bytes: int
    packets: int


def packet_count(nbytes, mtu: int):
    """Packets needed for a request of nbytes at the given MTU."""
    if isinstance(nbytes, np.ndarray):
        return int(np.ceil(nbytes / mtu).sum())
    return math.ceil(nbytes / mtu)


class Link:
    """FIFO transmission link: c_i = max(a_i, c_{i-1}) + bytes_i / bw."""

    def __init__(self, name: str, host: str, iface: str, bw: float, broker_id: int = 0):
        self.name = name
        self.host = host
        self.iface = iface
        self.bw = float(bw)
        self.broker_id = broker_id
        self.ns_per_byte = NS_PER_S / self.bw
        self.busy_until = 0.0
        self.queue: Deque["Span"] = deque()
        self.queued_batches = 0

    def push(self, span: "Span") -> None:
        self.queue.append(span)
        self.queued_batches += len(span)

    def transmit(self, nbytes: int, ready_at: float, bw: Optional[float] = None) -> float:
        start = max(ready_at, self.busy_until)
        self.busy_until = start + nbytes * (NS_PER_S / bw if bw else self.ns_per_byte)
        return self.busy_until

    def serve(self, step_end: float, limit: Optional[int] = None) -> List["Span"]:
        """Complete queued batches up to step_end, at most limit of them."""
        done: List["Span"] = []
        budget = limit if limit is not None else math.inf
        while self.queue and budget > 0:
            span = self.queue[0]
            d = span.sizes * self.ns_per_byte
            s = np.cumsum(d)
            c = s + np.maximum(np.maximum.accumulate(span.ready - (s - d)), self.busy_until)
            k = int(min(np.searchsorted(c, step_end, side="right"), budget))
            if k > 0:
                done.append(span.head(k, c[:k]))
                self.busy_until = float(c[k - 1])
                self.queued_batches -= k
                budget -= k
            if k == len(span):
                self.queue.popleft()
                continue
            self.queue[0] = span.tail(k)
            if budget <= 0 and c[k] <= step_end:
                # 受け側が詰まっている間は送れない
                self.busy_until = max(self.busy_until, step_end)
            break
        return done


class NetworkMixin:
    """Links, per-connection socket buffers and interface counters."""

    def _init_network(self) -> None:
        self.links: Dict[str, Link] = {}
        self._conn_unsent: Dict[Tuple[int, int], int] = {}
        self._conn_outstanding: Dict[Tuple[str, int], int] = {}
        self._background_carry: Dict[int, float] = {}

    def _link(self, name: str, host: str, iface: str, bw: float, broker_id: int = 0) -> Link:
        link = self.links.get(name)
        if link is None:
            link = Link(name, host, iface, bw, broker_id)
            self.links[name] = link
        return link

    def loopback(self, broker_id: int) -> Link:
        host = self.broker(broker_id).host.name
        return self._link(f"{host}/{IFACE_LOOPBACK}", host, IFACE_LOOPBACK, self.profile.loopback_bw, broker_id)

    def eth0(self, broker_id: int) -> Link:
        host = self.broker(broker_id).host.name
        return self._link(f"{host}/{IFACE_ETH0}", host, IFACE_ETH0, self.profile.nic_bw, broker_id)

    def uplink(self, host: str) -> Link:
        self.host(host)
        return self._link(f"{host}/{UPLINK}", host, UPLINK, self.profile.nic_bw)

    def route(self, host: str, broker_id: int) -> List[Link]:
        if host == self.broker(broker_id).host.name:
            return [self.loopback(broker_id)]
        return [self.uplink(host), self.eth0(broker_id)]

    def connection_unsent(self, producer: "Producer", broker_id: int) -> int:
        return self._conn_unsent.get((producer.producer_id, broker_id), 0)

    def connection_room(self, producer: "Producer", broker_id: int) -> int:
        first = self.route(producer.host, broker_id)[0]
        capacity = max(producer.props.send_buffer_bytes, int(first.bw * self.step_ns / NS_PER_S))
        return capacity - self.connection_unsent(producer, broker_id)

    def submit(self, span: "Span", producer: "Producer", broker_id: int) -> None:
        group = span.group
        self.check_insync(group, producer.props.acks, producer.props.min_insync_replicas)
        group.broker_id = broker_id
        group.route = self.route(producer.host, broker_id)
        key = (producer.producer_id, broker_id)
        self._conn_unsent[key] = self._conn_unsent.get(key, 0) + span.nbytes
        conn = (f"producer-{producer.producer_id}", broker_id)
        self._conn_outstanding[conn] = self._conn_outstanding.get(conn, 0) + len(span)
        group.route[0].push(span)

    def _ordered_links(self) -> List[Link]:
        uplinks = sorted((l for l in self.links.values() if l.iface == UPLINK), key=lambda l: l.name)
        local = sorted(
            (l for l in self.links.values() if l.iface != UPLINK),
            key=lambda l: (l.broker_id, l.iface != IFACE_LOOPBACK),
        )
        return uplinks + local

    def _serve_links(self, step_end: float) -> None:
        for link in self._ordered_links():
            limit = None if link.iface == UPLINK else self.disk_room(link.broker_id)
            for piece in link.serve(step_end, limit):
                route = piece.group.route
                hop = route.index(link)
                if hop + 1 < len(route):
                    route[hop + 1].push(piece)
                else:
                    self._arrive(link, piece)

    def _arrive(self, link: Link, span: "Span") -> None:
        broker = self.broker(link.broker_id)
        nbytes = span.nbytes
        broker.interfaces[link.iface].add(nbytes, packet_count(span.sizes, self.profile.mtu_bytes))
        key = (span.group.producer.producer_id, link.broker_id)
        self._conn_unsent[key] -= nbytes
        self.split_receive(link.broker_id, span)
        self._enqueue_disk(link.broker_id, span, leader=True)

    def deliver(self, request_bytes: int, locality: Locality, profile: Optional[ResourceProfile] = None,
                broker_id: int = 1, sent_at: float = 0.0) -> ArrivalEvent:
        """Carry one request to broker_id over loopback (Local) or eth0 (Remote)."""
        if request_bytes < 1:
            raise ValueError("request_bytes must be >= 1")
        profile = profile or self.profile
        if locality.is_local:
            link, bw = self.loopback(broker_id), profile.loopback_bw
        else:
            link, bw = self.eth0(broker_id), profile.nic_bw
        arrive_at = link.transmit(request_bytes, sent_at, bw)
        packets = packet_count(request_bytes, profile.mtu_bytes)
        self.broker(broker_id).interfaces[link.iface].add(request_bytes, packets)
        return ArrivalEvent(arrive_at, link.host, link.iface, request_bytes, packets)

    def _background(self, step_ns: float) -> None:
        # 監視系などの定常的な eth0 トラフィック
        for broker in self.brokers:
            carry = self._background_carry.get(broker.id, 0.0) + self.profile.background_pps * step_ns / NS_PER_S
            packets = math.floor(carry)
            self._background_carry[broker.id] = carry - packets
            if packets:
                broker.interfaces[IFACE_ETH0].add(packets * self.profile.background_packet_bytes, packets)
