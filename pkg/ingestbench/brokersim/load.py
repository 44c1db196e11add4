"""ホストのシステム負荷と 5 秒ごとのメトリクス採取です。
負荷は実行可能タスクと I/O 待ちタスクの合計で、その 1 分 EWMA が load_1m になります。
コア数を超える負荷がかかると、そのホストの CPU 配分が cores / load に下がります。
"""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import TYPE_CHECKING, Dict, List, Mapping, Optional

from ingestbench.constants import (
    BROKER_METRIC_PREFIX,
    BYTES_IN_COUNT,
    BYTES_IN_RATE,
    IF_OCTETS_RX,
    IF_PACKETS_RX,
    LOAD_SHORTTERM,
    MESSAGES_IN_COUNT,
    MESSAGES_IN_RATE,
    REPLICATION_BYTES_IN_RATE,
    TICK_INTERVAL_S,
)
from ingestbench.metrics.graphite import MetricPoint
from ingestbench.metrics.meter import BrokerTopicMeters, LoadAverage

if TYPE_CHECKING:
    from ingestbench.brokersim.cluster import BrokerNode

logger = logging.getLogger(__name__)


class Host:
    """One machine: cores, instantaneous task demand and its load average."""

    def __init__(self, name: str, cores: int):
        self.name = name
        self.cores = cores
        self.load = LoadAverage()
        self.runnable = 0.0
        self.io_waiting = 0.0
        self.cpu_share = 1.0

    @property
    def demand(self) -> float:
        return self.runnable + self.io_waiting

    def set_tasks(self, runnable: float, io_waiting: float) -> None:
        self.runnable = runnable
        self.io_waiting = io_waiting
        demand = self.demand
        self.cpu_share = 1.0 if demand <= self.cores else self.cores / demand


def meter_points(prefix: str, meters: BrokerTopicMeters, ts: int) -> List[MetricPoint]:
    return [
        MetricPoint(f"{prefix}.MessagesInPerSec.OneMinuteRate", meters.messages_in.one_minute_rate, ts),
        MetricPoint(f"{prefix}.MessagesInPerSec.Count", meters.messages_in.count, ts),
        MetricPoint(f"{prefix}.BytesInPerSec.OneMinuteRate", meters.bytes_in.one_minute_rate, ts),
        MetricPoint(f"{prefix}.BytesInPerSec.Count", meters.bytes_in.count, ts),
        MetricPoint(f"{prefix}.ReplicationBytesInPerSec.OneMinuteRate", meters.replication_bytes_in.one_minute_rate, ts),
    ]


class SystemLoadMixin:
    """Per-host task accounting and the five-second metric tick."""

    def _init_load(self) -> None:
        self.hosts: Dict[str, Host] = {}

    def host(self, name: str) -> Host:
        host = self.hosts.get(name)
        if host is None:
            host = Host(name, self.profile.cores)
            self.hosts[name] = host
        return host

    def sample_load(self, sender_tasks: Mapping[str, float], now: Optional[float] = None) -> None:
        """Recompute instantaneous demand from senders, open broker connections and the brokers themselves.

        With now set, a broker in a stop-the-world collection adds one runnable GC thread per core.
        """
        runnable: Dict[str, float] = defaultdict(float)
        io_waiting: Dict[str, float] = defaultdict(float)
        for name, tasks in sender_tasks.items():
            runnable[name] += tasks
        for name, tasks in self.split_receive_tasks().items():
            runnable[name] += tasks
        if now is not None:
            for broker in self.brokers:
                if broker.heap.paused(now):
                    runnable[broker.host.name] += broker.host.cores
        for conn, outstanding in self._conn_outstanding.items():
            if outstanding <= 0:
                continue
            name = self.broker(conn[1]).host.name
            if self._conn_on_disk.get(conn, 0) > 0:
                io_waiting[name] += 1
            else:
                runnable[name] += 1
        for name in list(runnable) + list(io_waiting):
            self.host(name)
        for name, host in self.hosts.items():
            host.set_tasks(runnable.get(name, 0.0), io_waiting.get(name, 0.0))

    def tick(self, broker: "BrokerNode", interval_s: float = TICK_INTERVAL_S, ts: int = 0) -> List[MetricPoint]:
        host = broker.host
        host.load.update(host.demand)
        broker.meters.tick()
        points = meter_points(BROKER_METRIC_PREFIX.format(host=host.name), broker.meters, ts)
        points.append(MetricPoint(LOAD_SHORTTERM.format(host=host.name), host.load.value, ts))
        for iface, counters in sorted(broker.interfaces.items()):
            points.append(MetricPoint(
                IF_PACKETS_RX.format(host=host.name, iface=iface),
                counters.packets_rx.delta_since_sample() / interval_s, ts,
            ))
            points.append(MetricPoint(
                IF_OCTETS_RX.format(host=host.name, iface=iface),
                counters.bytes_rx.delta_since_sample() / interval_s, ts,
            ))
        return points

    def tick_all(self, ts: int, interval_s: float = TICK_INTERVAL_S) -> List[MetricPoint]:
        points: List[MetricPoint] = []
        for broker in self.brokers:
            points.extend(self.tick(broker, interval_s, ts))
        self.meters.tick()
        points.extend([
            MetricPoint(MESSAGES_IN_RATE, self.meters.messages_in.one_minute_rate, ts),
            MetricPoint(MESSAGES_IN_COUNT, self.meters.messages_in.count, ts),
            MetricPoint(BYTES_IN_RATE, self.meters.bytes_in.one_minute_rate, ts),
            MetricPoint(BYTES_IN_COUNT, self.meters.bytes_in.count, ts),
            MetricPoint(REPLICATION_BYTES_IN_RATE, self.meters.replication_bytes_in.one_minute_rate, ts),
        ])
        broker_hosts = {broker.host.name for broker in self.brokers}
        for name in sorted(self.hosts):
            if name in broker_hosts:
                continue
            host = self.hosts[name]
            host.load.update(host.demand)
            points.append(MetricPoint(LOAD_SHORTTERM.format(host=name), host.load.value, ts))
        logger.debug("tick at %d: %d points", ts, len(points))
        return points
