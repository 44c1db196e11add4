"""送信側とクラスタを固定ステップで進めるシミュレーションエンジンです。
1 ステップの順序は、バッファ解放、送信、送り出し、クラスタ前進、負荷採取、5 秒ごとの tick です。
RealTime モードでは同じステップを OS の時計に合わせて進め、tick ごとに Carbon へ送ります。
"""

from __future__ import annotations

import asyncio
import logging
from typing import Callable, Dict, Iterable, List, Optional

from ingestbench.brokersim.cluster import Cluster
from ingestbench.brokersim.topics import TopicHandle
from ingestbench.constants import (
    DEFAULT_BROKERS,
    DEFAULT_STEP_MS,
    NS_PER_S,
    ONE_MINUTE_S,
    TICK_INTERVAL_NS,
    VIRTUAL_EPOCH_S,
)
from ingestbench.core import Clock, ClockMode, Locality, ProducerProps, ResourceProfile, TopicConfig, VirtualClock
from ingestbench.loadgen.sender import Sender, SenderSpec
from ingestbench.loadgen.sources import open_source
from ingestbench.metrics.graphite import MetricPoint
from ingestbench.metrics.store import SeriesStore
from ingestbench.producer.client import Producer

logger = logging.getLogger(__name__)

PointSink = Callable[[List[MetricPoint]], None]


class Simulation:
    """Single-threaded driver owning the clock, the cluster and every client."""

    def __init__(
        self,
        profile: Optional[ResourceProfile] = None,
        brokers: int = DEFAULT_BROKERS,
        step_ms: int = DEFAULT_STEP_MS,
        clock: Optional[Clock] = None,
        epoch_s: int = VIRTUAL_EPOCH_S,
        store: Optional[SeriesStore] = None,
    ):
        if step_ms < 1 or TICK_INTERVAL_NS % (step_ms * 1_000_000):
            raise ValueError(f"step_ms must divide the 5 s tick, got {step_ms}")
        self.cluster = Cluster(profile, brokers=brokers, epoch_s=epoch_s, step_ms=step_ms)
        self.profile = self.cluster.profile
        self.clock = clock or VirtualClock()
        self.epoch_s = epoch_s
        self.step_ns = step_ms * 1_000_000
        self.store = store or SeriesStore()
        self.producers: List[Producer] = []
        self.senders: List[Sender] = []
        self.sinks: List[PointSink] = [self.store.ingest_many]
        self.time = 0
        self.step_end = 0
        self.steps = 0
        self._next_tick = TICK_INTERVAL_NS

    @property
    def now(self) -> int:
        return self.time

    # ------------------------------------------------------------------
    # 構成
    # ------------------------------------------------------------------
    def create_topic(self, config: TopicConfig) -> TopicHandle:
        return self.cluster.create_topic(config)

    def new_producer(self, topic: TopicHandle, props: ProducerProps, locality: Locality) -> Producer:
        if locality.is_local:
            host = self.cluster.broker(topic.leader_of(0)).host.name
        else:
            host = locality.host or ""
        producer = Producer(self, topic, props, locality, producer_id=len(self.producers) + 1, host=host)
        self.producers.append(producer)
        return producer

    def attach_sender(self, spec: SenderSpec, producer: Producer, start_ns: Optional[int] = None) -> Sender:
        source = open_source(spec.source, spec.read_in_ram)
        producer.attach_source(source)
        start = self.time if start_ns is None else start_ns
        sender = Sender(len(self.senders) + 1, spec, producer, source, start_ns=start)
        self.senders.append(sender)
        return sender

    # ------------------------------------------------------------------
    # 実行
    # ------------------------------------------------------------------
    def step(self) -> List[MetricPoint]:
        ta = self.time
        tb = ta + self.step_ns
        self.step_end = tb
        for producer in self.producers:
            producer.release_due(ta)
        for sender in self.senders:
            sender.step(ta, tb, self.cluster.host(sender.host).cpu_share)
        for producer in self.producers:
            producer.dispatch(ta)
        self.cluster.advance(ta, tb)
        self.cluster.sample_load(self._sender_tasks(ta), now=tb)
        self.time = tb
        if self.clock.mode == ClockMode.VIRTUAL:
            self.clock.advance_to(tb)
        self.steps += 1
        points: List[MetricPoint] = []
        while tb >= self._next_tick:
            points.extend(self._tick(self._next_tick))
            self._next_tick += TICK_INTERVAL_NS
        return points

    def _sender_tasks(self, now: int) -> Dict[str, float]:
        tasks: Dict[str, float] = {}
        for sender in self.senders:
            share = sender.tasks(now, self.step_ns, self.profile.cpu_cost_per_msg)
            if share:
                tasks[sender.host] = tasks.get(sender.host, 0.0) + share
        return tasks

    def _tick(self, t_ns: int) -> List[MetricPoint]:
        ts = self.epoch_s + t_ns // NS_PER_S
        points = self.cluster.tick_all(ts)
        for sink in self.sinks:
            sink(points)
        if (t_ns // NS_PER_S) % ONE_MINUTE_S == 0:
            logger.debug(
                "t=%ds MessagesIn=%.0f/s load=%s", t_ns // NS_PER_S,
                self.cluster.meters.messages_in.one_minute_rate,
                ",".join(f"{b.load_1m:.2f}" for b in self.cluster.brokers),
            )
        return points

    def run_until(self, t_ns: int) -> None:
        while self.time < t_ns:
            self.step()

    def flush_all(self, limit_ns: Optional[int] = None) -> None:
        """Seal every producer and step until all of them are idle."""
        for producer in self.producers:
            producer.seal_all()
        while not all(producer.idle for producer in self.producers):
            if limit_ns is not None and self.time >= limit_ns:
                raise RuntimeError("producers did not drain before the deadline")
            self.step()

    async def run_realtime(self, t_ns: int, shipped: Optional[Callable[[Iterable[MetricPoint]], object]] = None) -> None:
        """Step in lockstep with the OS clock; shipped receives each tick's points."""
        while self.time < t_ns:
            lag = (self.time + self.step_ns - self.clock.now()) / NS_PER_S
            if lag > 0:
                await asyncio.sleep(lag)
            points = self.step()
            if points and shipped is not None:
                result = shipped(points)
                if asyncio.iscoroutine(result):
                    await result
