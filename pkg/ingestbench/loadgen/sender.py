"""データ送信スレッドです。
固定遅延のスケジュールで 1 実行につき 1 件を送り、バッファが詰まっている間はブロックします。
ブロック中やソース読み込み中に過ぎたスロットは取り戻しません。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Optional

from ingestbench.constants import DEFAULT_DURATION_S, NS_PER_S
from ingestbench.core import Clock, Locality, ProducerProps
from ingestbench.loadgen.schedule import FixedDelaySchedule, rate_from_delay
from ingestbench.loadgen.sources import DataSource, DataSourceSpec

if TYPE_CHECKING:
    from ingestbench.producer.client import Producer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SenderSpec:
    delay_ns: int
    duration_s: int = DEFAULT_DURATION_S
    read_in_ram: bool = True
    locality: Locality = field(default_factory=Locality.local)
    producer: ProducerProps = field(default_factory=ProducerProps)
    source: DataSourceSpec = field(default_factory=DataSourceSpec)
    label: str = ""

    def __post_init__(self) -> None:
        rate_from_delay(self.delay_ns)
        if self.duration_s <= 0:
            raise ValueError(f"duration_s must be > 0, got {self.duration_s}")

    @property
    def rate(self) -> Fraction:
        return rate_from_delay(self.delay_ns)


@dataclass
class SenderStats:
    attempted: int = 0
    sent: int = 0
    blocked_time: float = 0.0


class Sender:
    """Fixed-delay sending activity bound to one producer."""

    def __init__(self, index: int, spec: SenderSpec, producer: "Producer", source: DataSource, start_ns: int = 0):
        self.index = index
        self.spec = spec
        self.producer = producer
        self.source = source
        self.schedule = FixedDelaySchedule(spec.delay_ns, start_ns, start_ns + spec.duration_s * NS_PER_S)
        self.stats = SenderStats()
        self.ready_at = float(start_ns)
        self.blocked_since: Optional[float] = None
        self.finished = False
        self.sent_in_step = 0

    @property
    def host(self) -> str:
        return self.producer.host

    @property
    def start_ns(self) -> int:
        return self.schedule.start_ns

    @property
    def end_ns(self) -> int:
        return self.schedule.end_ns

    def running(self, now: float) -> bool:
        return not self.finished and self.start_ns <= now < self.end_ns

    def tasks(self, now: float, step_ns: float, cpu_cost_per_msg: float) -> float:
        """Tasks this sender puts on its host during the last step."""
        tasks = 0.0
        if self.running(now):
            tasks += 1.0
            tasks += cpu_cost_per_msg * self.sent_in_step / step_ns
        if not self.producer.idle:
            tasks += 1.0
        return tasks

    def step(self, step_start: float, step_end: float, cpu_share: float = 1.0) -> None:
        self.sent_in_step = 0
        if self.finished or step_end <= self.start_ns:
            return
        if self.blocked_since is not None:
            if self.producer.records_that_fit(1) == 0:
                self._count_attempts(step_end)
                return
            self.ready_at = max(self.blocked_since, step_start)
            self.stats.blocked_time += self.ready_at - self.blocked_since
            self.blocked_since = None

        cost = self.source.per_record_cost_ns / cpu_share
        window = self.schedule.window(self.ready_at, step_end, cost)
        if window.count:
            sent = self.producer.records_that_fit(window.count)
            self.producer.send_run(sent, window)
            self.stats.sent += sent
            self.sent_in_step = sent
            if sent < window.count:
                # バッファが空くまで次の実行で止まる
                self.blocked_since = float(window.time_of(sent))
                self.producer.seal_if_exhausted()
            else:
                self.ready_at = self.schedule.next_after(window, sent, cost)
        self._count_attempts(step_end)
        if self.blocked_since is None and self.ready_at >= self.end_ns:
            self.finish()

    def _count_attempts(self, step_end: float) -> None:
        self.stats.attempted = self.schedule.slots_before(step_end)

    def finish(self) -> None:
        if self.finished:
            return
        self.finished = True
        self.stats.attempted = self.schedule.slots_before(self.end_ns)
        self.producer.seal_all()
        logger.debug(
            "sender %d finished: attempted=%d sent=%d blocked=%.3fs",
            self.index, self.stats.attempted, self.stats.sent, self.stats.blocked_time / NS_PER_S,
        )


def run_sender(spec: SenderSpec, producer: "Producer", clock: Optional[Clock] = None) -> SenderStats:
    """Run one sender to completion on the producer's engine and flush."""
    engine = producer.engine
    if clock is not None and clock is not engine.clock:
        raise ValueError("the sender must run on the engine clock")
    sender = engine.attach_sender(spec, producer)
    engine.run_until(sender.end_ns)
    producer.flush()
    return sender.stats
