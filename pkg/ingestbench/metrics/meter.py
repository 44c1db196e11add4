"""Kafka 互換の 1 分レートメーターと累積カウンタを定義します。
5 秒ごとの tick で指数移動平均を更新し、初回の tick では瞬間レートで初期化します。
ロードアベレージも同じ 5 秒グリッドの指数移動平均として扱います。
"""

from __future__ import annotations

import math
import threading
from typing import Optional

from ingestbench.constants import LOAD_DECAY, ONE_MINUTE_S, TICK_INTERVAL_S
from ingestbench.errors import InvalidMark


class RateMeter:
    """EWMA events-per-second meter ticked every five seconds."""

    def __init__(self, tick_interval_s: float = TICK_INTERVAL_S, window_s: float = ONE_MINUTE_S):
        self.tick_interval_s = float(tick_interval_s)
        self.alpha = 1.0 - math.exp(-self.tick_interval_s / window_s)
        self.count_since_tick = 0
        self.one_minute_rate = 0.0
        self.initialized = False
        self.count = 0
        self._lock = threading.Lock()

    def mark(self, n: int = 1) -> None:
        if n <= 0:
            raise InvalidMark(f"mark count must be >= 1, got {n}")
        with self._lock:
            self.count_since_tick += n
            self.count += n

    def tick(self) -> float:
        with self._lock:
            inst = self.count_since_tick / self.tick_interval_s
            self.count_since_tick = 0
            if self.initialized:
                self.one_minute_rate += self.alpha * (inst - self.one_minute_rate)
            else:
                self.one_minute_rate = inst
                self.initialized = True
            return self.one_minute_rate


class Counter:
    """Cumulative, non-decreasing counter."""

    def __init__(self) -> None:
        self.value = 0.0
        self._last_sample: Optional[float] = None

    def inc(self, n: float) -> None:
        if n < 0:
            raise ValueError("counter increments must be >= 0")
        self.value += n

    def delta_since_sample(self) -> float:
        # collectd の DERIVE と同じく前回サンプルからの差分を返す
        last = self._last_sample if self._last_sample is not None else 0.0
        self._last_sample = self.value
        return self.value - last


class LoadAverage:
    """One-minute system load on the five-second sampling grid."""

    def __init__(self, decay: float = LOAD_DECAY):
        self.decay = decay
        self.value = 0.0

    def update(self, tasks: float) -> float:
        self.value = self.value * self.decay + tasks * (1.0 - self.decay)
        return self.value


class BrokerTopicMeters:
    """MessagesIn, BytesIn and ReplicationBytesIn meters, optionally rolled up into a parent."""

    def __init__(self, parent: Optional["BrokerTopicMeters"] = None):
        self.parent = parent
        self.messages_in = RateMeter()
        self.bytes_in = RateMeter()
        self.replication_bytes_in = RateMeter()

    def mark_append(self, messages: int, nbytes: int) -> None:
        if messages > 0:
            self.messages_in.mark(messages)
            self.bytes_in.mark(nbytes)
        if self.parent is not None:
            self.parent.mark_append(messages, nbytes)

    def mark_replication(self, nbytes: int) -> None:
        if nbytes > 0:
            self.replication_bytes_in.mark(nbytes)
        if self.parent is not None:
            self.parent.mark_replication(nbytes)

    def tick(self) -> None:
        self.messages_in.tick()
        self.bytes_in.tick()
        self.replication_bytes_in.tick()
