"""全モジュールが共有するドメイン型を定義します。
レコード、トピック設定、プロデューサ設定、ハードウェアプロファイル、時計を保持します。
時刻はすべて実行開始からの整数ナノ秒で扱い、壁時計の時刻はメトリクス出力時にだけ使います。
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ingestbench.constants import (
    DEFAULT_BACKGROUND_PACKET_BYTES,
    DEFAULT_BACKGROUND_PPS,
    DEFAULT_BATCH_SIZE_BYTES,
    DEFAULT_BUFFER_MEMORY_BYTES,
    DEFAULT_CORES,
    DEFAULT_CPU_COST_PER_MSG_NS,
    DEFAULT_DISK_WRITE_BW,
    DEFAULT_EFFECTIVE_DISK_BW,
    DEFAULT_FULL_GC_NS_PER_MB,
    DEFAULT_HEAP_OLD_GEN_BYTES,
    DEFAULT_LOOPBACK_BW,
    DEFAULT_MIN_INSYNC_REPLICAS,
    DEFAULT_MTU_BYTES,
    DEFAULT_NIC_BW,
    DEFAULT_PROFILE_NAME,
    DEFAULT_QUEUED_MAX_REQUESTS,
    DEFAULT_READ_LATENCY_NS,
    DEFAULT_REPLICATION_DELAY_NS,
    DEFAULT_SEND_BUFFER_BYTES,
    DEFAULT_SPLIT_RECEIVE_CPU_NS,
    DEFAULT_TCP_WINDOW_BYTES,
    RECORD_SIZE_TARGET,
)
from ingestbench.errors import InvalidRecord, InvalidReplication


class Acks(str, Enum):
    ACKS0 = "0"
    ACKS1 = "1"
    ALL = "all"


class TimestampType(str, Enum):
    CREATE_TIME = "CreateTime"
    LOG_APPEND_TIME = "LogAppendTime"


class ClockMode(str, Enum):
    VIRTUAL = "virtual"
    REALTIME = "realtime"


def serialized_size(key: Optional[bytes], payload: bytes) -> int:
    """Raw key bytes plus raw payload bytes; framing is accounted for by the network."""
    if not payload:
        raise InvalidRecord("payload must not be empty")
    return (len(key) if key else 0) + len(payload)


@dataclass(frozen=True)
class Record:
    """One message as handed to the producer."""

    payload: bytes
    create_ts: int
    key: Optional[bytes] = None
    size_bytes: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "size_bytes", serialized_size(self.key, self.payload))


@dataclass(frozen=True)
class TopicConfig:
    name: str
    partitions: int = 1
    replication_factor: int = 1
    timestamp_type: TimestampType = TimestampType.CREATE_TIME

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("topic name must not be empty")
        if self.partitions < 1:
            raise ValueError(f"partitions must be >= 1, got {self.partitions}")
        if self.replication_factor < 1:
            raise InvalidReplication(
                f"replication_factor must be >= 1, got {self.replication_factor}"
            )


@dataclass(frozen=True)
class ProducerProps:
    batch_size_bytes: int = DEFAULT_BATCH_SIZE_BYTES
    buffer_memory_bytes: int = DEFAULT_BUFFER_MEMORY_BYTES
    acks: Acks = Acks.ACKS0
    min_insync_replicas: int = DEFAULT_MIN_INSYNC_REPLICAS
    send_buffer_bytes: int = DEFAULT_SEND_BUFFER_BYTES

    def __post_init__(self) -> None:
        for name in ("batch_size_bytes", "buffer_memory_bytes", "min_insync_replicas", "send_buffer_bytes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class ResourceProfile:
    """Calibrated hardware model of the benchmark cluster."""

    name: str = DEFAULT_PROFILE_NAME
    disk_write_bw: float = DEFAULT_DISK_WRITE_BW
    effective_disk_bw: float = DEFAULT_EFFECTIVE_DISK_BW
    nic_bw: float = DEFAULT_NIC_BW
    loopback_bw: float = DEFAULT_LOOPBACK_BW
    cores: int = DEFAULT_CORES
    cpu_cost_per_msg: float = DEFAULT_CPU_COST_PER_MSG_NS
    mtu_bytes: int = DEFAULT_MTU_BYTES
    replication_delay: int = DEFAULT_REPLICATION_DELAY_NS
    read_latency_ns: int = DEFAULT_READ_LATENCY_NS
    record_size_target: int = RECORD_SIZE_TARGET
    queued_max_requests: int = DEFAULT_QUEUED_MAX_REQUESTS
    background_pps: float = DEFAULT_BACKGROUND_PPS
    background_packet_bytes: int = DEFAULT_BACKGROUND_PACKET_BYTES
    tcp_window_bytes: int = DEFAULT_TCP_WINDOW_BYTES
    split_receive_cpu_ns: int = DEFAULT_SPLIT_RECEIVE_CPU_NS
    heap_old_gen_bytes: int = DEFAULT_HEAP_OLD_GEN_BYTES
    full_gc_ns_per_mb: int = DEFAULT_FULL_GC_NS_PER_MB

    def __post_init__(self) -> None:
        for name in ("disk_write_bw", "effective_disk_bw", "nic_bw", "loopback_bw"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if min(self.cores, self.mtu_bytes, self.queued_max_requests, self.tcp_window_bytes, self.heap_old_gen_bytes) < 1:
            raise ValueError("cores, mtu_bytes, queued_max_requests, tcp_window_bytes and heap_old_gen_bytes must be >= 1")
        for name in (
            "cpu_cost_per_msg", "replication_delay", "read_latency_ns", "background_pps",
            "split_receive_cpu_ns", "full_gc_ns_per_mb",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class Locality:
    """Where a sender runs relative to the broker it writes to."""

    kind: str = "local"
    host: Optional[str] = None

    @property
    def is_local(self) -> bool:
        return self.kind == "local"

    @classmethod
    def local(cls) -> "Locality":
        return cls("local", None)

    @classmethod
    def remote(cls, host: str) -> "Locality":
        if not host:
            raise ValueError("remote locality needs a host id")
        return cls("remote", host)

    @classmethod
    def parse(cls, text: str) -> "Locality":
        value = text.strip()
        if value == "local":
            return cls.local()
        if value.startswith("remote:"):
            return cls.remote(value[len("remote:"):].strip())
        raise ValueError(f"locality must be 'local' or 'remote:<host>', got {text!r}")

    def __str__(self) -> str:
        return "local" if self.is_local else f"remote:{self.host}"


class Clock:
    """Monotonic run clock in integer nanoseconds from run start."""

    mode: ClockMode = ClockMode.VIRTUAL

    def __init__(self) -> None:
        self._now = 0

    def now(self) -> int:
        return self._now

    def advance_to(self, t_ns: int) -> int:
        if t_ns > self._now:
            self._now = int(t_ns)
        return self._now


class VirtualClock(Clock):
    """Advanced only by the simulation driver."""

    mode = ClockMode.VIRTUAL


class RealTimeClock(Clock):
    """Follows the OS monotonic clock from construction on."""

    mode = ClockMode.REALTIME

    def __init__(self) -> None:
        super().__init__()
        self._origin = time.monotonic_ns()

    def now(self) -> int:
        return self.advance_to(time.monotonic_ns() - self._origin)


def make_clock(mode: ClockMode) -> Clock:
    if mode == ClockMode.REALTIME:
        return RealTimeClock()
    return VirtualClock()
