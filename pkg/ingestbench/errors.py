"""ingestbench 全体で使う例外を定義します。
検証エラーは ValueError も継承し、呼び出し側がどちらでも捕まえられるようにします。
設定ファイルのエラーは ConfigError にまとめ、CLI の終了コード 2 に対応させます。
"""

from __future__ import annotations

from typing import Optional


class IngestBenchError(Exception):
    """Base class of every error raised by the toolkit."""


class InvalidRecord(IngestBenchError, ValueError):
    """Record payload is empty or otherwise unusable."""


class RecordTooLarge(InvalidRecord):
    """Record cannot fit in the producer buffer memory at all."""


class TopicExists(IngestBenchError):
    """A topic with the same name is already registered."""


class InvalidReplication(IngestBenchError, ValueError):
    """Replication factor cannot be satisfied by the cluster."""


class InvalidOffset(IngestBenchError, ValueError):
    """Fetch offset below the read-from-beginning sentinel."""


class NotEnoughReplicas(IngestBenchError):
    """In-sync replica set is smaller than min_insync_replicas."""


class ProducerClosed(IngestBenchError):
    """Send attempted on a closed producer."""


class InvalidDelay(IngestBenchError, ValueError):
    """Inter-send delay (or rate) is not strictly positive."""


class SourceError(IngestBenchError):
    """Record source could not be opened or holds no records."""


class InvalidMark(IngestBenchError, ValueError):
    """Meter mark with a non-positive count."""


class MalformedLine(IngestBenchError, ValueError):
    """Graphite plaintext line that does not parse."""


class UnknownSeries(IngestBenchError):
    """Metric path not present in the series store."""


class InsufficientData(IngestBenchError, ValueError):
    """Series too short for steady-rate detection."""


class ConfigError(IngestBenchError, ValueError):
    """Run configuration could not be parsed."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class UnknownKey(ConfigError):
    """Key not defined for its section."""


class MissingSection(ConfigError):
    """Required section absent from the configuration."""


class TypeMismatch(ConfigError):
    """Value outside the domain of its key."""
