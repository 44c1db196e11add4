from ingestbench.loadgen.schedule import FixedDelaySchedule, SendWindow, delay_for_rate, rate_from_delay
from ingestbench.loadgen.sender import Sender, SenderSpec, SenderStats, run_sender
from ingestbench.loadgen.sources import (
    DataSource,
    DataSourceSpec,
    InMemorySource,
    IteratorSource,
    SourceKind,
    gen_synthetic,
    next_record,
    open_source,
)

__all__ = [
    "DataSource",
    "DataSourceSpec",
    "FixedDelaySchedule",
    "InMemorySource",
    "IteratorSource",
    "SendWindow",
    "Sender",
    "SenderSpec",
    "SenderStats",
    "SourceKind",
    "delay_for_rate",
    "gen_synthetic",
    "next_record",
    "open_source",
    "rate_from_delay",
    "run_sender",
]
