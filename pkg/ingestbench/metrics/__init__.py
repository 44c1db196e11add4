from ingestbench.metrics.carbon import CarbonListener, GraphiteClient
from ingestbench.metrics.export import export_tsv, parse_tsv, write_series
from ingestbench.metrics.graphite import MetricPoint, encode_line, format_value, parse_line
from ingestbench.metrics.meter import BrokerTopicMeters, Counter, LoadAverage, RateMeter
from ingestbench.metrics.store import SeriesStore

__all__ = [
    "BrokerTopicMeters",
    "CarbonListener",
    "Counter",
    "GraphiteClient",
    "LoadAverage",
    "MetricPoint",
    "RateMeter",
    "SeriesStore",
    "encode_line",
    "export_tsv",
    "format_value",
    "parse_line",
    "parse_tsv",
    "write_series",
]
