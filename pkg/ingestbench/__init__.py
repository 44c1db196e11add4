"""Kafka 取り込みレートのベンチマークツールキットです。"""

__version__ = "0.4.0"
