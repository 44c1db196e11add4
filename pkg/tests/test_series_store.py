from __future__ import annotations

from pathlib import Path

import pytest

from ingestbench.errors import UnknownSeries
from ingestbench.metrics import SeriesStore, export_tsv, parse_tsv, write_series
from ingestbench.metrics.export import series_filename

T0 = 1_565_000_000
RATE_PATH = "kafka.server.BrokerTopicMetrics.MessagesInPerSec.OneMinuteRate"


def test_export_two_points() -> None:
    store = SeriesStore()
    store.put(RATE_PATH, T0, 1.0)
    store.put(RATE_PATH, T0 + 5, 2.0)
    assert export_tsv(store, RATE_PATH, T0, T0 + 5) == "Time\tValue\n0\t1\n5\t2\n"


def test_empty_range_is_header_only() -> None:
    store = SeriesStore()
    store.put(RATE_PATH, T0, 1.0)
    assert export_tsv(store, RATE_PATH, T0 + 100, T0 + 200) == "Time\tValue\n"


def test_unknown_series() -> None:
    with pytest.raises(UnknownSeries):
        export_tsv(SeriesStore(), "no.such.path", 0, 10)


def test_same_slot_overwrites_and_timestamps_align() -> None:
    store = SeriesStore()
    store.put("a.b", T0 + 2, 1.0)
    store.put("a.b", T0 + 4, 3.0)
    store.put("a.b", T0 + 5, 4.0)
    assert store.points("a.b") == [(T0, 3.0), (T0 + 5, 4.0)]
    assert store.last("a.b") == (T0 + 5, 4.0)


def test_retention_drops_the_oldest() -> None:
    store = SeriesStore(retention=4)
    for i in range(6):
        store.put("a.b", T0 + 5 * i, float(i))
    assert [v for _, v in store.points("a.b")] == [2.0, 3.0, 4.0, 5.0]


def test_late_point_outside_retention_is_ignored() -> None:
    store = SeriesStore(retention=4)
    for i in range(4):
        store.put("a.b", T0 + 5 * i, float(i))
    store.put("a.b", T0 - 5, 99.0)
    assert store.points("a.b") == [(T0, 0.0), (T0 + 5, 1.0), (T0 + 10, 2.0), (T0 + 15, 3.0)]
    # 保持範囲内なら遅れて届いた点でも上書きされる
    store.put("a.b", T0 + 1, 7.0)
    assert store.points("a.b")[0] == (T0, 7.0)


def test_find_uses_graphite_globs() -> None:
    store = SeriesStore()
    for host in ("broker1", "broker2", "ext1"):
        store.put(f"collectd.{host}.load.load.shortterm", T0, 1.0)
    assert store.find("collectd.broker*.load.load.shortterm") == [
        "collectd.broker1.load.load.shortterm",
        "collectd.broker2.load.load.shortterm",
    ]
    assert store.find("collectd.*") == []


def test_written_series_are_byte_identical(tmp_path: Path) -> None:
    store = SeriesStore()
    for i in range(10):
        store.put(RATE_PATH, T0 + 5 * i, i * 1000.5)
    first = write_series(store, tmp_path / "a", [RATE_PATH], T0, T0 + 45)
    second = write_series(store, tmp_path / "b", [RATE_PATH], T0, T0 + 45)
    assert first[0].name == series_filename(RATE_PATH) == f"{RATE_PATH}.tsv"
    assert first[0].read_bytes() == second[0].read_bytes()
    assert parse_tsv(first[0].read_text())[3] == (15, 3001.5)


if __name__ == "__main__":
    import tempfile

    test_export_two_points()
    test_empty_range_is_header_only()
    test_unknown_series()
    test_same_slot_overwrites_and_timestamps_align()
    test_retention_drops_the_oldest()
    test_late_point_outside_retention_is_ignored()
    test_find_uses_graphite_globs()
    with tempfile.TemporaryDirectory() as tmp:
        test_written_series_are_byte_identical(Path(tmp))
    print("SERIES_STORE_TEST_OK")
