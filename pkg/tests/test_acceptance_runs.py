"""既定のシナリオを仮想時間で最後まで走らせ、測定値の帯域を確かめます。
1 本あたり数秒から十数秒かかります。
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import List, Tuple

import numpy as np

from ingestbench.bench.config import parse_config
from ingestbench.bench.runner import RunResult, execute
from ingestbench.bench.scenarios import scenario_config
from ingestbench.constants import (
    BYTES_IN_RATE,
    IF_PACKETS_RX,
    IFACE_ETH0,
    LOAD_SHORTTERM,
    MESSAGES_IN_RATE,
    RAMP_SKIP_S,
    TAIL_SKIP_S,
)
from ingestbench.metrics.export import write_series


@lru_cache(maxsize=None)
def _run(name: str) -> RunResult:
    return execute(parse_config(scenario_config(name)))


def _leader_host(result: RunResult) -> str:
    cluster = result.simulation.cluster
    topic = next(iter(cluster.topics.values()))
    return cluster.broker(topic.leader_of(0)).host.name


def _window(points: List[Tuple[int, float]], duration_s: int = 600) -> np.ndarray:
    lo, hi = RAMP_SKIP_S, duration_s - TAIL_SKIP_S
    return np.array([v for t, v in points if lo <= t <= hi])


def test_100k_is_steady_near_configured() -> None:
    result = _run("100k-acks0")
    assert result.steady
    assert 98_000 <= result.steady_rate <= 102_000
    sent = result.conservation.sent
    assert abs(sent - 60_000_000) <= 600_000
    assert result.conservation.balanced


def test_100k_holds_for_every_acks_mode() -> None:
    for acks in ("1", "all"):
        result = _run(f"100k-acks{acks}")
        assert result.steady
        assert 98_000 <= result.steady_rate <= 102_000
        assert result.conservation.balanced


def test_100k_run_is_fast_in_virtual_time() -> None:
    result = _run("100k-acks0")
    assert result.wall_s < 10


def test_100k_local_keeps_load_low_and_eth0_quiet() -> None:
    result = _run("100k-acks0")
    host = _leader_host(result)
    load = np.array([v for _, v in result.series[LOAD_SHORTTERM.format(host=host)]])
    assert load.max() < 8
    packets = _window(result.series[IF_PACKETS_RX.format(host=host, iface=IFACE_ETH0)])
    assert packets.mean() < 100


def test_acks_do_not_change_single_replica_rate() -> None:
    acks1 = _run("100k-acks1")
    acks_all = _run("100k-acksall")
    assert acks1.series[MESSAGES_IN_RATE] == acks_all.series[MESSAGES_IN_RATE]


def test_acks_do_not_change_any_exported_series(tmp_path: Path) -> None:
    exported = {}
    for acks in ("1", "all"):
        sim = _run(f"100k-acks{acks}").simulation
        last = max(ts for ts, _ in sim.store.points(MESSAGES_IN_RATE))
        files = write_series(sim.store, tmp_path / acks, sim.store.paths(), sim.epoch_s, last)
        exported[acks] = {f.name: f.read_bytes() for f in files}
    assert len(exported["1"]) > 1
    assert exported["1"] == exported["all"]


def test_iterator_source_caps_the_rate() -> None:
    result = _run("250k-iterator")
    assert 205_000 <= result.steady_rate <= 235_000
    stats = result.sender_stats[0]
    assert stats.sent < stats.attempted


def test_in_memory_source_keeps_up_at_250k() -> None:
    result = _run("250k-ram")
    assert result.steady
    assert 245_000 <= result.steady_rate <= 255_000


def test_1000k_saturates_below_configured() -> None:
    result = _run("1000k-acks0")
    assert result.steady_rate < result.configured_rate
    assert result.steady_rate < 450_000
    assert abs(result.steady_bytes - 92_000_000) <= 0.05 * 92_000_000
    assert max(v for _, v in result.series[BYTES_IN_RATE]) <= 1.01 * 92_000_000
    assert result.conservation.balanced


def test_remote_sender_moves_packets_over_eth0() -> None:
    result = _run("250k-remote")
    host = _leader_host(result)
    packets = _window(result.series[IF_PACKETS_RX.format(host=host, iface=IFACE_ETH0)])
    assert 22_500 <= packets.mean() <= 37_500


def test_two_remote_senders() -> None:
    result = _run("500k-two-remote")
    assert result.steady
    assert 400_000 <= result.steady_rate <= 440_000


def test_two_local_senders_overload_the_broker() -> None:
    result = _run("500k-two-local")
    host = _leader_host(result)
    load = _window(result.series[LOAD_SHORTTERM.format(host=host)])
    assert load.mean() > 8
    assert not result.steady or result.steady_rate < 400_000


def test_large_acknowledged_batches_never_settle() -> None:
    for acks in ("1", "all"):
        result = _run(f"1000k-acks{acks}-batch65540")
        assert not result.steady
        assert result.cv > 0.05
        cluster = result.simulation.cluster
        heap = cluster.broker(cluster.topics["ingest"].leader_of(0)).heap
        assert heap.collections >= 2
        load = _window(result.series[LOAD_SHORTTERM.format(host=_leader_host(result))])
        assert load.mean() > 8
        assert result.conservation.balanced


def test_large_batches_without_acks_settle_lower() -> None:
    result = _run("1000k-acks0-batch65540")
    assert result.steady
    assert 250_000 <= result.steady_rate <= 340_000
    assert result.steady_rate < _run("1000k-acks0").steady_rate
    assert all(b.heap.collections == 0 for b in result.simulation.cluster.brokers)


def test_log_holds_every_sent_record() -> None:
    result = _run("100k-acks0")
    cluster = result.simulation.cluster
    topic = next(iter(cluster.topics.values()))
    (log,) = topic.leader_logs()
    total = len(log)
    assert total == result.conservation.sent
    assert len(log.fetch(-1)) == total
    tail = log.fetch(total - 11)
    assert list(tail.offsets) == list(range(total - 10, total))


def test_same_seed_same_series() -> None:
    text = scenario_config("250k-ram").replace("duration_s = 600", "duration_s = 300")
    first = execute(parse_config(text, run_overrides={"seed": 3}))
    second = execute(parse_config(text, run_overrides={"seed": 3}))
    assert first.series == second.series
    assert first.conservation == second.conservation


if __name__ == "__main__":
    test_100k_is_steady_near_configured()
    test_iterator_source_caps_the_rate()
    test_1000k_saturates_below_configured()
    print("ACCEPTANCE_RUNS_TEST_OK")
