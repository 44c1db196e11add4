from __future__ import annotations

import numpy as np
import pytest

from ingestbench.brokersim import Cluster, Link
from ingestbench.brokersim.network import packet_count
from ingestbench.constants import IFACE_ETH0, IFACE_LOOPBACK
from ingestbench.core import Locality
from ingestbench.producer.request import RequestGroup, Span


def test_packets_per_request() -> None:
    assert packet_count(1500, 1500) == 1
    assert packet_count(1501, 1500) == 2
    assert packet_count(np.array([1500, 1501, 16_384]), 1500) == 1 + 2 + 11


def test_remote_delivery_counts_eth0_packets() -> None:
    cluster = Cluster(brokers=3)
    event = cluster.deliver(1500, Locality.remote("ext1"))
    assert event.interface == IFACE_ETH0
    assert event.packets == 1
    assert cluster.deliver(1501, Locality.remote("ext1")).packets == 2
    eth0 = cluster.broker(1).interfaces[IFACE_ETH0]
    assert eth0.packets_rx.value == 3
    assert eth0.bytes_rx.value == 3001
    assert cluster.broker(1).interfaces[IFACE_LOOPBACK].bytes_rx.value == 0


def test_local_delivery_stays_on_loopback() -> None:
    cluster = Cluster(brokers=3)
    event = cluster.deliver(4000, Locality.local(), broker_id=2)
    assert event.interface == IFACE_LOOPBACK
    assert event.host == "broker2"
    assert cluster.broker(2).interfaces[IFACE_ETH0].bytes_rx.value == 0


def test_deliveries_queue_behind_each_other() -> None:
    cluster = Cluster(brokers=1)
    first = cluster.deliver(117_500, Locality.remote("ext1"))
    second = cluster.deliver(117_500, Locality.remote("ext1"))
    assert first.arrive_at == pytest.approx(1_000_000)
    assert second.arrive_at == pytest.approx(2_000_000)


def test_delivery_needs_bytes() -> None:
    with pytest.raises(ValueError):
        Cluster().deliver(0, Locality.local())


def _span(sizes, ready) -> Span:
    group = RequestGroup(None, 0, np.array(sizes), np.ones(len(sizes)), np.array(ready, dtype=float))
    return group.span()


def test_link_completion_times_follow_the_fifo_recurrence() -> None:
    link = Link("test", "h", IFACE_ETH0, bw=1e9)
    link.push(_span([100, 100, 100], [0, 0, 500]))
    done = link.serve(250)
    assert len(done) == 1
    assert list(done[0].ready) == [100, 200]
    assert link.busy_until == 200
    rest = link.serve(1_000)
    assert list(rest[0].ready) == [600]
    assert link.queued_batches == 0


def test_link_stalls_when_downstream_is_full() -> None:
    link = Link("test", "h", IFACE_ETH0, bw=1e9)
    link.push(_span([100, 100], [0, 0]))
    done = link.serve(1_000, limit=1)
    assert len(done[0]) == 1
    assert link.busy_until == 1_000
    assert link.queued_batches == 1


def test_routes_by_host() -> None:
    cluster = Cluster(brokers=3)
    assert [l.iface for l in cluster.route("broker1", 1)] == [IFACE_LOOPBACK]
    remote = cluster.route("broker2", 1)
    assert [l.name for l in remote] == ["broker2/uplink", "broker1/eth0"]
    assert cluster.route("ext1", 1)[0] is cluster.route("ext1", 2)[0]


def test_background_traffic_only_on_eth0() -> None:
    cluster = Cluster(brokers=1)
    for step in range(20):
        cluster.advance(step * 50_000_000, (step + 1) * 50_000_000)
    counters = cluster.broker(1).interfaces
    assert counters[IFACE_ETH0].packets_rx.value == pytest.approx(40)
    assert counters[IFACE_LOOPBACK].packets_rx.value == 0


if __name__ == "__main__":
    test_packets_per_request()
    test_remote_delivery_counts_eth0_packets()
    test_local_delivery_stays_on_loopback()
    test_deliveries_queue_behind_each_other()
    test_delivery_needs_bytes()
    test_link_completion_times_follow_the_fifo_recurrence()
    test_link_stalls_when_downstream_is_full()
    test_routes_by_host()
    test_background_traffic_only_on_eth0()
    print("NETWORK_MODEL_TEST_OK")
