from __future__ import annotations

import pytest

from ingestbench.brokersim import BrokerHeap, Cluster
from ingestbench.constants import MB
from ingestbench.core import Acks, ProducerProps, ResourceProfile, TopicConfig
from ingestbench.loadgen import SenderSpec, run_sender
from ingestbench.simulate import Simulation


class _Producer:
    def __init__(self, batch_size_bytes: int, acks: Acks = Acks.ACKS1):
        self.props = ProducerProps(acks=acks, batch_size_bytes=batch_size_bytes)


class _Group:
    def __init__(self, producer: _Producer):
        self.producer = producer


class _Span:
    def __init__(self, producer: _Producer, batches: int):
        self.group = _Group(producer)
        self.batches = batches

    def __len__(self) -> int:
        return self.batches


def test_heap_fills_without_pausing() -> None:
    heap = BrokerHeap(capacity=10 * MB, ns_per_mb=1_000_000)
    heap.promote(4 * MB, now=0.0)
    heap.promote(5 * MB, now=1.0)
    assert heap.old_gen == 9 * MB
    assert heap.collections == 0
    assert not heap.paused(2.0)


def test_full_heap_stops_the_world() -> None:
    heap = BrokerHeap(capacity=10 * MB, ns_per_mb=1_000_000)
    heap.promote(12 * MB, now=100.0)
    assert heap.collections == 1
    assert heap.old_gen == 0
    assert heap.paused_until == pytest.approx(100.0 + 12_000_000)
    assert heap.paused(100.0 + 11_999_999)
    assert not heap.paused(heap.paused_until)

    # 停止中に溜まった分では次の GC は始まらない
    heap.promote(20 * MB, now=200.0)
    assert heap.collections == 1
    assert heap.old_gen == 20 * MB
    heap.promote(1, now=heap.paused_until)
    assert heap.collections == 2
    assert heap.paused_ns == pytest.approx(12_000_000 + (20 * MB + 1) / MB * 1_000_000)


def test_only_batches_beyond_the_tcp_window_split() -> None:
    cluster = Cluster(brokers=3)
    window = cluster.profile.tcp_window_bytes
    assert not cluster.oversized(_Producer(16_384))
    assert not cluster.oversized(_Producer(window))
    assert cluster.oversized(_Producer(window + 1))


def test_split_receives_show_up_as_broker_cpu_demand() -> None:
    cluster = Cluster(brokers=3)
    cluster.split_receive(1, _Span(_Producer(65_540), batches=3))
    cluster.split_receive(1, _Span(_Producer(16_384), batches=3))
    cluster.sample_load({})
    expected = 3 * cluster.profile.split_receive_cpu_ns / cluster.step_ns
    assert cluster.hosts["broker1"].runnable == pytest.approx(expected)
    cluster.sample_load({})
    assert cluster.hosts["broker1"].runnable == 0


def test_paused_broker_runs_one_gc_thread_per_core() -> None:
    cluster = Cluster(brokers=3)
    heap = cluster.broker(1).heap
    heap.promote(heap.capacity, now=0.0)
    cluster.sample_load({}, now=1.0)
    host = cluster.hosts["broker1"]
    assert host.runnable == host.cores
    assert cluster.gc_paused(1, 1.0)
    assert not cluster.gc_paused(2, 1.0)
    cluster.sample_load({}, now=heap.paused_until)
    assert host.runnable == 0


def _run_large_batches(acks: Acks):
    profile = ResourceProfile(heap_old_gen_bytes=20 * MB, full_gc_ns_per_mb=20_000_000)
    sim = Simulation(profile)
    topic = sim.create_topic(TopicConfig("ingest"))
    props = ProducerProps(acks=acks, batch_size_bytes=65_540)
    spec = SenderSpec(delay_ns=1_000, duration_s=2, producer=props)
    producer = sim.new_producer(topic, spec.producer, spec.locality)
    stats = run_sender(spec, producer)
    return sim, topic, producer, stats


def test_acknowledged_large_batches_trigger_full_gc() -> None:
    sim, topic, producer, stats = _run_large_batches(Acks.ACKS1)
    heap = sim.cluster.broker(topic.leader_of(0)).heap
    assert sim.cluster.oversized(producer)
    assert heap.collections >= 1
    assert heap.paused_ns > 0
    assert topic.total_next_offset() == stats.sent


def test_fire_and_forget_batches_leave_the_heap_alone() -> None:
    sim, topic, producer, stats = _run_large_batches(Acks.ACKS0)
    assert sim.cluster.oversized(producer)
    assert all(broker.heap.collections == 0 for broker in sim.cluster.brokers)
    assert all(broker.heap.old_gen == 0 for broker in sim.cluster.brokers)
    assert topic.total_next_offset() == stats.sent


if __name__ == "__main__":
    test_heap_fills_without_pausing()
    test_full_heap_stops_the_world()
    test_only_batches_beyond_the_tcp_window_split()
    test_split_receives_show_up_as_broker_cpu_demand()
    test_paused_broker_runs_one_gc_thread_per_core()
    test_acknowledged_large_batches_trigger_full_gc()
    test_fire_and_forget_batches_leave_the_heap_alone()
    print("BROKER_HEAP_TEST_OK")
