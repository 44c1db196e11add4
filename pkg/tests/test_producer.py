from __future__ import annotations

from typing import List, Tuple

import pytest

from ingestbench.brokersim import fetch
from ingestbench.core import Acks, Locality, ProducerProps, Record, TopicConfig
from ingestbench.errors import ProducerClosed, RecordTooLarge
from ingestbench.producer import DeliveryReceipt, Producer, flush, send
from ingestbench.simulate import Simulation


def _setup(props: ProducerProps, partitions: int = 1, locality: Locality = Locality.local()) -> Tuple[Simulation, Producer]:
    sim = Simulation()
    topic = sim.create_topic(TopicConfig("ingest", partitions=partitions))
    return sim, sim.new_producer(topic, props, locality)


def _send_many(producer: Producer, n: int, size: int = 200) -> List[DeliveryReceipt]:
    return [send(producer, Record(f"{i:0{size}d}".encode(), create_ts=i)) for i in range(n)]


def test_flush_without_records_returns_at_once() -> None:
    sim, producer = _setup(ProducerProps())
    flush(producer)
    assert sim.steps == 0


def test_flush_appends_an_open_batch() -> None:
    sim, producer = _setup(ProducerProps(acks=Acks.ACKS1))
    receipts = _send_many(producer, 10)
    assert producer.topic.log(0).next_offset == 0
    flush(producer)
    log = producer.topic.log(0)
    assert log.next_offset == 10
    assert [e.record.create_ts for e in fetch(log, -1)] == list(range(10))
    assert [r.offset for r in receipts] == list(range(10))
    assert all(r.done for r in receipts)
    assert producer.buffer.in_use == 0
    assert producer.idle


def test_acks0_receipts_resolve_at_enqueue() -> None:
    sim, producer = _setup(ProducerProps(acks=Acks.ACKS0))
    receipts = _send_many(producer, 500)
    flush(producer)
    assert all(r.resolved_at == r.enqueued_at for r in receipts)
    assert sim.cluster.meters.messages_in.count == 500


def test_single_replica_acks1_and_all_resolve_together() -> None:
    times = {}
    for acks in (Acks.ACKS1, Acks.ALL):
        _, producer = _setup(ProducerProps(acks=acks))
        receipts = _send_many(producer, 300)
        flush(producer)
        times[acks] = [r.resolved_at for r in receipts]
    assert times[Acks.ACKS1] == times[Acks.ALL]


def test_replicated_acks_all_waits_for_followers() -> None:
    resolved = {}
    for acks in (Acks.ACKS1, Acks.ALL):
        sim = Simulation()
        topic = sim.create_topic(TopicConfig("ingest", replication_factor=2))
        producer = sim.new_producer(topic, ProducerProps(acks=acks), Locality.local())
        receipts = _send_many(producer, 100)
        flush(producer)
        resolved[acks] = receipts[0].resolved_at
        sim.run_until(sim.time + 1_000_000_000)
        assert topic.log(0, broker_id=2).next_offset == 100
    assert resolved[Acks.ALL] > resolved[Acks.ACKS1]


def test_records_round_robin_over_partitions() -> None:
    _, producer = _setup(ProducerProps(batch_size_bytes=1_000), partitions=2)
    _send_many(producer, 40)
    flush(producer)
    counts = [producer.topic.log(p).next_offset for p in range(2)]
    assert sum(counts) == 40
    assert all(counts)


def test_full_buffer_blocks_until_acknowledged() -> None:
    sim, producer = _setup(ProducerProps(acks=Acks.ACKS1, batch_size_bytes=1_000, buffer_memory_bytes=2_000))
    _send_many(producer, 50)
    assert sim.steps > 0
    flush(producer)
    assert producer.topic.log(0).next_offset == 50
    assert producer.buffer.in_use == 0


def test_record_larger_than_buffer_memory_is_rejected() -> None:
    _, producer = _setup(ProducerProps(batch_size_bytes=1_000, buffer_memory_bytes=2_000))
    with pytest.raises(RecordTooLarge):
        send(producer, Record(b"x" * 5_000, create_ts=0))
    assert producer.buffer.in_use == 0
    # batch.size より大きくても buffer.memory に収まれば 1 件だけのバッチになる
    receipt = send(producer, Record(b"y" * 1_500, create_ts=1))
    flush(producer)
    assert receipt.offset == 0
    assert producer.buffer.in_use == 0


def test_closed_producer_refuses_records() -> None:
    _, producer = _setup(ProducerProps())
    producer.close()
    with pytest.raises(ProducerClosed):
        send(producer, Record(b"late", create_ts=0))


if __name__ == "__main__":
    test_flush_without_records_returns_at_once()
    test_flush_appends_an_open_batch()
    test_acks0_receipts_resolve_at_enqueue()
    test_single_replica_acks1_and_all_resolve_together()
    test_replicated_acks_all_waits_for_followers()
    test_records_round_robin_over_partitions()
    test_full_buffer_blocks_until_acknowledged()
    test_record_larger_than_buffer_memory_is_rejected()
    test_closed_producer_refuses_records()
    print("PRODUCER_TEST_OK")
