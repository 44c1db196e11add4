from __future__ import annotations

from ingestbench.brokersim import (
    Cluster,
    DiskMixin,
    HeapMixin,
    NetworkMixin,
    ReplicationMixin,
    SystemLoadMixin,
    TopicAdminMixin,
)


def test_cluster_is_composed_of_the_broker_mixins() -> None:
    for mixin in (TopicAdminMixin, NetworkMixin, DiskMixin, HeapMixin, ReplicationMixin, SystemLoadMixin):
        assert issubclass(Cluster, mixin)


def test_each_mixin_owns_its_methods() -> None:
    assert "create_topic" in TopicAdminMixin.__dict__
    assert "deliver" in NetworkMixin.__dict__
    assert "submit" in NetworkMixin.__dict__
    assert "connection_room" in NetworkMixin.__dict__
    assert "disk_room" in DiskMixin.__dict__
    assert "replicate" in DiskMixin.__dict__
    assert "split_receive" in HeapMixin.__dict__
    assert "retain" in HeapMixin.__dict__
    assert "acked_prefix" in ReplicationMixin.__dict__
    assert "check_insync" in ReplicationMixin.__dict__
    assert "sample_load" in SystemLoadMixin.__dict__
    assert "tick_all" in SystemLoadMixin.__dict__
    for name in ("create_topic", "deliver", "disk_room", "retain", "acked_prefix", "tick_all"):
        assert name not in Cluster.__dict__


def test_brokers_live_on_their_own_hosts() -> None:
    cluster = Cluster(brokers=3)
    assert [b.host.name for b in cluster.brokers] == ["broker1", "broker2", "broker3"]
    assert cluster.broker(2).disk_queue.jobs == 0
    try:
        cluster.broker(4)
    except KeyError:
        pass
    else:
        raise AssertionError("broker 4 should not exist")


if __name__ == "__main__":
    test_cluster_is_composed_of_the_broker_mixins()
    test_each_mixin_owns_its_methods()
    test_brokers_live_on_their_own_hosts()
    print("CLUSTER_MIXINS_TEST_OK")
