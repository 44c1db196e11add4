from ingestbench.brokersim.cluster import BrokerNode, Cluster
from ingestbench.brokersim.disk import DiskMixin, DiskQueue
from ingestbench.brokersim.heap import BrokerHeap, HeapMixin
from ingestbench.brokersim.load import Host, SystemLoadMixin
from ingestbench.brokersim.log import LogEntry, PartitionLog, append, fetch
from ingestbench.brokersim.network import ArrivalEvent, InterfaceCounters, Link, NetworkMixin
from ingestbench.brokersim.replication import AckRequest, ReplicationMixin, ack_time
from ingestbench.brokersim.topics import ReplicaSet, TopicAdminMixin, TopicHandle, create_topic

__all__ = [
    "AckRequest",
    "ArrivalEvent",
    "BrokerHeap",
    "BrokerNode",
    "Cluster",
    "DiskMixin",
    "DiskQueue",
    "HeapMixin",
    "Host",
    "InterfaceCounters",
    "Link",
    "LogEntry",
    "NetworkMixin",
    "PartitionLog",
    "ReplicaSet",
    "ReplicationMixin",
    "SystemLoadMixin",
    "TopicAdminMixin",
    "TopicHandle",
    "ack_time",
    "append",
    "create_topic",
    "fetch",
]
