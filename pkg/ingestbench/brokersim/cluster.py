# ingestbench/brokersim/cluster.py
from __future__ import annotations

import logging
from typing import Dict, List, Optional

from ingestbench.brokersim.disk import DiskMixin, DiskQueue
from ingestbench.brokersim.heap import BrokerHeap, HeapMixin
from ingestbench.brokersim.load import Host, SystemLoadMixin
from ingestbench.brokersim.network import InterfaceCounters, NetworkMixin
from ingestbench.brokersim.replication import ReplicationMixin
from ingestbench.brokersim.topics import TopicAdminMixin, TopicHandle
from ingestbench.constants import DEFAULT_BROKERS, DEFAULT_STEP_MS, IFACE_ETH0, IFACE_LOOPBACK, VIRTUAL_EPOCH_S
from ingestbench.core import ResourceProfile
from ingestbench.metrics.meter import BrokerTopicMeters

logger = logging.getLogger(__name__)


class BrokerNode:
    """One broker: disk queue, heap, meters and receive counters on its host."""

    def __init__(self, broker_id: int, host: Host, profile: ResourceProfile, parent: BrokerTopicMeters):
        self.id = broker_id
        self.host = host
        self.disk = DiskQueue(host.name, broker_id, profile.effective_disk_bw)
        self.heap = BrokerHeap(profile.heap_old_gen_bytes, profile.full_gc_ns_per_mb)
        self.meters = BrokerTopicMeters(parent=parent)
        self.interfaces: Dict[str, InterfaceCounters] = {
            IFACE_ETH0: InterfaceCounters(),
            IFACE_LOOPBACK: InterfaceCounters(),
        }

    @property
    def disk_queue(self) -> DiskQueue:
        return self.disk

    @property
    def runnable_tasks(self) -> float:
        return self.host.runnable

    @property
    def io_waiting_tasks(self) -> float:
        return self.host.io_waiting

    @property
    def load_1m(self) -> float:
        return self.host.load.value


class Cluster(TopicAdminMixin, NetworkMixin, DiskMixin, HeapMixin, ReplicationMixin, SystemLoadMixin):
    """Simulated broker cluster driven in fixed steps by the engine."""

    def __init__(
        self,
        profile: Optional[ResourceProfile] = None,
        brokers: int = DEFAULT_BROKERS,
        epoch_s: int = VIRTUAL_EPOCH_S,
        step_ms: int = DEFAULT_STEP_MS,
    ):
        if brokers < 1:
            raise ValueError("a cluster needs at least one broker")
        self.profile = profile or ResourceProfile()
        self.epoch_s = epoch_s
        self.step_ns = step_ms * 1_000_000
        self.topics: Dict[str, TopicHandle] = {}
        self.meters = BrokerTopicMeters()
        self._init_load()
        self._init_network()
        self._init_disk()
        self._init_heap()
        self.brokers: List[BrokerNode] = [
            BrokerNode(i, self.host(f"broker{i}"), self.profile, self.meters)
            for i in range(1, brokers + 1)
        ]

    def broker(self, broker_id: int) -> BrokerNode:
        if not 1 <= broker_id <= len(self.brokers):
            raise KeyError(f"unknown broker {broker_id}")
        return self.brokers[broker_id - 1]

    def advance(self, step_start: float, step_end: float) -> None:
        """Move queued work through links and disks up to step_end."""
        self._serve_links(step_end)
        self._serve_disks(step_end)
        self._background(step_end - step_start)
