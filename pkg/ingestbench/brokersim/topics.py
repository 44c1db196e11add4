"""トピックの作成とレプリカ配置を担当します。
パーティション p のリーダーはブローカ (p mod N) + 1 で、フォロワーはその次のブローカから順に並べます。
各 (パーティション, レプリカ) ごとに PartitionLog を 1 つ作ります。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Set, Tuple

from ingestbench.brokersim.log import PartitionLog
from ingestbench.core import TopicConfig
from ingestbench.errors import InvalidReplication, TopicExists


@dataclass
class ReplicaSet:
    leader: int
    followers: List[int]
    in_sync: Set[int] = field(default_factory=set)

    def __post_init__(self) -> None:
        if not self.in_sync:
            self.in_sync = {self.leader, *self.followers}
        if self.leader not in self.in_sync:
            raise ValueError("leader must be in sync")

    @property
    def replicas(self) -> List[int]:
        return [self.leader, *self.followers]


@dataclass
class TopicHandle:
    config: TopicConfig
    replicas: List[ReplicaSet]
    logs: Dict[Tuple[int, int], PartitionLog]

    @property
    def name(self) -> str:
        return self.config.name

    def leader_of(self, partition: int) -> int:
        return self.replicas[partition].leader

    def log(self, partition: int, broker_id: int = 0) -> PartitionLog:
        """Replica log of partition on broker_id (the leader's by default)."""
        return self.logs[(partition, broker_id or self.leader_of(partition))]

    def leader_logs(self) -> List[PartitionLog]:
        return [self.log(p) for p in range(self.config.partitions)]

    def total_next_offset(self) -> int:
        return sum(log.next_offset for log in self.leader_logs())


class TopicAdminMixin:
    """Topic registry and replica placement."""

    def create_topic(self, config: TopicConfig) -> TopicHandle:
        if config.name in self.topics:
            raise TopicExists(f"topic already exists: {config.name}")
        broker_count = len(self.brokers)
        if config.replication_factor > broker_count:
            raise InvalidReplication(
                f"replication_factor {config.replication_factor} exceeds {broker_count} brokers"
            )
        replicas: List[ReplicaSet] = []
        logs: Dict[Tuple[int, int], PartitionLog] = {}
        for partition in range(config.partitions):
            leader = partition % broker_count + 1
            followers = [
                (leader - 1 + hop) % broker_count + 1
                for hop in range(1, config.replication_factor)
            ]
            replicas.append(ReplicaSet(leader, followers))
            for broker_id in (leader, *followers):
                logs[(partition, broker_id)] = PartitionLog(
                    config.name,
                    partition,
                    broker_id=broker_id,
                    timestamp_type=config.timestamp_type,
                    leader=broker_id == leader,
                    meters=self.broker(broker_id).meters,
                )
        handle = TopicHandle(config, replicas, logs)
        self.topics[config.name] = handle
        return handle

    def leader_of(self, topic: str, partition: int) -> int:
        return self.topics[topic].leader_of(partition)


def create_topic(cluster, config: TopicConfig) -> TopicHandle:
    return cluster.create_topic(config)
