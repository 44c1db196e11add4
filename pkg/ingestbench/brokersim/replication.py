"""確認応答のタイミングを決めます。
acks=0 は送信バッファ投入時、acks=1 はリーダーの書き込み完了時、
acks=all は同期レプリカ全員の書き込み完了に replication_delay を足した時刻の最大値です。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Optional, Set

import numpy as np

from ingestbench.core import Acks, ResourceProfile
from ingestbench.errors import NotEnoughReplicas

if TYPE_CHECKING:
    from ingestbench.producer.request import RequestGroup


@dataclass
class AckRequest:
    """Completion record of one produce request; in_sync lists followers only."""

    enqueued_at: float
    leader_done_at: Optional[float] = None
    replica_done_at: Dict[int, float] = field(default_factory=dict)
    in_sync: Set[int] = field(default_factory=set)
    min_insync_replicas: int = 1


def ack_time(request: AckRequest, acks: Acks, profile: ResourceProfile) -> float:
    if acks == Acks.ACKS0:
        return request.enqueued_at
    if request.leader_done_at is None:
        raise ValueError("leader write has not completed")
    if acks == Acks.ACKS1:
        return request.leader_done_at
    # リーダー自身も in_sync に数える
    if len(request.in_sync) + 1 < request.min_insync_replicas:
        raise NotEnoughReplicas(
            f"{len(request.in_sync) + 1} in-sync replicas, {request.min_insync_replicas} required"
        )
    done = request.leader_done_at
    for replica in request.in_sync:
        if replica not in request.replica_done_at:
            raise ValueError(f"replica {replica} has not completed")
        done = max(done, request.replica_done_at[replica] + profile.replication_delay)
    return done


class ReplicationMixin:
    """Acknowledged prefixes and ack times of in-flight request groups."""

    def _in_sync_followers(self, group: "RequestGroup") -> Set[int]:
        replicas = group.producer.topic.replicas[group.partition]
        return {broker_id for broker_id in replicas.followers if broker_id in replicas.in_sync}

    def check_insync(self, group: "RequestGroup", acks: Acks, min_insync: int) -> None:
        if acks != Acks.ALL:
            return
        in_sync = group.producer.topic.replicas[group.partition].in_sync
        if len(in_sync) < min_insync:
            raise NotEnoughReplicas(
                f"partition {group.partition}: {len(in_sync)} in-sync replicas, {min_insync} required"
            )

    def acked_prefix(self, group: "RequestGroup", acks: Acks, min_insync: int) -> int:
        """Number of leading batches of group whose ack condition holds."""
        if acks == Acks.ACKS0:
            return len(group)
        if acks == Acks.ACKS1:
            return group.leader_done
        self.check_insync(group, acks, min_insync)
        prefix = group.leader_done
        for follower in self._in_sync_followers(group):
            prefix = min(prefix, group.replica_done.get(follower, 0))
        return prefix

    def ack_times(self, group: "RequestGroup", lo: int, hi: int, acks: Acks) -> np.ndarray:
        if acks == Acks.ACKS0:
            return group.enqueued_at[lo:hi].copy()
        times = group.appended_at[lo:hi].copy()
        if acks == Acks.ALL:
            for follower in self._in_sync_followers(group):
                replica = group.replica_done_at[follower][lo:hi] + self.profile.replication_delay
                times = np.maximum(times, replica)
        return times
