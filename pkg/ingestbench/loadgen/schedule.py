"""遅延ベースの送信スケジューラです。
送信スロットは開始時刻から delay_ns ごとの格子に並び、詰まっている間に過ぎたスロットは捨てます。
送信にかかるコストが delay を上回ると、実効レートは 1e9 / コストで頭打ちになります。
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from ingestbench.constants import NS_PER_S
from ingestbench.errors import InvalidDelay

Number = Union[int, float, Fraction]


def rate_from_delay(delay_ns: int) -> Fraction:
    if delay_ns <= 0:
        raise InvalidDelay(f"delay_ns must be >= 1, got {delay_ns}")
    return Fraction(NS_PER_S, int(delay_ns))


def delay_for_rate(mps: Number) -> int:
    """Inverse of rate_from_delay; exact when mps divides 1e9."""
    if mps <= 0:
        raise InvalidDelay(f"rate must be > 0, got {mps}")
    delay = Fraction(NS_PER_S) / Fraction(mps)
    return max(1, round(delay))


@dataclass
class SendWindow:
    """Send executions inside one engine step: a first send, then a uniform run."""

    count: int
    first_at: float
    second_at: float
    interval: float

    def time_of(self, j):
        """Execution time of the j-th send (0-based) of this window."""
        if isinstance(j, int):
            return self.first_at if j == 0 else self.second_at + (j - 1) * self.interval
        # numpy 配列にも同じ式を当てる
        return (j > 0) * (self.second_at + (j - 1) * self.interval) + (j == 0) * self.first_at

    @property
    def last_at(self) -> float:
        return self.time_of(self.count - 1)


class FixedDelaySchedule:
    """Grid of slots every delay_ns from start_ns; slots missed while busy are dropped."""

    def __init__(self, delay_ns: int, start_ns: int, end_ns: int):
        rate_from_delay(delay_ns)
        self.delay_ns = int(delay_ns)
        self.start_ns = int(start_ns)
        self.end_ns = int(end_ns)

    def slots_before(self, t_ns: float) -> int:
        """Grid slots in [start, min(t, end))."""
        horizon = min(t_ns, self.end_ns) - self.start_ns
        if horizon <= 0:
            return 0
        return int(math.ceil(horizon / self.delay_ns))

    def slot_after(self, t_ns: float) -> float:
        """First grid slot strictly after t."""
        k = math.floor((t_ns - self.start_ns) / self.delay_ns) + 1
        return float(self.start_ns + k * self.delay_ns)

    def window(self, ready_at: float, limit_ns: float, cost_ns: float) -> SendWindow:
        """Executions in [ready_at, limit) for a sender that is free at ready_at.

        Each send keeps the sender busy for cost_ns; the next one runs at the later
        of its end and the next grid slot.
        """
        limit = min(limit_ns, float(self.end_ns))
        if ready_at >= limit:
            return SendWindow(0, ready_at, ready_at, float(self.delay_ns))
        if cost_ns > self.delay_ns:
            interval = float(cost_ns)
            second = ready_at + interval
        else:
            interval = float(self.delay_ns)
            second = max(self.slot_after(ready_at), ready_at + cost_ns)
        if second >= limit:
            return SendWindow(1, ready_at, second, interval)
        count = 1 + int(math.ceil((limit - second) / interval))
        return SendWindow(count, ready_at, second, interval)

    def next_after(self, window: SendWindow, sent: int, cost_ns: float) -> float:
        """When the sender is ready again after the first `sent` executions of window."""
        if sent == 0:
            return window.first_at
        last = window.time_of(sent - 1)
        if cost_ns > self.delay_ns:
            return last + cost_ns
        return max(self.slot_after(last), last + cost_ns)
