# ingestbench/producer/buffer.py
from __future__ import annotations

from ingestbench.errors import RecordTooLarge


class BufferAccount:
    """Producer buffer memory: reservations block (never fail) when full."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("buffer capacity must be >= 1")
        self.capacity = capacity
        self.in_use = 0

    @property
    def free(self) -> int:
        return self.capacity - self.in_use

    def check_fits(self, n: int) -> None:
        if n > self.capacity:
            raise RecordTooLarge(f"{n}-byte record exceeds buffer memory of {self.capacity} bytes")

    def can_reserve(self, n: int) -> bool:
        return n <= self.free

    def reserve(self, n: int) -> bool:
        if n < 0:
            raise ValueError("reservation must be >= 0")
        self.check_fits(n)
        if not self.can_reserve(n):
            return False
        self.in_use += n
        return True

    def release(self, n: int) -> None:
        if n < 0 or n > self.in_use:
            raise ValueError(f"release of {n} bytes with {self.in_use} in use")
        self.in_use -= n
