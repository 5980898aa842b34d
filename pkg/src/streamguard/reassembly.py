"""Per-flow packet window and assembled-segment cache.

A segment of up to ``MAX_SEGMENT`` bytes split into ``MSS``-sized packets
spans ``WINDOW`` packets. Each flow therefore keeps the last ``MAX_STORED``
payloads, and the incoming packet completes the window.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

MAX_SEGMENT = 16384
MSS = 1460
WINDOW = math.ceil(MAX_SEGMENT / MSS)
MAX_STORED = WINDOW - 1

assert WINDOW == 12 and MAX_STORED == 11


@dataclass(frozen=True)
class StoredPacket:
    seq: int
    payload: bytes
    timestamp: int


class PacketQueue:
    """FIFO of at most ``MAX_STORED`` packets plus the concatenation of their payloads.

    The cache is maintained incrementally: eviction trims the head payload's
    length off the front, commit appends the new payload. Payloads are kept in
    arrival order; sequence numbers are recorded but never used for ordering.
    """

    __slots__ = ("entries", "_segment", "max_stored")

    def __init__(self, max_stored: int = MAX_STORED) -> None:
        if max_stored < 1:
            raise ValueError("max_stored must be at least 1")
        self.entries: deque[StoredPacket] = deque()
        self._segment = bytearray()
        self.max_stored = max_stored

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def segment(self) -> bytes:
        return bytes(self._segment)

    def assemble(self, incoming: bytes) -> bytes:
        """Stored payloads in arrival order followed by ``incoming``. Pure."""
        return bytes(self._segment) + incoming

    def commit(self, packet: StoredPacket) -> StoredPacket | None:
        """Append ``packet``, evicting the head first if the queue is full.

        Returns the evicted packet, if any.
        """
        evicted = None
        if len(self.entries) >= self.max_stored:
            evicted = self.entries.popleft()
            del self._segment[: len(evicted.payload)]
        self.entries.append(packet)
        self._segment += packet.payload
        return evicted


def assemble(queue: PacketQueue, incoming: bytes) -> bytes:
    return queue.assemble(incoming)


def commit(queue: PacketQueue, packet: StoredPacket) -> StoredPacket | None:
    return queue.commit(packet)
