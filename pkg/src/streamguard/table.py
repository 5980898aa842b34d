"""Connection table: power-of-two slots with chained collision resolution."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .hashing import FourTuple, HashConfig
from .reassembly import PacketQueue

DEFAULT_TABLE_SIZE = 4096
DEFAULT_TIMEOUT_US = 30 * 60 * 1_000_000


class FlowState(enum.Enum):
    SYN_SEEN = "syn_seen"
    ESTABLISHED = "established"


class DuplicateFlow(KeyError):
    pass


@dataclass(eq=False)
class FlowEntry:
    """State for one directed flow, keyed by its tuple as first seen."""

    tuple: FourTuple
    last_activity: int
    state: FlowState = FlowState.SYN_SEEN
    queue: PacketQueue = field(default_factory=PacketQueue)

    @property
    def segment_cache(self) -> bytes:
        return self.queue.segment


@dataclass(frozen=True)
class TableStats:
    slots_used: int
    max_chain: int
    mean_chain: float
    count: int

    def as_dict(self) -> dict:
        return {
            "slots_used": self.slots_used,
            "max_chain": self.max_chain,
            "mean_chain": self.mean_chain,
            "count": self.count,
        }


def chain_stats(chain_lengths) -> TableStats:
    """Occupancy figures; ``mean_chain`` averages over non-empty chains only."""
    used = [n for n in chain_lengths if n]
    count = sum(used)
    return TableStats(
        slots_used=len(used),
        max_chain=max(used, default=0),
        mean_chain=count / len(used) if used else 0.0,
        count=count,
    )


class ConnectionTable:
    """Directed flows hashed into ``config.table_size`` chains.

    Lookups compare the full tuple along the chain. New entries go to the
    chain tail. Not internally locked: callers serialize access (see
    :class:`streamguard.engine.Engine`).
    """

    def __init__(self, config: HashConfig) -> None:
        self.config = config
        self.slots: list[list[FlowEntry]] = [[] for _ in range(config.table_size)]
        self.count = 0

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        for chain in self.slots:
            yield from chain

    def __contains__(self, t: FourTuple) -> bool:
        return self.lookup(t) is not None

    def lookup(self, t: FourTuple) -> FlowEntry | None:
        for entry in self.slots[self.config.slot(t)]:
            if entry.tuple == t:
                return entry
        return None

    def insert(self, t: FourTuple, now: int) -> FlowEntry:
        chain = self.slots[self.config.slot(t)]
        for entry in chain:
            if entry.tuple == t:
                raise DuplicateFlow(t)
        entry = FlowEntry(tuple=t, last_activity=now)
        chain.append(entry)
        self.count += 1
        return entry

    def remove(self, t: FourTuple) -> bool:
        chain = self.slots[self.config.slot(t)]
        for i, entry in enumerate(chain):
            if entry.tuple == t:
                del chain[i]
                self.count -= 1
                return True
        return False

    def reap(self, now: int, timeout: int) -> list[FourTuple]:
        """Remove every entry idle for strictly more than ``timeout``."""
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        removed: list[FourTuple] = []
        for i, chain in enumerate(self.slots):
            if not chain:
                continue
            keep = []
            for entry in chain:
                if now - entry.last_activity > timeout:
                    removed.append(entry.tuple)
                else:
                    keep.append(entry)
            if len(keep) != len(chain):
                self.slots[i] = keep
        self.count -= len(removed)
        return removed

    def stats(self) -> TableStats:
        return chain_stats(len(chain) for chain in self.slots)
