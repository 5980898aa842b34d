"""Seeded synthetic TCP traffic.

All randomness comes from one :class:`~streamguard.prng.SplitMix64` stream
seeded with ``profile.seed`` and consumed in this order:

1. connection tuples (see :func:`gen_tuples`);
2. per connection, in tuple order: ISN (``next_u64() & 0xFFFFFFFF``), the
   data packet count ``between(*packets_per_conn)``, then for each data
   packet its size ``between(*payload_bytes)`` followed by ``fill(size)``;
3. interleaving: while connections remain, ``below(active)`` picks the next
   connection to emit from, then the clock advances by
   ``1000 + below(1000)`` microseconds.

Each connection emits a SYN and then ACK|PSH data packets in sequence order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .hashing import FourTuple
from .packet import RawFrame, TcpFlags, build_frame
from .prng import SplitMix64
from .reassembly import MSS

PROFILES = ("uniform", "enterprise", "constant_sum")
START_TIME_US = 1_700_000_000_000_000
ENTERPRISE_CLIENT_NET = 0x0A000000  # 10.0.0.0/24
ENTERPRISE_SERVER = 0x0A01000A  # 10.1.0.10
ENTERPRISE_PORTS = (80, 443, 25, 53)
EPHEMERAL_BASE = 49152


@dataclass(frozen=True)
class TrafficProfile:
    name: str
    count: int
    seed: int = 0
    packets_per_conn: tuple[int, int] = (1, 4)
    payload_bytes: tuple[int, int] = (1, MSS)

    def __post_init__(self) -> None:
        if self.name not in PROFILES:
            raise ValueError(f"unknown profile {self.name!r}; expected one of {PROFILES}")
        if self.count < 0:
            raise ValueError("count must be non-negative")
        lo, hi = self.packets_per_conn
        if not 0 <= lo <= hi:
            raise ValueError("packets_per_conn must satisfy 0 <= lo <= hi")
        lo, hi = self.payload_bytes
        if not 0 <= lo <= hi:
            raise ValueError("payload_bytes must satisfy 0 <= lo <= hi")


def _uniform(rng: SplitMix64, count: int) -> list[FourTuple]:
    seen: set[FourTuple] = set()
    out = []
    while len(out) < count:
        a, b = rng.next_u64(), rng.next_u64()
        t = FourTuple(a >> 32, a & 0xFFFFFFFF, b >> 48, (b >> 32) & 0xFFFF)
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def _enterprise(rng: SplitMix64, count: int) -> list[FourTuple]:
    seen: set[FourTuple] = set()
    out = []
    port_counter = 0
    while len(out) < count:
        client = ENTERPRISE_CLIENT_NET + 1 + rng.below(254)
        dport = ENTERPRISE_PORTS[rng.below(len(ENTERPRISE_PORTS))]
        sport = EPHEMERAL_BASE + port_counter % (65536 - EPHEMERAL_BASE)
        port_counter += 1
        t = FourTuple(client, ENTERPRISE_SERVER, sport, dport)
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def _constant_sum(rng: SplitMix64, count: int) -> list[FourTuple]:
    # src_ip counts up while dst_ip counts down, so the field sum never moves.
    span = (1 << 32) - count
    if span <= 0:
        raise ValueError("constant_sum supports fewer than 2**32 connections")
    base_src = rng.below(span)
    base_dst = count + rng.below(span)
    sport = rng.below(1 << 16)
    dport = rng.below(1 << 16)
    return [FourTuple(base_src + i, base_dst - i, sport, dport) for i in range(count)]


_GENERATORS = {"uniform": _uniform, "enterprise": _enterprise, "constant_sum": _constant_sum}


def gen_tuples(profile: TrafficProfile, rng: SplitMix64 | None = None) -> list[FourTuple]:
    """Distinct connection tuples for ``profile`` (consumes ``rng`` if given)."""
    if rng is None:
        rng = SplitMix64(profile.seed)
    return _GENERATORS[profile.name](rng, profile.count)


def gen_traffic(profile: TrafficProfile) -> Iterator[RawFrame]:
    rng = SplitMix64(profile.seed)
    tuples = gen_tuples(profile, rng)

    pending: list[list[bytes]] = []
    for t in tuples:
        isn = rng.next_u64() & 0xFFFFFFFF
        frames = [build_frame(t, isn, TcpFlags.SYN)]
        seq = (isn + 1) & 0xFFFFFFFF
        for _ in range(rng.between(*profile.packets_per_conn)):
            payload = rng.fill(rng.between(*profile.payload_bytes))
            frames.append(build_frame(t, seq, TcpFlags.ACK | TcpFlags.PSH, payload))
            seq = (seq + len(payload)) & 0xFFFFFFFF
        frames.reverse()  # pop() from the end yields packets in order
        pending.append(frames)

    clock = START_TIME_US
    while pending:
        j = rng.below(len(pending))
        frames = pending[j]
        yield RawFrame(frames.pop(), clock)
        if not frames:
            pending.pop(j)
        clock += 1000 + rng.below(1000)
