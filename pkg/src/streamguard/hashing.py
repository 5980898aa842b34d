"""Slot computation for directed TCP 4-tuples.

Two strategies are provided:

* ``SUM_MOD``: the traditional ``(src_ip + dst_ip + src_port + dst_port) mod N``.
* ``CRYPTO_KEYED``: the 96-bit concatenation ``src_ip|dst_ip|src_port|dst_port``
  zero-padded to a 16-byte block, encrypted with AES-128 under a fixed key,
  with the slot taken from the low ``log2 N`` bits of the ciphertext.
"""

from __future__ import annotations

import enum
import ipaddress
import secrets
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .prng import SplitMix64

KEY_BYTES = 16
_MASK32 = 0xFFFFFFFF
_MASK16 = 0xFFFF


class FourTuple(NamedTuple):
    """Directed TCP connection identity. Addresses are 32-bit ints."""

    src_ip: int
    dst_ip: int
    src_port: int
    dst_port: int

    @classmethod
    def parse(cls, src_ip: str, dst_ip: str, src_port: int, dst_port: int) -> FourTuple:
        return cls(
            int(ipaddress.IPv4Address(src_ip)),
            int(ipaddress.IPv4Address(dst_ip)),
            src_port,
            dst_port,
        )

    def validate(self) -> None:
        for name in ("src_ip", "dst_ip"):
            value = getattr(self, name)
            if not 0 <= value <= _MASK32:
                raise ValueError(f"{name} out of 32-bit range: {value!r}")
        for name in ("src_port", "dst_port"):
            value = getattr(self, name)
            if not 0 <= value <= _MASK16:
                raise ValueError(f"{name} out of 16-bit range: {value!r}")

    def __str__(self) -> str:
        return (
            f"{ipaddress.IPv4Address(self.src_ip)}:{self.src_port}"
            f" -> {ipaddress.IPv4Address(self.dst_ip)}:{self.dst_port}"
        )


class Strategy(str, enum.Enum):
    SUM_MOD = "sum_mod"
    CRYPTO_KEYED = "crypto_keyed"


def reverse(t: FourTuple) -> FourTuple:
    return FourTuple(t.dst_ip, t.src_ip, t.dst_port, t.src_port)


def encode96(t: FourTuple) -> int:
    """Concatenate the tuple big-endian, ``src_ip`` in the top 32 bits."""
    return (t.src_ip << 64) | (t.dst_ip << 32) | (t.src_port << 16) | t.dst_port


def tuple_block(t: FourTuple) -> bytes:
    """The 16-byte cipher input: 12 bytes of ``encode96`` then 4 zero bytes."""
    return encode96(t).to_bytes(12, "big") + b"\x00\x00\x00\x00"


def is_power_of_two(n: int) -> bool:
    return n >= 2 and n & (n - 1) == 0


def sum_mod_key(t: FourTuple, table_size: int) -> int:
    return (t.src_ip + t.dst_ip + t.src_port + t.dst_port) % table_size


def key_from_seed(seed: int) -> bytes:
    """Derive a 128-bit key from two SplitMix64 outputs (first output is high)."""
    rng = SplitMix64(seed)
    return rng.next_u64().to_bytes(8, "big") + rng.next_u64().to_bytes(8, "big")


@dataclass(frozen=True)
class HashConfig:
    """Table size, strategy and the fixed cipher key for one table instance.

    The key never changes after construction. ``key_seed`` is recorded when
    the key was derived from a seed so reports can reproduce it.
    """

    table_size: int
    strategy: Strategy = Strategy.CRYPTO_KEYED
    key: bytes = field(default=bytes(KEY_BYTES), repr=False)
    key_seed: int | None = None

    def __post_init__(self) -> None:
        if not is_power_of_two(self.table_size):
            raise ValueError(f"table_size must be a power of two >= 2, got {self.table_size}")
        if len(self.key) != KEY_BYTES:
            raise ValueError(f"key must be {KEY_BYTES} bytes, got {len(self.key)}")
        object.__setattr__(self, "strategy", Strategy(self.strategy))

    @classmethod
    def create(
        cls,
        table_size: int,
        strategy: Strategy | str = Strategy.CRYPTO_KEYED,
        key_seed: int | None = None,
    ) -> HashConfig:
        """Build a config, drawing a fresh random key seed when none is given."""
        if key_seed is None:
            key_seed = secrets.randbits(64)
        return cls(table_size, Strategy(strategy), key_from_seed(key_seed), key_seed)

    @cached_property
    def _encryptor(self):
        # ECB over independent blocks is exactly repeated single-block encryption.
        return Cipher(algorithms.AES(self.key), modes.ECB()).encryptor()

    @property
    def mask(self) -> int:
        return self.table_size - 1

    def slot(self, t: FourTuple) -> int:
        if self.strategy is Strategy.SUM_MOD:
            return sum_mod_key(t, self.table_size)
        return crypto_key(t, self)

    def slots(self, tuples: Iterable[FourTuple]) -> list[int]:
        """Batch form of :meth:`slot`; one cipher call for the whole batch."""
        if self.strategy is Strategy.SUM_MOD:
            n = self.table_size
            return [sum_mod_key(t, n) for t in tuples]
        blocks = b"".join(tuple_block(t) for t in tuples)
        out = self._encryptor.update(blocks)
        mask = self.mask
        return [int.from_bytes(out[i : i + 16], "big") & mask for i in range(0, len(out), 16)]


def encrypt_block(block: bytes, cfg: HashConfig) -> bytes:
    return cfg._encryptor.update(block)


def crypto_key(t: FourTuple, cfg: HashConfig) -> int:
    ciphertext = cfg._encryptor.update(tuple_block(t))
    return int.from_bytes(ciphertext, "big") % cfg.table_size
