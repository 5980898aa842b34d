"""Classic libpcap file reading and writing (no pcapng)."""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator

from .packet import RawFrame

MAGIC_USEC = 0xA1B2C3D4
MAGIC_NSEC = 0xA1B23C4D
LINKTYPE_ETHERNET = 1
GLOBAL_HEADER_LEN = 24
RECORD_HEADER_LEN = 16


class PcapError(Exception):
    pass


class BadMagic(PcapError):
    pass


class UnsupportedLinkType(PcapError):
    pass


class TruncatedRecord(PcapError):
    pass


def _read_header(fh: BinaryIO) -> tuple[str, bool]:
    """Return (byte order prefix, nanosecond resolution)."""
    raw = fh.read(GLOBAL_HEADER_LEN)
    if len(raw) < 4:
        raise BadMagic("file too short for a pcap magic number")
    for order in ("<", ">"):
        (magic,) = struct.unpack(order + "I", raw[:4])
        if magic in (MAGIC_USEC, MAGIC_NSEC):
            break
    else:
        raise BadMagic(f"unrecognized magic 0x{int.from_bytes(raw[:4], 'big'):08x}")
    if len(raw) < GLOBAL_HEADER_LEN:
        raise TruncatedRecord("global header truncated")
    linktype = struct.unpack(order + "I", raw[20:24])[0] & 0x0FFFFFFF
    if linktype != LINKTYPE_ETHERNET:
        raise UnsupportedLinkType(f"link type {linktype}")
    return order, magic == MAGIC_NSEC


def iter_pcap(fh: BinaryIO) -> Iterator[RawFrame]:
    order, nsec = _read_header(fh)
    rec = struct.Struct(order + "IIII")
    while True:
        hdr = fh.read(RECORD_HEADER_LEN)
        if not hdr:
            return
        if len(hdr) < RECORD_HEADER_LEN:
            raise TruncatedRecord("record header truncated")
        ts_sec, ts_frac, incl_len, _ = rec.unpack(hdr)
        data = fh.read(incl_len)
        if len(data) < incl_len:
            raise TruncatedRecord(f"record declares {incl_len} bytes, {len(data)} present")
        usec = ts_frac // 1000 if nsec else ts_frac
        yield RawFrame(data, ts_sec * 1_000_000 + usec)


def read_pcap(path: str | Path) -> Iterator[RawFrame]:
    """Yield frames from a classic pcap file, timestamps in microseconds."""
    with open(path, "rb") as fh:
        yield from iter_pcap(fh)


def write_pcap(path: str | Path, frames: Iterable[RawFrame], snaplen: int = 65535) -> int:
    """Write little-endian microsecond pcap. Returns the number of records."""
    n = 0
    with open(path, "wb") as fh:
        fh.write(struct.pack("<IHHiIII", MAGIC_USEC, 2, 4, 0, 0, snaplen, LINKTYPE_ETHERNET))
        for frame in frames:
            data = frame.data[:snaplen]
            sec, usec = divmod(frame.timestamp, 1_000_000)
            fh.write(struct.pack("<IIII", sec, usec, len(data), len(frame.data)))
            fh.write(data)
            n += 1
    return n
