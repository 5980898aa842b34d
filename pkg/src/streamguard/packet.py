"""Ethernet II / IPv4 / TCP frame decoding and building."""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

from .hashing import FourTuple

ETH_HEADER_LEN = 14
ETHERTYPE_IPV4 = 0x0800
IPPROTO_TCP = 6
IPV4_MIN_HEADER = 20
TCP_MIN_HEADER = 20
MAX_PAYLOAD = 65535 - IPV4_MIN_HEADER - TCP_MIN_HEADER

_ETH = struct.Struct("!6s6sH")
_IPV4 = struct.Struct("!BBHHHBBH4s4s")
_TCP = struct.Struct("!HHIIBBHHH")


class TcpFlags(enum.IntFlag):
    FIN = 0x01
    SYN = 0x02
    RST = 0x04
    PSH = 0x08
    ACK = 0x10


_FLAG_BITS = int(TcpFlags.FIN | TcpFlags.SYN | TcpFlags.RST | TcpFlags.PSH | TcpFlags.ACK)


class DecodeError(Exception):
    """Frame cannot be turned into a TCP packet record."""


class NotIPv4(DecodeError):
    pass


class NotTCP(DecodeError):
    pass


class Truncated(DecodeError):
    pass


class FragmentedIP(DecodeError):
    pass


@dataclass(frozen=True)
class RawFrame:
    data: bytes
    timestamp: int  # microseconds since epoch


@dataclass(frozen=True)
class PacketRecord:
    tuple: FourTuple
    seq: int
    flags: TcpFlags
    payload: bytes
    timestamp: int


def decode(frame: RawFrame) -> PacketRecord:
    """Decode one Ethernet II frame carrying an unfragmented IPv4/TCP packet.

    IPv4 options are skipped via IHL and TCP options via the data offset.
    Bytes past the IPv4 total length (Ethernet padding) are ignored.
    Checksums are not verified.

    Raises:
        NotIPv4: ethertype is not 0x0800 (VLAN-tagged frames included) or
            the IP version nibble is not 4.
        NotTCP: IPv4 protocol is not 6.
        FragmentedIP: MF flag set or non-zero fragment offset.
        Truncated: a header or a declared length runs past the frame.
    """
    data = frame.data
    if len(data) < ETH_HEADER_LEN:
        raise Truncated(f"frame of {len(data)} bytes has no room for an Ethernet header")
    _, _, ethertype = _ETH.unpack_from(data, 0)
    if ethertype != ETHERTYPE_IPV4:
        raise NotIPv4(f"ethertype 0x{ethertype:04x}")

    ip_off = ETH_HEADER_LEN
    if len(data) < ip_off + IPV4_MIN_HEADER:
        raise Truncated("IPv4 header truncated")
    (ver_ihl, _, total_len, _, frag, _, proto, _, src, dst) = _IPV4.unpack_from(data, ip_off)
    if ver_ihl >> 4 != 4:
        raise NotIPv4(f"IP version {ver_ihl >> 4}")
    ihl = (ver_ihl & 0x0F) * 4
    if ihl < IPV4_MIN_HEADER:
        raise Truncated(f"IHL {ihl} below minimum header size")
    if total_len < ihl or ip_off + total_len > len(data):
        raise Truncated(f"IPv4 total length {total_len} exceeds frame")
    if proto != IPPROTO_TCP:
        raise NotTCP(f"IPv4 protocol {proto}")
    if frag & 0x2000 or frag & 0x1FFF:
        raise FragmentedIP("IPv4 fragment")

    tcp_off = ip_off + ihl
    ip_end = ip_off + total_len
    if ip_end - tcp_off < TCP_MIN_HEADER:
        raise Truncated("TCP header truncated")
    sport, dport, seq, _, off_byte, flag_byte, _, _, _ = _TCP.unpack_from(data, tcp_off)
    doff = (off_byte >> 4) * 4
    if doff < TCP_MIN_HEADER or tcp_off + doff > ip_end:
        raise Truncated(f"TCP data offset {doff} invalid for packet")

    src_ip = int.from_bytes(src, "big")
    dst_ip = int.from_bytes(dst, "big")
    return PacketRecord(
        tuple=FourTuple(src_ip, dst_ip, sport, dport),
        seq=seq,
        flags=TcpFlags(flag_byte & _FLAG_BITS),
        payload=bytes(data[tcp_off + doff : ip_end]),
        timestamp=frame.timestamp,
    )


def build_frame(
    t: FourTuple,
    seq: int,
    flags: TcpFlags,
    payload: bytes = b"",
    *,
    ack: int = 0,
    src_mac: bytes = b"\x02\x00\x00\x00\x00\x01",
    dst_mac: bytes = b"\x02\x00\x00\x00\x00\x02",
    ttl: int = 64,
    window: int = 65535,
) -> bytes:
    """Build a minimal Ethernet/IPv4/TCP frame (no options, zero checksums)."""
    if len(payload) > MAX_PAYLOAD:
        raise ValueError(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}")
    total_len = IPV4_MIN_HEADER + TCP_MIN_HEADER + len(payload)
    eth = _ETH.pack(dst_mac, src_mac, ETHERTYPE_IPV4)
    ip = _IPV4.pack(
        0x45, 0, total_len, 0, 0x4000, ttl, IPPROTO_TCP, 0,
        t.src_ip.to_bytes(4, "big"), t.dst_ip.to_bytes(4, "big"),
    )
    tcp = _TCP.pack(t.src_port, t.dst_port, seq, ack, 5 << 4, int(flags), window, 0, 0)
    return eth + ip + tcp + payload
