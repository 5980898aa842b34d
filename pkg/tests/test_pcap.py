import struct
from pathlib import Path

import pytest

from streamguard.hashing import FourTuple
from streamguard.packet import RawFrame, TcpFlags, decode
from streamguard.pcap import (
    BadMagic,
    TruncatedRecord,
    UnsupportedLinkType,
    iter_pcap,
    read_pcap,
    write_pcap,
)

DATA = Path(__file__).parent / "data"
THREE = DATA / "three.pcap"  # written by scapy's wrpcap


def test_fixture_three_packets():
    frames = list(read_pcap(THREE))
    assert [len(f.data) for f in frames] == [54, 76, 71]
    # timestamps as reported by dpkt for the same file
    assert [f.timestamp for f in frames] == [
        1_700_000_000_000_001,
        1_700_000_000_250_001,
        1_700_000_000_500_001,
    ]
    recs = [decode(f) for f in frames]
    assert recs[0].flags == TcpFlags.SYN
    assert recs[1].payload == b"GET /finger HTTP/1.0\r\n"
    # third frame carries IPv4 and TCP options
    assert recs[2].tuple == FourTuple.parse("10.0.0.2", "10.0.0.1", 80, 1234)
    assert recs[2].payload == b"hello" and recs[2].seq == 77


def test_fixture_agrees_with_dpkt():
    dpkt = pytest.importorskip("dpkt")
    with open(THREE, "rb") as fh:
        theirs = [(round(ts * 1e6), bytes(buf)) for ts, buf in dpkt.pcap.Reader(fh)]
    assert [(f.timestamp, f.data) for f in read_pcap(THREE)] == theirs


def test_written_file_readable_by_dpkt(tmp_path):
    dpkt = pytest.importorskip("dpkt")
    frames = [RawFrame(b"\x01" * 60, 5_000_007), RawFrame(b"\x02" * 61, 6_000_000)]
    path = tmp_path / "w.pcap"
    assert write_pcap(path, frames) == 2
    with open(path, "rb") as fh:
        reader = dpkt.pcap.Reader(fh)
        assert reader.datalink() == 1
        got = [(round(ts * 1e6), bytes(b)) for ts, b in reader]
    assert got == [(f.timestamp, f.data) for f in frames]


def _header(magic, order="<", linktype=1):
    return struct.pack(order + "IHHiIII", magic, 2, 4, 0, 0, 65535, linktype)


def _record(order, sec, frac, data):
    return struct.pack(order + "IIII", sec, frac, len(data), len(data)) + data


@pytest.mark.parametrize("order", ["<", ">"])
def test_byte_orders_and_nanosecond_magic(tmp_path, order):
    usec = tmp_path / "u.pcap"
    usec.write_bytes(_header(0xA1B2C3D4, order) + _record(order, 10, 5, b"abc"))
    assert [(f.timestamp, f.data) for f in read_pcap(usec)] == [(10_000_005, b"abc")]
    nsec = tmp_path / "n.pcap"
    nsec.write_bytes(_header(0xA1B23C4D, order) + _record(order, 10, 5_999, b"abc"))
    assert [f.timestamp for f in read_pcap(nsec)] == [10_000_005]


def test_bad_magic(tmp_path):
    p = tmp_path / "bad.pcap"
    p.write_bytes(struct.pack("<I", 0xDEADBEEF) + bytes(20))
    with pytest.raises(BadMagic):
        list(read_pcap(p))
    p.write_bytes(b"")
    with pytest.raises(BadMagic):
        list(read_pcap(p))


def test_unsupported_linktype(tmp_path):
    p = tmp_path / "raw.pcap"
    p.write_bytes(_header(0xA1B2C3D4, linktype=101))
    with pytest.raises(UnsupportedLinkType):
        list(read_pcap(p))


def test_empty_capture(tmp_path):
    p = tmp_path / "empty.pcap"
    assert write_pcap(p, []) == 0
    assert list(read_pcap(p)) == []


def test_truncated_records(tmp_path):
    p = tmp_path / "t.pcap"
    p.write_bytes(_header(0xA1B2C3D4) + _record("<", 1, 0, b"abcdef")[:-2])
    with pytest.raises(TruncatedRecord):
        list(read_pcap(p))
    p.write_bytes(_header(0xA1B2C3D4) + b"\x00" * 7)
    with pytest.raises(TruncatedRecord):
        list(read_pcap(p))
    p.write_bytes(_header(0xA1B2C3D4)[:10])
    with pytest.raises(TruncatedRecord):
        list(read_pcap(p))


def test_iter_pcap_on_file_object(tmp_path):
    p = tmp_path / "x.pcap"
    write_pcap(p, [RawFrame(b"z", 1)])
    with open(p, "rb") as fh:
        assert list(iter_pcap(fh)) == [RawFrame(b"z", 1)]
