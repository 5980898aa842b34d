import pytest

from streamguard.detection import load_signatures
from streamguard.engine import Engine, EngineConfig
from streamguard.hashing import FourTuple, HashConfig
from streamguard.packet import RawFrame, TcpFlags, build_frame

CLIENT = FourTuple.parse("192.168.1.100", "10.0.0.1", 40000, 80)


class FlowDriver:
    """Feeds one directed flow into an engine: SYN then in-order data."""

    def __init__(self, engine, t=CLIENT, start=1_000_000, seq=1000):
        self.engine = engine
        self.t = t
        self.now = start
        self.seq = seq

    def send(self, payload=b"", flags=TcpFlags.ACK | TcpFlags.PSH, at=None):
        self.now = self.now + 1000 if at is None else at
        frame = RawFrame(build_frame(self.t, self.seq, flags, payload), self.now)
        self.seq = (self.seq + len(payload)) & 0xFFFFFFFF
        return self.engine.process(frame)

    def syn(self):
        v = self.send(flags=TcpFlags.SYN)
        self.seq += 1
        return v


def make_engine(rules="", mode="ips", table_size=1024, key_seed=7, **kw):
    cfg = EngineConfig(
        signatures=load_signatures(rules),
        mode=mode,
        hash=HashConfig.create(table_size, key_seed=key_seed),
        **kw,
    )
    return Engine(cfg)


@pytest.fixture
def ips_engine():
    return make_engine(mode="ips")


# Acceptance criteria outcomes, filled by tests/test_acceptance.py.
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] AC{number}: {title} -- {detail}")
