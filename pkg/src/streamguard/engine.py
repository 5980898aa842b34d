"""Two-stage inspection engine over the connection table.

Per frame: decode, per-packet match (stage 1), flow lookup/creation,
match over the reassembled window (stage 2), then either reset the flow
or commit the packet to its window.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field

from .detection import Action, SignatureSet, Stage
from .hashing import FourTuple, HashConfig, reverse
from .packet import DecodeError, RawFrame, TcpFlags, decode
from .reassembly import StoredPacket
from .table import DEFAULT_TABLE_SIZE, DEFAULT_TIMEOUT_US, ConnectionTable, FlowState


class Mode(str, enum.Enum):
    IDS = "ids"
    IPS = "ips"


class Decision(str, enum.Enum):
    PASS = "pass"
    DROP = "drop"
    PASS_WITH_ALERT = "pass_with_alert"


class EventKind(str, enum.Enum):
    FLOW_CREATED = "flow_created"
    FLOW_RESET = "flow_reset"
    FLOW_REAPED = "flow_reaped"
    NON_TCP_PASSTHROUGH = "non_tcp_passthrough"
    STRICT_SYN_DROP = "strict_syn_drop"


@dataclass(frozen=True)
class Alert:
    signature_id: int
    stage: Stage
    tuple: FourTuple
    timestamp: int


@dataclass(frozen=True)
class Event:
    kind: EventKind
    tuple: FourTuple | None = None
    detail: str = ""


@dataclass
class Verdict:
    decision: Decision
    alerts: list[Alert] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)


@dataclass
class EngineConfig:
    signatures: SignatureSet
    mode: Mode = Mode.IDS
    hash: HashConfig | None = None
    timeout: int = DEFAULT_TIMEOUT_US
    strict_syn: bool = True

    def __post_init__(self) -> None:
        self.mode = Mode(self.mode)
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.hash is None:
            self.hash = HashConfig.create(DEFAULT_TABLE_SIZE)


@dataclass
class EngineStats:
    table: dict
    packets_processed: int = 0
    passed: int = 0
    drops: int = 0
    alerts_stage1: int = 0
    alerts_stage2: int = 0
    flows_created: int = 0
    resets: int = 0
    reaped: int = 0
    passthrough: int = 0
    strict_syn_drops: int = 0

    def as_dict(self) -> dict:
        return {
            "packets_processed": self.packets_processed,
            "passed": self.passed,
            "drops": self.drops,
            "alerts": {"stage1": self.alerts_stage1, "stage2": self.alerts_stage2},
            "flows_created": self.flows_created,
            "resets": self.resets,
            "reaped": self.reaped,
            "passthrough": self.passthrough,
            "strict_syn_drops": self.strict_syn_drops,
            "table": self.table,
        }


class Engine:
    """Stateful IDS/IPS engine. ``process``, ``tick`` and ``snapshot`` are serialized."""

    def __init__(self, config: EngineConfig) -> None:
        self.config = config
        self.table = ConnectionTable(config.hash)
        self._lock = threading.Lock()
        self._counters = EngineStats(table={})
        self._stage2_reach = max(config.signatures.max_pattern_length(Stage.STAGE2) - 1, 0)

    def process(self, frame: RawFrame) -> Verdict:
        with self._lock:
            verdict = self._process(frame)
            c = self._counters
            c.packets_processed += 1
            if verdict.decision is Decision.DROP:
                c.drops += 1
            else:
                c.passed += 1
            for alert in verdict.alerts:
                if alert.stage is Stage.STAGE1:
                    c.alerts_stage1 += 1
                else:
                    c.alerts_stage2 += 1
            for ev in verdict.events:
                if ev.kind is EventKind.FLOW_CREATED:
                    c.flows_created += 1
                elif ev.kind is EventKind.FLOW_RESET:
                    c.resets += 1
                elif ev.kind is EventKind.NON_TCP_PASSTHROUGH:
                    c.passthrough += 1
                elif ev.kind is EventKind.STRICT_SYN_DROP:
                    c.strict_syn_drops += 1
            return verdict

    def _process(self, frame: RawFrame) -> Verdict:
        cfg = self.config
        ips = cfg.mode is Mode.IPS
        try:
            pkt = decode(frame)
        except DecodeError as exc:
            return Verdict(
                Decision.PASS,
                events=[Event(EventKind.NON_TCP_PASSTHROUGH, detail=type(exc).__name__)],
            )

        t = pkt.tuple
        now = pkt.timestamp
        alerts: list[Alert] = []
        events: list[Event] = []

        for m in cfg.signatures.match(pkt.payload, Stage.STAGE1):
            alerts.append(Alert(m.signature_id, Stage.STAGE1, t, now))
            if ips and cfg.signatures.by_id[m.signature_id].action is Action.DROP:
                return Verdict(Decision.DROP, alerts, events)

        entry = self.table.lookup(t)
        if entry is None:
            syn = bool(pkt.flags & TcpFlags.SYN)
            ack = bool(pkt.flags & TcpFlags.ACK)
            if syn and not ack:
                create = True
            elif syn and ack and reverse(t) in self.table:
                create = True
            else:
                create = not cfg.strict_syn
            if not create:
                events.append(Event(EventKind.STRICT_SYN_DROP, t))
                return Verdict(Decision.DROP, alerts, events)
            entry = self.table.insert(t, now)
            events.append(Event(EventKind.FLOW_CREATED, t))

        if not pkt.flags & TcpFlags.SYN:
            entry.state = FlowState.ESTABLISHED

        # A committed window never holds a stage-2 match: matched packets are
        # not committed and eviction only trims the front. Any new match must
        # therefore end inside the incoming payload, so only that suffix of the
        # assembled segment is scanned, and empty payloads are skipped.
        if pkt.payload:
            assembled = entry.queue.assemble(pkt.payload)
            reach = self._stage2_reach + len(pkt.payload)
            matches = cfg.signatures.match(assembled[-reach:], Stage.STAGE2)
            if matches:
                alerts.extend(Alert(m.signature_id, Stage.STAGE2, t, now) for m in matches)
                self.table.remove(t)
                self.table.remove(reverse(t))
                events.append(Event(EventKind.FLOW_RESET, t))
                return Verdict(Decision.DROP if ips else Decision.PASS_WITH_ALERT, alerts, events)
            entry.queue.commit(StoredPacket(pkt.seq, pkt.payload, now))

        entry.last_activity = now
        return Verdict(Decision.PASS_WITH_ALERT if alerts else Decision.PASS, alerts, events)

    def tick(self, now: int) -> list[Event]:
        """Reap flows idle longer than the configured timeout."""
        with self._lock:
            removed = self.table.reap(now, self.config.timeout)
            self._counters.reaped += len(removed)
            return [Event(EventKind.FLOW_REAPED, t) for t in removed]

    def snapshot(self) -> EngineStats:
        with self._lock:
            c = self._counters
            return EngineStats(
                table=self.table.stats().as_dict(),
                packets_processed=c.packets_processed,
                passed=c.passed,
                drops=c.drops,
                alerts_stage1=c.alerts_stage1,
                alerts_stage2=c.alerts_stage2,
                flows_created=c.flows_created,
                resets=c.resets,
                reaped=c.reaped,
                passthrough=c.passthrough,
                strict_syn_drops=c.strict_syn_drops,
            )


def process(engine: Engine, frame: RawFrame) -> Verdict:
    return engine.process(frame)


def tick(engine: Engine, now: int) -> list[Event]:
    return engine.tick(now)


def snapshot(engine: Engine) -> EngineStats:
    return engine.snapshot()
