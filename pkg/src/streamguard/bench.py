"""Hash-strategy benchmarking and engine replay reports.

Report JSON is versioned by a top-level ``schema_version`` and serialized
with a fixed key order; see ``docs/report-schema.md``.
"""

from __future__ import annotations

import json
import time
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .engine import Engine, EventKind
from .hashing import FourTuple, HashConfig, Strategy, reverse
from .packet import RawFrame
from .table import chain_stats

SCHEMA_VERSION = 1
DEFAULT_REAP_INTERVAL_US = 1_000_000


def chi_square(histogram: Sequence[int], expected: float) -> float:
    """Pearson statistic of slot counts against a flat expectation."""
    if expected <= 0:
        return 0.0
    return sum((o - expected) ** 2 for o in histogram) / expected


@dataclass(frozen=True)
class StrategyResult:
    slots_used: int
    max_chain: int
    mean_chain: float
    chi_square: float
    direction_collision_rate: float

    def as_dict(self) -> dict:
        return {
            "slots_used": self.slots_used,
            "max_chain": self.max_chain,
            "mean_chain": self.mean_chain,
            "chi_square": self.chi_square,
            "direction_collision_rate": self.direction_collision_rate,
        }


def evaluate(tuples: Sequence[FourTuple], cfg: HashConfig) -> StrategyResult:
    n = cfg.table_size
    m = len(tuples)
    forward = cfg.slots(tuples)
    backward = cfg.slots([reverse(t) for t in tuples])
    histogram = [0] * n
    for s in forward:
        histogram[s] += 1
    st = chain_stats(histogram)
    same = sum(1 for a, b in zip(forward, backward) if a == b)
    return StrategyResult(
        slots_used=st.slots_used,
        max_chain=st.max_chain,
        mean_chain=st.mean_chain,
        chi_square=chi_square(histogram, m / n),
        direction_collision_rate=same / m if m else 0.0,
    )


@dataclass(frozen=True)
class BenchReport:
    table_size: int
    connections: int
    seed: int | None
    key_seed: int | None
    key: bytes
    profile: str | None
    results: dict[Strategy, StrategyResult]

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "bench",
            "parameters": {
                "N": self.table_size,
                "M": self.connections,
                "profile": self.profile,
                "seed": self.seed,
                "key_seed": self.key_seed,
                "key": self.key.hex(),
            },
            "strategies": {s.value: r.as_dict() for s, r in self.results.items()},
        }


def hash_bench(
    tuples: Sequence[FourTuple],
    table_size: int,
    key_seed: int,
    strategies: Iterable[Strategy] = (Strategy.SUM_MOD, Strategy.CRYPTO_KEYED),
    *,
    seed: int | None = None,
    profile: str | None = None,
) -> BenchReport:
    results = {}
    key = b""
    for strategy in strategies:
        cfg = HashConfig.create(table_size, strategy, key_seed)
        key = cfg.key
        results[Strategy(strategy)] = evaluate(tuples, cfg)
    return BenchReport(table_size, len(tuples), seed, key_seed, key, profile, results)


def replay(
    engine: Engine,
    frames: Iterable[RawFrame],
    reap_interval: int = DEFAULT_REAP_INTERVAL_US,
    timing: bool = False,
) -> dict:
    """Drive ``engine`` over ``frames`` using packet timestamps as the clock.

    ``tick`` runs whenever virtual time has moved ``reap_interval`` past the
    previous tick, and once more at the last timestamp. Returns the report
    body (without parameters).
    """
    alerts = []
    decisions: Counter[str] = Counter()
    events: Counter[str] = Counter()
    last_tick = None
    started = time.perf_counter()
    for frame in frames:
        now = frame.timestamp
        if last_tick is None:
            last_tick = now
        elif now - last_tick >= reap_interval:
            for ev in engine.tick(now):
                events[ev.kind.value] += 1
            last_tick = now
        verdict = engine.process(frame)
        decisions[verdict.decision.value] += 1
        for ev in verdict.events:
            events[ev.kind.value] += 1
        for a in verdict.alerts:
            alerts.append(
                {
                    "signature_id": a.signature_id,
                    "stage": int(a.stage),
                    "tuple": str(a.tuple),
                    "timestamp": a.timestamp,
                }
            )
    if last_tick is not None and now != last_tick:
        # Close the run at the final virtual time so idle flows are settled.
        for ev in engine.tick(now):
            events[ev.kind.value] += 1
    elapsed = time.perf_counter() - started

    stats = engine.snapshot()
    body = {
        "stats": stats.as_dict(),
        "decisions": {d: decisions.get(d, 0) for d in ("pass", "pass_with_alert", "drop")},
        "events": {k.value: events.get(k.value, 0) for k in EventKind},
        "alerts": alerts,
    }
    if timing:
        # Informational only; makes the report non-reproducible.
        body["packets_per_second"] = stats.packets_processed / elapsed if elapsed else None
    return body


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"
