"""Content signatures and multi-pattern matching.

Rule file format, one rule per line (UTF-8, ``#`` starts a comment line)::

    id=839 action=alert content="/finger" nocase stages=both

``content`` accepts ``\\xNN``, ``\\\\`` and ``\\"`` escapes. ``stages`` is
``1``, ``2`` or ``both`` (the default).
"""

from __future__ import annotations

import enum
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

from .reassembly import MAX_SEGMENT


class Action(str, enum.Enum):
    ALERT = "alert"
    DROP = "drop"


class Stage(enum.IntEnum):
    STAGE1 = 1
    STAGE2 = 2


class ParseError(ValueError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateId(ParseError):
    pass


@dataclass(frozen=True)
class Signature:
    id: int
    action: Action
    pattern: bytes
    nocase: bool = False
    stages: frozenset[Stage] = frozenset(Stage)

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ValueError(f"signature id must be positive, got {self.id}")
        if not 1 <= len(self.pattern) <= MAX_SEGMENT:
            raise ValueError(f"pattern length must be in [1, {MAX_SEGMENT}]")
        if not self.stages or not set(self.stages) <= set(Stage):
            raise ValueError("stages must be a non-empty subset of {1, 2}")


@dataclass(frozen=True)
class MatchResult:
    signature_id: int
    offset: int
    stage: Stage


class AhoCorasick:
    """Aho-Corasick automaton reporting the first occurrence of each pattern."""

    def __init__(self, patterns: Iterable[bytes]) -> None:
        self.patterns = list(patterns)
        goto: list[dict[int, int]] = [{}]
        out: list[list[int]] = [[]]
        for idx, pat in enumerate(self.patterns):
            s = 0
            for b in pat:
                nxt = goto[s].get(b)
                if nxt is None:
                    nxt = len(goto)
                    goto[s][b] = nxt
                    goto.append({})
                    out.append([])
                s = nxt
            out[s].append(idx)

        fail = [0] * len(goto)
        todo = deque(goto[0].values())
        while todo:
            s = todo.popleft()
            for b, t in goto[s].items():
                todo.append(t)
                f = fail[s]
                while f and b not in goto[f]:
                    f = fail[f]
                fail[t] = goto[f][b] if b in goto[f] and goto[f][b] != t else 0
                out[t] = out[t] + out[fail[t]]
        # Complete the root so the failure walk always terminates there.
        for b in range(256):
            goto[0].setdefault(b, 0)

        self._goto = goto
        self._fail = fail
        self._out = out
        self._delta = self._compile(goto, fail) if len(goto) <= self.DENSE_STATE_LIMIT else None

    # Dense tables cost 256 slots per state; past this, walk failure links instead.
    DENSE_STATE_LIMIT = 4096

    @staticmethod
    def _compile(goto, fail) -> list[list[int]]:
        """Close ``goto`` over failure links into a full 256-way table."""
        delta: list[list[int]] = [[]] * len(goto)
        delta[0] = [goto[0][b] for b in range(256)]
        todo = deque(t for t in goto[0].values() if t)
        while todo:
            s = todo.popleft()
            row = list(delta[fail[s]])
            for b, t in goto[s].items():
                row[b] = t
                todo.append(t)
            delta[s] = row
        return delta

    def first_occurrences(self, buffer: bytes) -> dict[int, int]:
        """Map pattern index -> offset of its first occurrence in ``buffer``."""
        out = self._out
        lengths = [len(p) for p in self.patterns]
        remaining = len(self.patterns)
        found: dict[int, int] = {}
        # Matches surface in end-position order, so the first hit of a
        # fixed-length pattern is also its leftmost start.
        for i, s in self._states(buffer):
            for idx in out[s]:
                if idx not in found:
                    found[idx] = i - lengths[idx] + 1
                    remaining -= 1
            if not remaining:
                break
        return found

    def _states(self, buffer: bytes) -> Iterator[tuple[int, int]]:
        """Yield (position, state) for every position where some pattern ends."""
        out = self._out
        s = 0
        if self._delta is not None:
            delta = self._delta
            for i, b in enumerate(buffer):
                s = delta[s][b]
                if out[s]:
                    yield i, s
            return
        goto, fail = self._goto, self._fail
        for i, b in enumerate(buffer):
            g = goto[s]
            while b not in g:
                s = fail[s]
                g = goto[s]
            s = g[b]
            if out[s]:
                yield i, s

    @property
    def max_length(self) -> int:
        return max(map(len, self.patterns), default=0)


class SignatureSet:
    """Immutable collection of signatures with per-stage matchers."""

    def __init__(self, signatures: Iterable[Signature] = ()) -> None:
        sigs = tuple(signatures)
        by_id: dict[int, Signature] = {}
        for sig in sigs:
            if sig.id in by_id:
                raise ValueError(f"duplicate signature id {sig.id}")
            by_id[sig.id] = sig
        self.signatures = sigs
        self.by_id = by_id
        self._matchers = {stage: _StageMatcher(s for s in sigs if stage in s.stages) for stage in Stage}

    def __len__(self) -> int:
        return len(self.signatures)

    def __iter__(self) -> Iterator[Signature]:
        return iter(self.signatures)

    def __contains__(self, sig_id: int) -> bool:
        return sig_id in self.by_id

    def match(self, buffer: bytes, stage: Stage) -> list[MatchResult]:
        return self._matchers[Stage(stage)].match(buffer, Stage(stage))

    def max_pattern_length(self, stage: Stage) -> int:
        return self._matchers[Stage(stage)].max_length


class _StageMatcher:
    def __init__(self, signatures: Iterable[Signature]) -> None:
        sigs = list(signatures)
        self._exact = [s for s in sigs if not s.nocase]
        self._folded = [s for s in sigs if s.nocase]
        self._exact_ac = AhoCorasick(s.pattern for s in self._exact) if self._exact else None
        self._folded_ac = AhoCorasick(s.pattern.lower() for s in self._folded) if self._folded else None
        self._order = {s.id: i for i, s in enumerate(sigs)}
        self.max_length = max((len(s.pattern) for s in sigs), default=0)

    def match(self, buffer: bytes, stage: Stage) -> list[MatchResult]:
        if not buffer:
            return []
        results = []
        if self._exact_ac is not None:
            for idx, off in self._exact_ac.first_occurrences(buffer).items():
                results.append(MatchResult(self._exact[idx].id, off, stage))
        if self._folded_ac is not None:
            # bytes.lower() folds ASCII letters only.
            for idx, off in self._folded_ac.first_occurrences(buffer.lower()).items():
                results.append(MatchResult(self._folded[idx].id, off, stage))
        results.sort(key=lambda m: self._order[m.signature_id])
        return results


def match_buffer(buffer: bytes, sigs: SignatureSet, stage: Stage) -> list[MatchResult]:
    """Every applicable signature occurring in ``buffer``, with its first offset."""
    return sigs.match(buffer, stage)


_TOKEN = re.compile(
    r'\s*(?:(?P<key>[A-Za-z_]+)=(?P<val>"(?:[^"\\]|\\.)*"|[^\s"]+)|(?P<flag>[A-Za-z_]+))(?=\s|$)'
)
_STAGES = {"1": frozenset({Stage.STAGE1}), "2": frozenset({Stage.STAGE2}), "both": frozenset(Stage)}


def _unescape(text: str, lineno: int) -> bytes:
    out = bytearray()
    i = 0
    while i < len(text):
        ch = text[i]
        if ch != "\\":
            out += ch.encode("utf-8")
            i += 1
            continue
        nxt = text[i + 1 : i + 2]
        if nxt in ('"', "\\"):
            out += nxt.encode()
            i += 2
        elif nxt == "x" and re.fullmatch(r"[0-9A-Fa-f]{2}", text[i + 2 : i + 4]):
            out.append(int(text[i + 2 : i + 4], 16))
            i += 4
        else:
            raise ParseError(lineno, f"bad escape sequence at column {i}")
    return bytes(out)


def _parse_line(line: str, lineno: int) -> Signature:
    fields: dict[str, str] = {}
    flags: set[str] = set()
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            raise ParseError(lineno, f"unparseable text at column {pos}: {line[pos:]!r}")
        if m.group("key"):
            key = m.group("key")
            if key in fields:
                raise ParseError(lineno, f"repeated field {key!r}")
            fields[key] = m.group("val")
        else:
            flags.add(m.group("flag"))
        pos = m.end()
        while pos < len(line) and line[pos].isspace():
            pos += 1

    unknown = (set(fields) - {"id", "action", "content", "stages"}) | (flags - {"nocase"})
    if unknown:
        raise ParseError(lineno, f"unknown attribute(s): {', '.join(sorted(unknown))}")
    for required in ("id", "action", "content"):
        if required not in fields:
            raise ParseError(lineno, f"missing {required}=")

    if not fields["id"].isdigit() or int(fields["id"]) < 1:
        raise ParseError(lineno, f"id must be a positive integer, got {fields['id']!r}")
    try:
        action = Action(fields["action"])
    except ValueError:
        raise ParseError(lineno, f"action must be alert or drop, got {fields['action']!r}") from None
    content = fields["content"]
    if len(content) < 2 or not (content.startswith('"') and content.endswith('"')):
        raise ParseError(lineno, "content must be a double-quoted string")
    pattern = _unescape(content[1:-1], lineno)
    if not 1 <= len(pattern) <= MAX_SEGMENT:
        raise ParseError(lineno, f"content length {len(pattern)} outside [1, {MAX_SEGMENT}]")
    stages = _STAGES.get(fields.get("stages", "both"))
    if stages is None:
        raise ParseError(lineno, f"stages must be 1, 2 or both, got {fields['stages']!r}")

    return Signature(int(fields["id"]), action, pattern, "nocase" in flags, stages)


def load_signatures(text: str) -> SignatureSet:
    sigs: list[Signature] = []
    seen: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        sig = _parse_line(line, lineno)
        if sig.id in seen:
            raise DuplicateId(lineno, f"id {sig.id} already defined on line {seen[sig.id]}")
        seen[sig.id] = lineno
        sigs.append(sig)
    return SignatureSet(sigs)
