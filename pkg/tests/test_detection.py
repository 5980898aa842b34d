import random

import pytest
from hypothesis import given, strategies as st

from streamguard.detection import (
    Action,
    AhoCorasick,
    DuplicateId,
    ParseError,
    Signature,
    SignatureSet,
    Stage,
    load_signatures,
    match_buffer,
)


def naive(buffer, sigs, stage):
    """Independent oracle: one bytes.find per applicable signature."""
    found = {}
    for s in sigs:
        if stage not in s.stages:
            continue
        hay, needle = (buffer.lower(), s.pattern.lower()) if s.nocase else (buffer, s.pattern)
        off = hay.find(needle)
        if off >= 0:
            found[s.id] = off
    return found


def as_dict(results):
    return {m.signature_id: m.offset for m in results}


def test_load_finger_rule():
    sigs = load_signatures('id=839 action=alert content="/finger" nocase\n')
    (sig,) = sigs
    assert sig.id == 839 and sig.action is Action.ALERT
    assert sig.pattern == b"/finger" and sig.nocase
    assert sig.stages == {Stage.STAGE1, Stage.STAGE2}


def test_load_empty_and_comments():
    assert len(load_signatures("")) == 0
    assert len(load_signatures("# nothing\n\n   \n")) == 0


def test_duplicate_id():
    with pytest.raises(DuplicateId) as exc:
        load_signatures('id=1 action=alert content="a"\nid=1 action=drop content="b"\n')
    assert exc.value.line == 2


def test_escapes_and_stages():
    sigs = load_signatures(
        r'id=2 action=drop content="\x00\xFFq\"\\" stages=2' "\n"
        r'id=3 action=alert content="é" stages=1'
    )
    a, b = sigs
    assert a.pattern == b'\x00\xffq"\\' and a.stages == {Stage.STAGE2} and a.action is Action.DROP
    assert b.pattern == "é".encode() and b.stages == {Stage.STAGE1}


@pytest.mark.parametrize(
    "line",
    [
        'action=alert content="x"',
        'id=0 action=alert content="x"',
        'id=abc action=alert content="x"',
        'id=1 action=log content="x"',
        'id=1 action=alert content=""',
        'id=1 action=alert content="x" stages=3',
        'id=1 action=alert content="\\q"',
        'id=1 action=alert content="\\x4"',
        'id=1 action=alert content="x" bogus',
        'id=1 action=alert content="x" depth=3',
        'id=1 action=alert content=x',
        'id=1 action=alert content="unterminated',
        'id=1 id=2 action=alert content="x"',
    ],
)
def test_parse_errors(line):
    with pytest.raises(ParseError) as exc:
        load_signatures("# header\n" + line)
    assert exc.value.line == 2


def test_pattern_length_cap():
    load_signatures('id=1 action=alert content="%s"' % ("a" * 16384))
    with pytest.raises(ParseError):
        load_signatures('id=1 action=alert content="%s"' % ("a" * 16385))


def test_finger_match_offset():
    sigs = load_signatures('id=839 action=alert content="/finger" nocase')
    (m,) = match_buffer(b"GET /finger HTTP/1.0", sigs, Stage.STAGE2)
    assert (m.signature_id, m.offset, m.stage) == (839, 4, Stage.STAGE2)
    (m,) = match_buffer(b"GET /FiNgEr HTTP/1.0", sigs, Stage.STAGE1)
    assert m.offset == 4


def test_empty_buffer_and_stage_filter():
    sigs = load_signatures('id=1 action=alert content="abc" stages=1')
    assert match_buffer(b"", sigs, Stage.STAGE1) == []
    assert match_buffer(b"xxabc", sigs, Stage.STAGE2) == []
    assert as_dict(match_buffer(b"xxabc", sigs, Stage.STAGE1)) == {1: 2}


def test_case_sensitive_by_default():
    sigs = load_signatures('id=1 action=alert content="Attack"')
    assert match_buffer(b"ATTACK attack", sigs, Stage.STAGE1) == []
    assert as_dict(match_buffer(b"an Attack", sigs, Stage.STAGE1)) == {1: 3}


def test_nocase_folds_ascii_only():
    sigs = SignatureSet([Signature(1, Action.ALERT, "é".encode(), nocase=True)])
    assert match_buffer("É".encode(), sigs, Stage.STAGE1) == []


def test_overlapping_and_nested_patterns():
    pats = [b"he", b"she", b"his", b"hers", b"s", b"e"]
    sigs = SignatureSet(Signature(i + 1, Action.ALERT, p) for i, p in enumerate(pats))
    buf = b"ushers ahishe"
    assert as_dict(match_buffer(buf, sigs, Stage.STAGE1)) == naive(buf, sigs, Stage.STAGE1)


def test_same_pattern_two_signatures():
    sigs = load_signatures('id=1 action=alert content="ab"\nid=2 action=drop content="ab"')
    assert as_dict(match_buffer(b"xab", sigs, Stage.STAGE1)) == {1: 1, 2: 1}


def test_aho_corasick_first_occurrence():
    ac = AhoCorasick([b"aa", b"aaa", b"b"])
    assert ac.first_occurrences(b"caaaab") == {0: 1, 1: 1, 2: 5}


def _random_sigs(rng, alphabet, n):
    sigs = []
    for i in range(n):
        length = rng.randint(1, 6)
        pat = bytes(rng.choice(alphabet) for _ in range(length))
        stages = rng.choice([frozenset({Stage.STAGE1}), frozenset({Stage.STAGE2}), frozenset(Stage)])
        sigs.append(Signature(i + 1, rng.choice(list(Action)), pat, rng.random() < 0.5, stages))
    return SignatureSet(sigs)


def test_randomized_against_naive_oracle():
    rng = random.Random(77)
    alphabet = b"abAB\x00\xff"
    sigs = _random_sigs(rng, alphabet, 50)
    for _ in range(1000):
        buf = bytes(rng.choice(alphabet) for _ in range(rng.randint(0, 200)))
        stage = rng.choice(list(Stage))
        assert as_dict(match_buffer(buf, sigs, stage)) == naive(buf, sigs, stage)


ascii_patterns = st.binary(min_size=1, max_size=5).filter(lambda b: b.isascii())


@given(st.lists(ascii_patterns, min_size=1, max_size=8), st.binary(max_size=100).filter(lambda b: b.isascii()))
def test_nocase_upper_invariant(patterns, buf):
    sigs = SignatureSet(Signature(i + 1, Action.ALERT, p, nocase=True) for i, p in enumerate(patterns))
    ids = {m.signature_id for m in match_buffer(buf, sigs, Stage.STAGE2)}
    assert ids == {m.signature_id for m in match_buffer(buf.upper(), sigs, Stage.STAGE2)}


@given(st.lists(st.binary(min_size=1, max_size=4), min_size=1, max_size=10), st.binary(max_size=80), st.booleans())
def test_property_matches_naive(patterns, buf, nocase):
    sigs = SignatureSet(Signature(i + 1, Action.ALERT, p, nocase=nocase) for i, p in enumerate(patterns))
    assert as_dict(match_buffer(buf, sigs, Stage.STAGE1)) == naive(buf, sigs, Stage.STAGE1)


def test_match_offsets_within_buffer():
    rng = random.Random(5)
    sigs = _random_sigs(rng, b"xyz", 20)
    patterns = {s.id: s.pattern for s in sigs}
    for _ in range(200):
        buf = bytes(rng.choice(b"xyz") for _ in range(rng.randint(0, 40)))
        for m in match_buffer(buf, sigs, Stage.STAGE2):
            assert m.offset + len(patterns[m.signature_id]) <= len(buf)
