import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from procsec.event_log import (DataError, EventKind, KeystrokeEvent, Session, derive_jump_inserts,
                               parse_session_log, replay_final_text, serialize_sessions, validate)

from conftest import make_session, random_session


def line(**kw):
    rec = {"session_id": "s1", "writer_id": "w1", "t_ms": 0, "kind": "Insert", "payload": "h", "pos": 0}
    rec.update(kw)
    return json.dumps(rec)


def test_parse_single_record():
    out = parse_session_log(line().encode())
    assert len(out) == 1
    s = out[0]
    assert (s.session_id, s.writer_id, s.task_id) == ("s1", "w1", "")
    assert s.events == (KeystrokeEvent(0, EventKind.INSERT, "h", 0, 0),)


def test_parse_empty():
    assert parse_session_log(b"") == []
    assert parse_session_log(b"\n\n") == []


def test_parse_interleaved_sessions():
    text = "\n".join([
        line(session_id="a", t_ms=10, payload="x", pos=0),
        line(session_id="b", writer_id="w2", t_ms=5, payload="p", pos=0),
        line(session_id="a", t_ms=0, payload="y", pos=0),
        line(session_id="b", writer_id="w2", t_ms=7, payload="q", pos=1),
        line(session_id="a", t_ms=20, kind="Backspace", payload="", pos=2),
        line(session_id="b", writer_id="w2", t_ms=6, payload="r", pos=1),
    ])
    a, b = parse_session_log(text)
    assert [s.session_id for s in (a, b)] == ["a", "b"]
    assert [(e.t_ms, e.payload) for e in a.events] == [(0, "y"), (10, "x"), (20, "")]
    assert [(e.t_ms, e.payload) for e in b.events] == [(5, "p"), (6, "r"), (7, "q")]
    assert b.writer_id == "w2"


def test_parse_ties_keep_input_order():
    text = "\n".join([line(t_ms=5, payload="a"), line(t_ms=5, payload="b", pos=1)])
    (s,) = parse_session_log(text)
    assert [e.payload for e in s.events] == ["a", "b"]


def test_parse_ignores_unknown_fields_and_defaults():
    (s,) = parse_session_log(line(extra=1, cut_len=0, task_id="t9"))
    assert s.task_id == "t9"


@pytest.mark.parametrize("bad, needle", [
    ("{not json", "line 2"),
    (line(kind="Teleport"), "unknown event kind"),
    (line(t_ms=-3), "negative timestamp"),
    (line(t_ms="7"), "integer"),
    ("[1, 2]", "object"),
])
def test_parse_errors_name_the_line(bad, needle):
    with pytest.raises(DataError, match=needle):
        parse_session_log(line() + "\n" + bad)
    with pytest.raises(DataError, match="line 2"):
        parse_session_log(line() + "\n" + bad)


def test_parse_missing_field():
    rec = json.loads(line())
    del rec["pos"]
    with pytest.raises(DataError, match="missing field 'pos'"):
        parse_session_log(json.dumps(rec))


def test_parse_rejects_writer_change():
    with pytest.raises(DataError, match="writer_id"):
        parse_session_log(line() + "\n" + line(writer_id="w9", t_ms=1, pos=1))


def test_validate_well_formed():
    s = make_session([(0, "Insert", "h", 0), (10, "Backspace", "", 1)])
    assert validate(s) == []


def test_validate_backspace_on_empty():
    s = make_session([(0, "Backspace", "", 0)])
    (v,) = validate(s)
    assert (v.index, v.rule) == (0, "backspace")


def test_validate_order():
    s = make_session([(100, "Insert", "a", 0), (50, "Insert", "b", 1)])
    (v,) = validate(s)
    assert (v.index, v.rule) == (1, "order")


@pytest.mark.parametrize("rows, rule", [
    ([(0, "Insert", "ab", 0)], "payload"),
    ([(0, "Insert", "a", 2)], "position"),
    ([(0, "Insert", "a", 0), (1, "Cut", "", 0, 3)], "cut_range"),
    ([(0, "Paste", "", 0)], "payload"),
    ([(0, "Insert", "a", 0, 1)], "cut_len"),
    ([(0, "Insert", "a", 0), (1, "Backspace", "x", 1)], "payload"),
])
def test_validate_rules(rows, rule):
    assert [v.rule for v in validate(make_session(rows))] == [rule]


def test_replay_examples():
    assert replay_final_text(make_session([(0, "Insert", "h", 0), (1, "Insert", "i", 1)])) == "hi"
    assert replay_final_text(make_session([(0, "Insert", "h", 0), (1, "Insert", "i", 1),
                                           (2, "Backspace", "", 2)])) == "h"
    s = make_session([(0, "Insert", "h", 0), (1, "Insert", "i", 1), (2, "Paste", "abc", 0)])
    assert replay_final_text(s) == "abchi"


def test_replay_cut_and_jump():
    s = make_session([(0, "Paste", "hello", 0), (5, "Cut", "", 1, 3), (9, "JumpInsert", "X", 0)])
    assert replay_final_text(s) == "Xho"


def test_replay_invalid_names_violation():
    with pytest.raises(DataError, match="event 0: backspace"):
        replay_final_text(make_session([(0, "Backspace", "", 0)]))


def test_replay_on_fixture(twenty):
    assert validate(twenty) == []
    assert replay_final_text(twenty) == "xthe cat sat. "


def test_derive_jumps():
    s = make_session([(0, "Insert", "a", 0), (1, "Insert", "b", 1), (2, "Insert", "c", 0), (3, "Insert", "d", 3)])
    kinds = [e.kind for e in derive_jump_inserts(s.events)]
    assert kinds == [EventKind.INSERT, EventKind.INSERT, EventKind.JUMP_INSERT, EventKind.JUMP_INSERT]
    (parsed,) = parse_session_log(serialize_sessions([s]), derive_jumps=True)
    assert [e.kind for e in parsed.events] == kinds
    assert replay_final_text(parsed) == replay_final_text(s) == "cabd"


def test_session_coerces_events_to_tuple():
    s = Session("a", "w", "", [KeystrokeEvent(0, EventKind.INSERT, "a", 0)])
    assert isinstance(s.events, tuple)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 60))
def test_round_trip_and_length_law(seed, n):
    s = random_session(random.Random(seed), n, sid=f"s{seed}")
    assert validate(s) == []
    (back,) = parse_session_log(serialize_sessions([s]))
    assert back == s
    text = replay_final_text(s)
    inserted = sum(len(e.payload) for e in s.events)
    backspaces = sum(e.kind is EventKind.BACKSPACE for e in s.events)
    cut = sum(e.cut_len for e in s.events)
    assert len(text) == inserted - backspaces - cut
    assert replay_final_text(s) == text


def test_round_trip_multi_session_file():
    rng = random.Random(3)
    sessions = [random_session(rng, 25, sid=f"s{i}", wid=f"w{i % 2}") for i in range(4)]
    blob = serialize_sessions(sessions)
    assert parse_session_log(blob) == sessions
    assert serialize_sessions(parse_session_log(blob)) == blob
