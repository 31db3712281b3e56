"""Keystroke event model, session-log parsing, validation and text replay.

A session log is UTF-8 JSON lines, one event per line::

    {"session_id": "s1", "writer_id": "w1", "task_id": "t1",
     "t_ms": 0, "kind": "Insert", "payload": "h", "pos": 0, "cut_len": 0}

``task_id``, ``payload`` and ``cut_len`` may be omitted (defaults ``""``,
``""``, ``0``); unknown fields are ignored. This layout is defined by this
package and is not the format of any particular logging platform.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class DataError(ValueError):
    """Raised for malformed input data (bad log lines, broken preconditions)."""


class EventKind(str, enum.Enum):
    INSERT = "Insert"
    BACKSPACE = "Backspace"
    CUT = "Cut"
    PASTE = "Paste"
    JUMP_INSERT = "JumpInsert"


INSERTING_KINDS = frozenset({EventKind.INSERT, EventKind.JUMP_INSERT, EventKind.PASTE})

FIELD_ORDER = ("session_id", "writer_id", "task_id", "t_ms", "kind", "payload", "pos", "cut_len")


@dataclass(frozen=True)
class KeystrokeEvent:
    t_ms: int
    kind: EventKind
    payload: str = ""
    pos: int = 0
    cut_len: int = 0

    def caret_after(self) -> int:
        """Caret index once the event has been applied."""
        if self.kind in INSERTING_KINDS:
            return self.pos + len(self.payload)
        if self.kind is EventKind.BACKSPACE:
            return self.pos - 1
        return self.pos


@dataclass(frozen=True)
class Session:
    session_id: str
    writer_id: str
    task_id: str = ""
    events: tuple[KeystrokeEvent, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.events, tuple):
            object.__setattr__(self, "events", tuple(self.events))


@dataclass(frozen=True)
class Violation:
    index: int
    rule: str
    message: str

    def __str__(self):
        return f"event {self.index}: {self.rule}: {self.message}"


def _require_int(rec, name, lineno, default=None):
    if name not in rec:
        if default is None:
            raise DataError(f"line {lineno}: missing field {name!r}")
        return default
    value = rec[name]
    if isinstance(value, bool) or not isinstance(value, int):
        raise DataError(f"line {lineno}: field {name!r} must be an integer, got {value!r}")
    return value


def _require_str(rec, name, lineno, default=None):
    if name not in rec:
        if default is None:
            raise DataError(f"line {lineno}: missing field {name!r}")
        return default
    value = rec[name]
    if not isinstance(value, str):
        raise DataError(f"line {lineno}: field {name!r} must be a string, got {value!r}")
    return value


def derive_jump_inserts(events: Sequence[KeystrokeEvent]) -> tuple[KeystrokeEvent, ...]:
    """Relabel every Insert whose position differs from the running caret as JumpInsert."""
    out = []
    caret = 0
    for ev in events:
        if ev.kind is EventKind.INSERT and ev.pos != caret:
            ev = KeystrokeEvent(ev.t_ms, EventKind.JUMP_INSERT, ev.payload, ev.pos, ev.cut_len)
        out.append(ev)
        caret = ev.caret_after()
    return tuple(out)


def parse_session_log(data: bytes | str, derive_jumps: bool = False) -> list[Session]:
    """Parse a line-delimited session log into sessions.

    Sessions come back in order of first appearance; events inside a session
    are stably sorted by ``t_ms`` so equal timestamps keep their input order.
    With ``derive_jumps`` set, mid-stream Inserts that do not continue at the
    caret are relabelled as JumpInsert.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DataError(f"input is not valid UTF-8: {exc}") from None
    order: list[str] = []
    meta: dict[str, tuple[str, str]] = {}
    grouped: dict[str, list[KeystrokeEvent]] = {}
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {lineno}: malformed record ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise DataError(f"line {lineno}: record must be an object")
        sid = _require_str(rec, "session_id", lineno)
        wid = _require_str(rec, "writer_id", lineno)
        tid = _require_str(rec, "task_id", lineno, default="")
        kind_name = _require_str(rec, "kind", lineno)
        try:
            kind = EventKind(kind_name)
        except ValueError:
            raise DataError(f"line {lineno}: unknown event kind {kind_name!r}") from None
        t_ms = _require_int(rec, "t_ms", lineno)
        if t_ms < 0:
            raise DataError(f"line {lineno}: negative timestamp {t_ms}")
        pos = _require_int(rec, "pos", lineno)
        cut_len = _require_int(rec, "cut_len", lineno, default=0)
        payload = _require_str(rec, "payload", lineno, default="")
        if sid not in grouped:
            order.append(sid)
            grouped[sid] = []
            meta[sid] = (wid, tid)
        elif meta[sid] != (wid, tid):
            raise DataError(f"line {lineno}: session {sid!r} changes writer_id/task_id")
        grouped[sid].append(KeystrokeEvent(t_ms, kind, payload, pos, cut_len))

    sessions = []
    for sid in order:
        events = sorted(grouped[sid], key=lambda ev: ev.t_ms)
        if derive_jumps:
            events = derive_jump_inserts(events)
        wid, tid = meta[sid]
        sessions.append(Session(sid, wid, tid, tuple(events)))
    return sessions


def serialize_sessions(sessions: Iterable[Session]) -> bytes:
    """Inverse of :func:`parse_session_log` for valid sessions."""
    lines = []
    for s in sessions:
        for ev in s.events:
            rec = {
                "session_id": s.session_id,
                "writer_id": s.writer_id,
                "task_id": s.task_id,
                "t_ms": ev.t_ms,
                "kind": ev.kind.value,
                "payload": ev.payload,
                "pos": ev.pos,
                "cut_len": ev.cut_len,
            }
            lines.append(json.dumps(rec, ensure_ascii=False, separators=(",", ":")))
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def _check_event(ev: KeystrokeEvent, doc_len: int) -> tuple[str, str] | None:
    if ev.t_ms < 0:
        return "timestamp", f"negative timestamp {ev.t_ms}"
    if ev.pos < 0:
        return "position", f"negative position {ev.pos}"
    if ev.cut_len < 0 or (ev.kind is not EventKind.CUT and ev.cut_len != 0):
        return "cut_len", f"cut_len {ev.cut_len} not allowed for {ev.kind.value}"
    if ev.kind in (EventKind.INSERT, EventKind.JUMP_INSERT):
        if len(ev.payload) != 1:
            return "payload", f"{ev.kind.value} payload must be one character, got {ev.payload!r}"
    elif ev.kind is EventKind.PASTE:
        if not ev.payload:
            return "payload", "Paste payload is empty"
    elif ev.payload:
        return "payload", f"{ev.kind.value} carries a payload"
    if ev.pos > doc_len:
        return "position", f"pos {ev.pos} beyond document length {doc_len}"
    if ev.kind is EventKind.BACKSPACE and ev.pos < 1:
        return "backspace", "backspace on empty prefix (pos < 1)"
    if ev.kind is EventKind.CUT and ev.pos + ev.cut_len > doc_len:
        return "cut_range", f"cut [{ev.pos}, {ev.pos + ev.cut_len}) beyond document length {doc_len}"
    return None


def _apply(doc: list[str], ev: KeystrokeEvent) -> None:
    if ev.kind in INSERTING_KINDS:
        doc[ev.pos:ev.pos] = list(ev.payload)
    elif ev.kind is EventKind.BACKSPACE:
        del doc[ev.pos - 1]
    else:
        del doc[ev.pos:ev.pos + ev.cut_len]


def validate(session: Session) -> list[Violation]:
    """Replay ``session`` and report every broken invariant.

    Events that break a positional rule are skipped so later events are
    still checked against a plausible document.
    """
    violations = []
    doc: list[str] = []
    prev_t = None
    for i, ev in enumerate(session.events):
        if prev_t is not None and ev.t_ms < prev_t:
            violations.append(Violation(i, "order", f"t_ms {ev.t_ms} precedes previous {prev_t}"))
        prev_t = ev.t_ms if prev_t is None else max(prev_t, ev.t_ms)
        problem = _check_event(ev, len(doc))
        if problem is not None:
            violations.append(Violation(i, *problem))
            continue
        _apply(doc, ev)
    return violations


def replay_final_text(session: Session) -> str:
    bad = validate(session)
    if bad:
        raise DataError(f"session {session.session_id!r} is invalid: {bad[0]}")
    doc: list[str] = []
    for ev in session.events:
        _apply(doc, ev)
    return "".join(doc)
