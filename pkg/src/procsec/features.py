"""Writing-process features computed from keystroke sessions.

Inter-key intervals (IKIs) are measured between consecutive events, floored
at 1 ms. ``logIKI`` features use the natural log of milliseconds and speed
features use ``1000 / iki`` characters per second. Features whose context
never occurs in a session (for example, no backspaces) are ``None``.
"""
from __future__ import annotations

import csv
import enum
import io
import math
import statistics
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .event_log import EventKind, KeystrokeEvent, Session

CATALOG_FEATURES = (
    "inword_logIKI_median",
    "inword_logIKI_mean",
    "wordinitial_logIKI_median",
    "append_interword_interval_logIKIs_mean",
    "wordinitial_logIKI_mean",
    "append_interword_interval_logIKIs_median",
    "append_interword_interval_speed_median",
    "wordinitial_char_per_sec_median",
    "iki400_AppendBurst_len_mean",
    "iki400_AllActionBurst_len_mean",
    "initial_backspace_char_per_sec_median",
    "iki200_AppendBurst_len_mean",
    "initial_backspace_logIKI_median",
)

AUX_FEATURES = (
    "n_events",
    "n_backspaces",
    "n_pastes",
    "n_jump_edits",
    "initial_pause_ms",
    "total_time_ms",
)

ALL_FEATURES = CATALOG_FEATURES + AUX_FEATURES

FeatureVector = dict  # feature name -> float, or None when the context is absent


class Context(str, enum.Enum):
    WORD_INITIAL = "WordInitial"
    IN_WORD = "InWord"
    INTERWORD_SPACE = "InterwordSpace"
    INITIAL_BACKSPACE = "InitialBackspace"
    REPEAT_BACKSPACE = "RepeatBackspace"
    OTHER = "Other"


class BurstMode(str, enum.Enum):
    APPEND_ONLY = "AppendOnly"
    ALL_ACTION = "AllAction"


@dataclass(frozen=True)
class AnnotatedEvent:
    event: KeystrokeEvent
    context: Context
    iki_ms: Optional[int]
    append: bool  # plain Insert at the end of the document


@dataclass(frozen=True)
class Burst:
    start_index: int
    end_index: int
    length_chars: int
    mode: BurstMode
    threshold_ms: int


def is_word_char(ch: str) -> bool:
    return ch.isalnum()


def _context_for_append(ch: str, prev: Optional[str]) -> Context:
    if is_word_char(ch):
        if prev is None or prev.isspace():
            return Context.WORD_INITIAL
        if is_word_char(prev):
            return Context.IN_WORD
        return Context.OTHER
    if ch.isspace() and prev is not None and not prev.isspace():
        return Context.INTERWORD_SPACE
    return Context.OTHER


def classify_keystrokes(session: Session) -> list[AnnotatedEvent]:
    """Annotate each event with its typing context and IKI.

    Only plain Inserts at the end of the document can be word-initial,
    in-word or interword; Paste, Cut, JumpInsert and mid-document inserts
    are always ``Other``. The session must already be valid.
    """
    out = []
    doc: list[str] = []
    prev_ev = None
    for ev in session.events:
        iki = None if prev_ev is None else max(1, ev.t_ms - prev_ev.t_ms)
        append = ev.kind is EventKind.INSERT and ev.pos == len(doc)
        if append:
            ctx = _context_for_append(ev.payload, doc[-1] if doc else None)
        elif ev.kind is EventKind.BACKSPACE:
            repeat = prev_ev is not None and prev_ev.kind is EventKind.BACKSPACE
            ctx = Context.REPEAT_BACKSPACE if repeat else Context.INITIAL_BACKSPACE
        else:
            ctx = Context.OTHER
        out.append(AnnotatedEvent(ev, ctx, iki, append))

        if ev.kind in (EventKind.INSERT, EventKind.JUMP_INSERT, EventKind.PASTE):
            doc[ev.pos:ev.pos] = list(ev.payload)
        elif ev.kind is EventKind.BACKSPACE:
            del doc[ev.pos - 1]
        else:
            del doc[ev.pos:ev.pos + ev.cut_len]
        prev_ev = ev
    return out


def _event_chars(ev: KeystrokeEvent) -> int:
    if ev.kind is EventKind.PASTE:
        return len(ev.payload)
    return 1


def _bursts(annotated: Sequence[AnnotatedEvent], threshold_ms: int, mode: BurstMode) -> list[Burst]:
    bursts = []
    start = None
    length = 0
    for i, a in enumerate(annotated):
        member = a.append if mode is BurstMode.APPEND_ONLY else True
        if not member:
            if start is not None:
                bursts.append(Burst(start, i - 1, length, mode, threshold_ms))
                start = None
            continue
        continues = start is not None and a.iki_ms is not None and a.iki_ms <= threshold_ms
        if not continues:
            if start is not None:
                bursts.append(Burst(start, i - 1, length, mode, threshold_ms))
            start, length = i, 0
        length += _event_chars(a.event)
    if start is not None:
        bursts.append(Burst(start, len(annotated) - 1, length, mode, threshold_ms))
    return bursts


def detect_bursts(session: Session, threshold_ms: int, mode: BurstMode | str) -> list[Burst]:
    """Split a session into maximal bursts with no internal pause above ``threshold_ms``.

    ``AppendOnly`` bursts contain only end-of-document Inserts, so any other
    event ends the running burst. ``AllAction`` bursts contain every event;
    a paste contributes its full payload length. A lone event is a burst.
    """
    if threshold_ms <= 0:
        raise ValueError("threshold_ms must be positive")
    return _bursts(classify_keystrokes(session), threshold_ms, BurstMode(mode))


def _median(xs):
    return statistics.median(xs) if xs else None


def _mean(xs):
    return math.fsum(xs) / len(xs) if xs else None


def _burst_mean(bursts):
    return _mean([b.length_chars for b in bursts])


def extract_features(session: Session) -> FeatureVector:
    annotated = classify_keystrokes(session)

    def ikis(ctx):
        return [a.iki_ms for a in annotated if a.context is ctx and a.iki_ms is not None]

    inword = ikis(Context.IN_WORD)
    initial = ikis(Context.WORD_INITIAL)
    space = ikis(Context.INTERWORD_SPACE)
    backsp = ikis(Context.INITIAL_BACKSPACE)

    def logs(xs):
        return [math.log(x) for x in xs]

    def speeds(xs):
        return [1000.0 / x for x in xs]

    events = session.events
    fv: FeatureVector = {
        "inword_logIKI_median": _median(logs(inword)),
        "inword_logIKI_mean": _mean(logs(inword)),
        "wordinitial_logIKI_median": _median(logs(initial)),
        "append_interword_interval_logIKIs_mean": _mean(logs(space)),
        "wordinitial_logIKI_mean": _mean(logs(initial)),
        "append_interword_interval_logIKIs_median": _median(logs(space)),
        "append_interword_interval_speed_median": _median(speeds(space)),
        "wordinitial_char_per_sec_median": _median(speeds(initial)),
        "iki400_AppendBurst_len_mean": _burst_mean(_bursts(annotated, 400, BurstMode.APPEND_ONLY)),
        "iki400_AllActionBurst_len_mean": _burst_mean(_bursts(annotated, 400, BurstMode.ALL_ACTION)),
        "initial_backspace_char_per_sec_median": _median(speeds(backsp)),
        "iki200_AppendBurst_len_mean": _burst_mean(_bursts(annotated, 200, BurstMode.APPEND_ONLY)),
        "initial_backspace_logIKI_median": _median(logs(backsp)),
        "n_events": float(len(events)),
        "n_backspaces": float(sum(ev.kind is EventKind.BACKSPACE for ev in events)),
        "n_pastes": float(sum(ev.kind is EventKind.PASTE for ev in events)),
        "n_jump_edits": float(sum(ev.kind is EventKind.JUMP_INSERT for ev in events)),
        "initial_pause_ms": float(events[0].t_ms) if events else None,
        "total_time_ms": float(events[-1].t_ms) if events else None,
    }
    return {k: (None if v is None else float(v)) for k, v in fv.items()}


def pair_distance(a: Mapping[str, Optional[float]], b: Mapping[str, Optional[float]],
                  names: Sequence[str] = CATALOG_FEATURES, scalar: bool = False):
    """Per-feature absolute differences between two feature vectors.

    Missing on either side gives a missing distance. With ``scalar=True`` the
    Euclidean norm over the features present on both sides is returned
    instead (``None`` if no feature is shared).
    """
    dist = {}
    for name in names:
        x, y = a.get(name), b.get(name)
        dist[name] = None if x is None or y is None else abs(x - y)
    if not scalar:
        return dist
    present = [d for d in dist.values() if d is not None]
    return math.sqrt(math.fsum(d * d for d in present)) if present else None


def format_feature_table(rows: Sequence[tuple[Session, FeatureVector]]) -> str:
    """CSV with id columns, then the catalog and auxiliary features; missing is empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["session_id", "writer_id", "task_id", *ALL_FEATURES])
    for s, fv in rows:
        w.writerow([s.session_id, s.writer_id, s.task_id,
                    *("" if fv.get(n) is None else repr(float(fv[n])) for n in ALL_FEATURES)])
    return buf.getvalue()


def parse_feature_table(text: str) -> list[tuple[dict, FeatureVector]]:
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        ids = {k: rec.pop(k, "") for k in ("session_id", "writer_id", "task_id")}
        out.append((ids, {k: (float(v) if v != "" else None) for k, v in rec.items()}))
    return out
