"""Seeded synthetic writing-process data.

Writers are parametric typing profiles; sessions replay a source text as
keystrokes with log-normal inter-key intervals, typo-and-correct episodes,
pauses before words and (in drafting mode) delayed insertions of skipped
characters. Essay corpora come in two flavours: text sampled from a language
model and held-out human prose with character-level noise.

Every constant lives in ``data/simgen_defaults.json``; pass a modified copy
through :func:`load_config` to change them. All output is a pure function of
the arguments and seeds.
"""
from __future__ import annotations

import copy
import enum
import json
import math
import random
import string
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional, Sequence

from .corpus import load_paragraphs, split_corpus
from .event_log import EventKind, KeystrokeEvent, Session
from .lm import NGramModel, sample_text


class Mode(str, enum.Enum):
    DRAFT = "Draft"
    TRANSCRIBE = "Transcribe"


class CorpusMode(str, enum.Enum):
    LM_SAMPLED = "LmSampled"
    PERTURBED_HUMAN = "PerturbedHuman"


@lru_cache(maxsize=1)
def _default_config_text() -> str:
    return resources.files("procsec.data").joinpath("simgen_defaults.json").read_text(encoding="utf-8")


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(override: Optional[dict] = None) -> dict:
    """Default generator constants, optionally overlaid with ``override``."""
    cfg = json.loads(_default_config_text())
    return _merge(cfg, override) if override else cfg


@dataclass(frozen=True)
class WriterProfile:
    writer_id: str
    mu_log_iki: float
    sigma_log_iki: float
    wordinitial_slowdown: float
    backspace_rate: float
    pause_rate: float
    pause_scale_ms: float
    seed: int


@dataclass(frozen=True)
class SessionSpec:
    mode: Mode
    text: str
    profile: WriterProfile
    seed: int
    session_id: str = ""
    task_id: str = ""


def _draw(rng: random.Random, d: dict) -> float:
    kind = d["dist"]
    if kind == "normal":
        return rng.gauss(d["mean"], d["sd"])
    if kind == "abs_normal":
        return abs(rng.gauss(d["mean"], d["sd"]))
    if kind == "uniform":
        return rng.uniform(d["low"], d["high"])
    raise ValueError(f"unknown distribution {kind!r}")


def gen_writer_profile(seed: int, config: Optional[dict] = None) -> WriterProfile:
    cfg = config or load_config()
    pop = cfg["population"]
    rng = random.Random(seed)
    mu = _draw(rng, pop["mu_log_iki"])
    # |N| can land arbitrarily close to 0; keep typing noise non-degenerate
    sigma = max(_draw(rng, pop["sigma_log_iki"]), cfg["sigma_floor"])
    slow = _draw(rng, pop["wordinitial_slowdown"])
    bs = _draw(rng, pop["backspace_rate"])
    pr = _draw(rng, pop["pause_rate"])
    ps = _draw(rng, pop["pause_scale_ms"])
    return WriterProfile(f"w{seed}", mu, sigma, slow, bs, pr, ps, seed)


def _is_word(ch: str) -> bool:
    return ch.isalnum()


def _omission_plan(text: str, rng: random.Random, cfg: dict) -> dict[int, int]:
    """Map text index of a skipped character -> number of chars typed before it is fixed."""
    lo, hi = cfg["draft"]["jump_episodes"]
    dlo, dhi = cfg["draft"]["jump_delay_chars"]
    want = rng.randint(lo, hi)
    plan: dict[int, int] = {}
    candidates = [i for i, ch in enumerate(text) if _is_word(ch)]
    rng.shuffle(candidates)
    taken: list[tuple[int, int]] = []
    for i in candidates:
        if len(plan) == want:
            break
        delay = rng.randint(dlo, dhi)
        end = i + delay + 1
        # episodes must not overlap: one pending omission at a time
        if any(i <= b and a <= end for a, b in taken):
            continue
        plan[i] = delay
        taken.append((i, end))
    return plan


class _Typist:
    """Accumulates events while tracking document text, caret and clock."""

    def __init__(self, profile: WriterProfile, rng: random.Random, cfg: dict, t0: int):
        self.p = profile
        self.rng = rng
        self.off = cfg["context_offsets"]
        self.doc: list[str] = []
        self.t = t0
        self.caret = 0
        self.events: list[KeystrokeEvent] = []
        self.first = True

    def _gap(self, extra_log: float, pause: float = 0.0) -> int:
        z = self.rng.gauss(0.0, 1.0)
        ms = math.exp(self.p.mu_log_iki + extra_log + self.p.sigma_log_iki * z) + pause
        return max(1, int(round(ms)))

    def _emit(self, ev_kind, payload, pos, gap):
        if not self.first:
            self.t += gap
        self.first = False
        self.events.append(KeystrokeEvent(self.t, ev_kind, payload, pos))

    def _offset_for(self, ch: str) -> float:
        prev = self.doc[-1] if self.doc else None
        if _is_word(ch):
            return self.p.wordinitial_slowdown if (prev is None or prev.isspace()) else 0.0
        if ch.isspace():
            return self.off["space"]
        return self.off["punctuation"]

    def type_char(self, ch: str, pause_rate: float) -> None:
        extra = self._offset_for(ch)
        pause = 0.0
        prev = self.doc[-1] if self.doc else None
        if _is_word(ch) and (prev is None or prev.isspace()) and self.rng.random() < pause_rate:
            pause = self.rng.expovariate(1.0 / self.p.pause_scale_ms)
        kind = EventKind.INSERT if self.caret == len(self.doc) else EventKind.JUMP_INSERT
        pos = len(self.doc)
        self._emit(kind, ch, pos, self._gap(extra, pause))
        self.doc.append(ch)
        self.caret = pos + 1

    def backspace(self, repeat: bool) -> None:
        key = "repeat_backspace" if repeat else "initial_backspace"
        pos = len(self.doc)
        self._emit(EventKind.BACKSPACE, "", pos, self._gap(self.off[key]))
        self.doc.pop()
        self.caret = pos - 1

    def jump_insert(self, ch: str, pos: int) -> None:
        self._emit(EventKind.JUMP_INSERT, ch, pos, self._gap(self.off["jump"]))
        self.doc.insert(pos, ch)
        self.caret = pos + 1


def gen_session(spec: SessionSpec, config: Optional[dict] = None) -> Session:
    """Keystroke session whose replay equals ``spec.text`` exactly."""
    if not spec.text:
        raise ValueError("session text must be non-empty")
    cfg = config or load_config()
    rng = random.Random(spec.seed)
    prof = spec.profile
    if spec.mode is Mode.TRANSCRIBE:
        tc = cfg["transcribe"]
        t0 = int(round(rng.uniform(*tc["initial_pause_ms"])))
        bs_rate = prof.backspace_rate * tc["backspace_factor"]
        pause_rate = prof.pause_rate * tc["pause_factor"]
        plan: dict[int, int] = {}
    else:
        t0 = int(round(rng.uniform(*cfg["draft"]["initial_pause_ms"])))
        bs_rate = prof.backspace_rate
        pause_rate = prof.pause_rate
        plan = _omission_plan(spec.text, rng, cfg)

    text = spec.text
    ty = _Typist(prof, rng, cfg, t0)
    overrun_max = cfg["typo_overrun_max"]
    pending: Optional[tuple[int, int]] = None  # (text index, chars left before the fix)
    for i, ch in enumerate(text):
        if i in plan:
            pending = (i, plan[i])
            continue
        if _is_word(ch) and rng.random() < bs_rate:
            wrong = rng.choice([c for c in string.ascii_lowercase if c != ch.lower()])
            ty.type_char(wrong, pause_rate)
            k = min(rng.randint(0, overrun_max), len(text) - i - 1)
            extra = [text[j] for j in range(i + 1, i + 1 + k) if j not in plan]
            for c in extra:
                ty.type_char(c, 0.0)
            for b in range(len(extra) + 1):
                ty.backspace(repeat=b > 0)
        ty.type_char(ch, pause_rate)
        if pending is not None:
            idx, left = pending
            left -= 1
            if left <= 0:
                ty.jump_insert(text[idx], idx)
                pending = None
            else:
                pending = (idx, left)
    if pending is not None:
        ty.jump_insert(text[pending[0]], pending[0])

    sid = spec.session_id or f"{prof.writer_id}-{spec.seed}"
    return Session(sid, prof.writer_id, spec.task_id, tuple(ty.events))


def default_text_pool(words_per_text: Optional[int] = None, config: Optional[dict] = None) -> list[str]:
    """Bundled prose cut into consecutive chunks of ``words_per_text`` words."""
    n = words_per_text or (config or load_config())["text_pool_words"]
    pool = []
    for _, pars in load_paragraphs():
        words = " ".join(pars).split()
        for i in range(0, len(words) - n + 1, n):
            pool.append(" ".join(words[i:i + n]))
    return pool


def gen_repeater_dataset(n_writers: int, sessions_per_writer: int, text_pool: Sequence[str],
                         seed: int, config: Optional[dict] = None) -> list[Session]:
    """``n_writers`` profiles, each with ``sessions_per_writer`` Draft sessions on distinct texts."""
    if n_writers < 2 or sessions_per_writer < 2:
        raise ValueError("need at least 2 writers and 2 sessions per writer")
    if len(text_pool) < sessions_per_writer:
        raise ValueError(f"text pool has {len(text_pool)} texts, need {sessions_per_writer}")
    cfg = config or load_config()
    rng = random.Random(seed)
    writer_seeds = rng.sample(range(2**31), n_writers)
    out = []
    for ws in writer_seeds:
        prof = gen_writer_profile(ws, cfg)
        for k, ti in enumerate(rng.sample(range(len(text_pool)), sessions_per_writer)):
            spec = SessionSpec(Mode.DRAFT, text_pool[ti], prof, rng.randrange(2**31),
                               session_id=f"{prof.writer_id}-s{k}", task_id=f"t{ti}")
            out.append(gen_session(spec, cfg))
    return out


def gen_mode_dataset(n_draft: int, n_transcribe: int, text_pool: Sequence[str], seed: int,
                     config: Optional[dict] = None) -> list[tuple[Session, Mode]]:
    """One fresh writer per session; Draft and Transcribe sessions interleaved by seed."""
    if not text_pool:
        raise ValueError("empty text pool")
    cfg = config or load_config()
    rng = random.Random(seed)
    modes = [Mode.DRAFT] * n_draft + [Mode.TRANSCRIBE] * n_transcribe
    rng.shuffle(modes)
    writer_seeds = rng.sample(range(2**31), len(modes))
    out = []
    for k, (mode, ws) in enumerate(zip(modes, writer_seeds)):
        prof = gen_writer_profile(ws, cfg)
        ti = rng.randrange(len(text_pool))
        spec = SessionSpec(mode, text_pool[ti], prof, rng.randrange(2**31),
                           session_id=f"m{k}", task_id=f"t{ti}")
        out.append((gen_session(spec, cfg), mode))
    return out


def perturb_text(text: str, rate: float, rng: random.Random) -> str:
    """Replace, drop or double each letter with total probability ``rate``."""
    if rate <= 0.0:
        return text
    out = []
    for ch in text:
        if ch.isalpha() and rng.random() < rate:
            op = rng.randrange(3)
            if op == 0:
                out.append(rng.choice([c for c in string.ascii_lowercase if c != ch.lower()]))
            elif op == 2:
                out.append(ch + ch)
        else:
            out.append(ch)
    return "".join(out)


def gen_corpora(lm: NGramModel, n_essays: int, words_per_essay, mode: CorpusMode | str, seed: int,
                held_out: Optional[Sequence[str]] = None, perturb_rate: Optional[float] = None,
                config: Optional[dict] = None) -> list[str]:
    """Essay texts of ``words_per_essay`` words (an int or an inclusive ``(lo, hi)`` range).

    ``LmSampled`` essays are ancestral samples from ``lm``. ``PerturbedHuman``
    essays are windows over the held-out prose (the bundled corpus's held-out
    slice unless ``held_out`` passages are given), noised by
    :func:`perturb_text`.
    """
    if n_essays < 1:
        raise ValueError("n_essays must be >= 1")
    mode = CorpusMode(mode)
    cfg = config or load_config()
    rate = cfg["corpora"]["perturb_rate"] if perturb_rate is None else perturb_rate
    lo, hi = (words_per_essay, words_per_essay) if isinstance(words_per_essay, int) else words_per_essay
    if lo < 1 or hi < lo:
        raise ValueError(f"bad essay length range {words_per_essay!r}")
    rng = random.Random(seed)
    out = []
    if mode is CorpusMode.LM_SAMPLED:
        for _ in range(n_essays):
            n = rng.randint(lo, hi)
            out.append(sample_text(lm, n, seed=rng.randrange(2**31), sentences=True))
        return out
    words = " ".join(held_out if held_out is not None else split_corpus().held_out).split()
    if len(words) < hi:
        raise ValueError(f"held-out text has {len(words)} words, need {hi}")
    for _ in range(n_essays):
        n = rng.randint(lo, hi)
        start = rng.randrange(len(words) - n + 1)
        out.append(perturb_text(" ".join(words[start:start + n]), rate, rng))
    return out
