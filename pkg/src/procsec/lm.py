"""Word-level n-gram language model and perplexity scoring.

Any object with ``order``, ``map_token(token)`` and ``logprob(context, token)``
can be scored by :func:`perplexity`; :class:`NGramModel` is the bundled
backend and :class:`UniformModel` a reference model for tests.
"""
from __future__ import annotations

import bisect
import hashlib
import json
import math
import random
import re
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"
RESERVED = (UNK, BOS, EOS)

MODEL_FORMAT = "procsec-ngram"
MODEL_VERSION = 1

_WORD_RE = re.compile(r"[^\W_]+")
_SENT_RE = re.compile(r"(?<=[.!?])(?=\s|$)")


def tokenize(text: str) -> list[str]:
    """Lowercased maximal runs of alphanumeric characters; everything else separates."""
    return [m.group(0).lower() for m in _WORD_RE.finditer(text)]


def split_sentences(text: str) -> list[str]:
    """Split after ``.``, ``!`` or ``?`` when followed by whitespace or the end."""
    return [s.strip() for s in _SENT_RE.split(text) if s.strip()]


class LanguageModel(Protocol):
    order: int

    def map_token(self, token: str) -> str: ...

    def logprob(self, context: tuple[str, ...], token: str) -> float: ...


@dataclass(frozen=True)
class PerplexityReport:
    ppl: float
    n_tokens: int
    log_prob_sum: float

    @classmethod
    def from_sum(cls, log_prob_sum: float, n_tokens: int) -> "PerplexityReport":
        return cls(math.exp(-log_prob_sum / n_tokens), n_tokens, log_prob_sum)

    @classmethod
    def combine(cls, reports: Iterable["PerplexityReport"]) -> "PerplexityReport":
        """Token-weighted pooling of several reports into one."""
        reports = list(reports)
        return cls.from_sum(math.fsum(r.log_prob_sum for r in reports),
                            sum(r.n_tokens for r in reports))


class UniformModel:
    """Assigns ``1/len(vocab_out)`` to every output token in every context."""

    def __init__(self, words: Iterable[str], order: int = 1):
        self.order = order
        self.words = frozenset(words)
        self.n_out = len(self.words) + 2  # words + <unk> + </s>

    def map_token(self, token):
        return token if token in self.words else UNK

    def logprob(self, context, token):
        return -math.log(self.n_out)


@dataclass
class NGramModel:
    """Additively smoothed n-gram model with backoff to the longest seen context.

    ``counts`` maps a context tuple (length ``0 .. order-1``) to a mapping of
    next token to count. The output support is every word type plus
    ``<unk>`` and ``</s>``; ``<s>`` only ever appears in contexts.
    """

    order: int
    alpha: float
    min_count: int
    words: tuple[str, ...]
    counts: dict[tuple[str, ...], dict[str, int]]
    trained_on: str = ""
    _totals: dict = field(default_factory=dict, repr=False, compare=False)
    _word_set: frozenset = field(default=frozenset(), repr=False, compare=False)
    _sample_cache: dict = field(default_factory=dict, repr=False, compare=False)
    _vocab_out: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        self._word_set = frozenset(self.words)
        self._vocab_out = (*self.words, UNK, EOS)
        self._totals = {ctx: sum(nexts.values()) for ctx, nexts in self.counts.items()}

    @property
    def vocab(self) -> frozenset:
        return self._word_set | set(RESERVED)

    @property
    def vocab_out(self) -> tuple[str, ...]:
        return self._vocab_out

    @property
    def n_out(self) -> int:
        return len(self.words) + 2

    def map_token(self, token: str) -> str:
        return token if token in self._word_set or token in (BOS, EOS) else UNK

    def _resolve(self, context: tuple[str, ...]) -> tuple[str, ...]:
        ctx = tuple(context[-(self.order - 1):]) if self.order > 1 else ()
        while ctx and self._totals.get(ctx, 0) == 0:
            ctx = ctx[1:]
        return ctx

    def prob(self, context: Sequence[str], token: str) -> float:
        ctx = self._resolve(tuple(context))
        total = self._totals.get(ctx, 0)
        c = self.counts.get(ctx, {}).get(token, 0)
        return (c + self.alpha) / (total + self.alpha * self.n_out)

    def logprob(self, context, token):
        return math.log(self.prob(context, token))

    def distribution(self, context: Sequence[str]) -> dict[str, float]:
        return {t: self.prob(context, t) for t in self.vocab_out}

    # -- persistence -----------------------------------------------------
    def to_dict(self) -> dict:
        table = sorted(([*ctx, tok, n] for ctx, nexts in self.counts.items() for tok, n in nexts.items()),
                       key=lambda row: (len(row), row[:-1]))
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "order": self.order,
            "alpha": self.alpha,
            "min_count": self.min_count,
            "trained_on": self.trained_on,
            "vocab": list(self.words),
            "counts": table,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "NGramModel":
        if d.get("format") != MODEL_FORMAT:
            raise ValueError("not an n-gram model file")
        if d.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')!r}")
        counts: dict[tuple[str, ...], dict[str, int]] = {}
        for row in d["counts"]:
            *ctx, tok, n = row
            counts.setdefault(tuple(ctx), {})[tok] = int(n)
        return cls(int(d["order"]), float(d["alpha"]), int(d["min_count"]),
                   tuple(d["vocab"]), counts, d.get("trained_on", ""))

    @classmethod
    def loads(cls, text: str) -> "NGramModel":
        return cls.from_dict(json.loads(text))

    def fingerprint(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()


def corpus_fingerprint(corpus: Sequence[str]) -> str:
    h = hashlib.sha256()
    for text in corpus:
        h.update(text.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


def train_ngram(corpus: Sequence[str], order: int = 3, alpha: float = 0.1, min_count: int = 1) -> NGramModel:
    """Count n-grams over each text padded with ``<s>`` and closed with ``</s>``.

    Tokens seen fewer than ``min_count`` times are counted as ``<unk>``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if not corpus:
        raise ValueError("cannot train on an empty corpus")
    tokenized = [tokenize(t) for t in corpus]
    freq: dict[str, int] = {}
    for toks in tokenized:
        for t in toks:
            freq[t] = freq.get(t, 0) + 1
    words = tuple(sorted(t for t, n in freq.items() if n >= min_count and t not in RESERVED))
    word_set = frozenset(words)

    counts: dict[tuple[str, ...], dict[str, int]] = {}
    for toks in tokenized:
        seq = [BOS] * (order - 1) + [t if t in word_set else UNK for t in toks] + [EOS]
        for i in range(order - 1, len(seq)):
            tok = seq[i]
            for k in range(order):
                ctx = tuple(seq[i - k:i])
                nxt = counts.setdefault(ctx, {})
                nxt[tok] = nxt.get(tok, 0) + 1
    return NGramModel(order, float(alpha), min_count, words, counts, corpus_fingerprint(corpus))


def token_logprobs(model: LanguageModel, tokens: Sequence[str], eos: bool = True) -> list[float]:
    """Natural-log probability of each scored position (incl. the closing ``</s>``)."""
    pad = max(model.order - 1, 0)
    seq = [BOS] * pad + [model.map_token(t) for t in tokens] + ([EOS] if eos else [])
    return [model.logprob(tuple(seq[max(0, i - pad):i]) if pad else (), seq[i])
            for i in range(pad, len(seq))]


def perplexity(model: LanguageModel, tokens: Sequence[str]) -> PerplexityReport:
    """``exp(-(1/N) * sum(ln p))`` over the tokens plus the closing ``</s>``."""
    if not tokens:
        raise ValueError("cannot score an empty token sequence")
    lps = token_logprobs(model, tokens)
    return PerplexityReport.from_sum(math.fsum(lps), len(lps))


def essay_perplexity(model: LanguageModel, text: str) -> PerplexityReport:
    tokens = tokenize(text)
    if not tokens:
        raise ValueError("essay has no tokens")
    return perplexity(model, tokens)


def sentence_perplexities(model: LanguageModel, text: str) -> list[PerplexityReport]:
    out = []
    for sent in split_sentences(text):
        toks = tokenize(sent)
        if toks:
            out.append(perplexity(model, toks))
    return out


@dataclass(frozen=True)
class PrefixCurve:
    points: tuple[tuple[int, float], ...]

    @property
    def n_words(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.points)


@dataclass(frozen=True)
class PrefixSummary:
    n_words: int
    count: int
    mean: float
    std: float


def prefix_perplexity_curve(model: LanguageModel, text: str, n_start: int = 10,
                            n_end: int = 400, step: int = 10) -> PrefixCurve:
    """Perplexity of the first N whitespace-delimited words for N in the sweep.

    Lengths beyond the text's word count are omitted, as are prefixes that
    contain no tokens.
    """
    words = text.split()
    # tokens never span whitespace, so each prefix's tokens are a prefix of the full token list
    ends, toks = [], []
    for w in words[:n_end]:
        toks.extend(tokenize(w))
        ends.append(len(toks))
    lps = token_logprobs(model, toks, eos=False)
    pad = max(model.order - 1, 0)
    mapped = [BOS] * pad + [model.map_token(t) for t in toks]
    points = []
    for n in range(n_start, n_end + 1, step):
        if n > len(words):
            break
        m = ends[n - 1]
        if m == 0:
            continue
        ctx = tuple(mapped[m:m + pad]) if pad else ()
        eos_lp = model.logprob(ctx, EOS)
        points.append((n, PerplexityReport.from_sum(math.fsum([*lps[:m], eos_lp]), m + 1).ppl))
    return PrefixCurve(tuple(points))


def aggregate_curves(curves: Iterable[PrefixCurve]) -> list[PrefixSummary]:
    """Mean and population standard deviation of perplexity at each N."""
    by_n: dict[int, list[float]] = {}
    for c in curves:
        for n, p in c.points:
            by_n.setdefault(n, []).append(p)
    return [PrefixSummary(n, len(v), statistics.fmean(v), statistics.pstdev(v))
            for n, v in sorted(by_n.items())]


def _sampler_tables(model: NGramModel, ctx: tuple[str, ...]):
    cached = model._sample_cache.get(ctx)
    if cached is None:
        nexts = model.counts.get(ctx, {})
        toks = sorted(nexts)
        cum, acc = [], 0
        for t in toks:
            acc += nexts[t]
            cum.append(acc)
        cached = (toks, cum, acc)
        model._sample_cache[ctx] = cached
    return cached


def _draw(model: NGramModel, context, rng: random.Random) -> str:
    # p = (c + a) / (C + aV) is a mixture: empirical counts with weight C/(C+aV), uniform otherwise
    ctx = model._resolve(tuple(context))
    toks, cum, total = _sampler_tables(model, ctx)
    smooth = model.alpha * model.n_out
    if rng.random() * (total + smooth) < total:
        return toks[bisect.bisect_right(cum, rng.random() * total)]
    out = model.vocab_out
    return out[rng.randrange(len(out))]


def sample_text(model: NGramModel, n_words: int, seed: int, sentences: bool = False) -> str:
    """Ancestral sample of ``n_words`` words from the smoothed conditionals.

    ``</s>`` and ``<unk>`` draws are rejected and redrawn, so exactly
    ``n_words`` real words come out. With ``sentences=True`` a drawn
    ``</s>`` instead closes the current sentence with a full stop and the
    context restarts from ``<s>`` padding.
    """
    if n_words < 1:
        raise ValueError("n_words must be >= 1")
    rng = random.Random(seed)
    pad = [BOS] * (model.order - 1)
    hist = list(pad)
    out: list[str] = []
    while len(out) < n_words:
        tok = _draw(model, hist, rng)
        if tok == EOS:
            if sentences and out and not out[-1].endswith("."):
                out[-1] += "."
                hist = list(pad)
            continue
        if tok == UNK:
            continue
        out.append(tok)
        hist.append(tok)
    text = " ".join(out)
    if sentences and not text.endswith("."):
        text += "."
    return text
