"""The three detectors: perplexity-threshold AI text, keystroke-biometric pair
verification and copy-typing.

Every score is oriented so that higher means "positive class". Thresholds
are never built in; pick them with :mod:`procsec.evaluation` and pass them
to the scoring functions to attach decisions.
"""
from __future__ import annotations

import enum
import itertools
import json
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .event_log import Session
from .features import ALL_FEATURES, CATALOG_FEATURES, FeatureVector, extract_features, pair_distance
from .learner import GbmModel, TrainConfig, fit_gbm, predict_score
from .lm import LanguageModel, essay_perplexity


class Detector(str, enum.Enum):
    PERPLEXITY_AI_TEXT = "PerplexityAiText"
    BIOMETRIC_PAIR = "BiometricPair"
    COPY_TYPING = "CopyTyping"


@dataclass(frozen=True)
class DetectionResult:
    subject_id: str
    score: float
    decision: Optional[bool]
    threshold: Optional[float]
    detector: Detector

    def to_record(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "detector": self.detector.value,
            "score": self.score,
            "decision": self.decision,
            "threshold": self.threshold,
        }


def _result(subject_id, score, threshold, detector) -> DetectionResult:
    decision = None if threshold is None else bool(score >= threshold)
    return DetectionResult(subject_id, float(score), decision, threshold, detector)


def format_detections(results: Iterable[DetectionResult]) -> str:
    return "".join(json.dumps(r.to_record(), sort_keys=True) + "\n" for r in results)


def parse_detections(text: str) -> list[DetectionResult]:
    out = []
    for line in text.splitlines():
        if line.strip():
            rec = json.loads(line)
            out.append(DetectionResult(rec["subject_id"], float(rec["score"]), rec["decision"],
                                       rec["threshold"], Detector(rec["detector"])))
    return out


def as_impostor(result: DetectionResult) -> DetectionResult:
    """Flip a same-writer result to impostor orientation (score and threshold negated)."""
    thr = None if result.threshold is None else -result.threshold
    return _result(result.subject_id, -result.score, thr, result.detector)


# -- AI-generated text --------------------------------------------------------

def ai_text_score(model: LanguageModel, text: str, threshold: Optional[float] = None,
                  subject_id: str = "") -> DetectionResult:
    """Score ``-ppl``: text the model finds predictable is suspicious."""
    rep = essay_perplexity(model, text)
    return _result(subject_id, -rep.ppl, threshold, Detector.PERPLEXITY_AI_TEXT)


# -- keystroke biometrics ---------------------------------------------------

@dataclass(frozen=True)
class PairRow:
    distance: FeatureVector
    label: int
    session_a: str
    session_b: str


@dataclass(frozen=True)
class PairDataset:
    rows: tuple[PairRow, ...]

    @property
    def n_same(self) -> int:
        return sum(r.label for r in self.rows)

    @property
    def n_diff(self) -> int:
        return len(self.rows) - self.n_same

    @property
    def labels(self) -> list[int]:
        return [r.label for r in self.rows]


@dataclass(frozen=True)
class SessionRef:
    """Identity of a session whose features were computed elsewhere (e.g. a feature table)."""

    session_id: str
    writer_id: str
    task_id: str = ""


def _by_writer(sessions: Sequence[Session]) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for i, s in enumerate(sessions):
        groups.setdefault(s.writer_id, []).append(i)
    return groups


def build_pair_dataset(sessions: Sequence[Session], n_same: int, n_diff: int, seed: int,
                       features: Optional[Sequence[FeatureVector]] = None) -> PairDataset:
    """Seeded same-writer (label 1) and different-writer (label 0) session pairs.

    Pairs are drawn without replacement. Same-writer pairs come first, then
    different-writer pairs, each in sampling order. ``sessions`` may be
    :class:`SessionRef` items when ``features`` is supplied.
    """
    groups = _by_writer(sessions)
    if len(groups) < 2:
        raise ValueError(f"need sessions from at least 2 writers, got {len(groups)}")
    same = [p for idx in groups.values() for p in itertools.combinations(idx, 2)]
    if n_same > len(same):
        repeaters = sum(len(v) >= 2 for v in groups.values())
        raise ValueError(f"requested {n_same} same-writer pairs but only {len(same)} exist "
                         f"({repeaters} writers with 2+ sessions); short by {n_same - len(same)}")
    sizes = [len(v) for v in groups.values()]
    n_cross = (sum(sizes) ** 2 - sum(k * k for k in sizes)) // 2
    if n_diff > n_cross:
        raise ValueError(f"requested {n_diff} different-writer pairs but only {n_cross} exist; "
                         f"short by {n_diff - n_cross}")

    rng = random.Random(seed)
    picked_same = rng.sample(same, n_same)
    picked_diff: list[tuple[int, int]] = []
    seen = set()
    if n_diff > n_cross // 2:
        cross = [(i, j) for i, j in itertools.combinations(range(len(sessions)), 2)
                 if sessions[i].writer_id != sessions[j].writer_id]
        picked_diff = rng.sample(cross, n_diff)
    else:
        n = len(sessions)
        while len(picked_diff) < n_diff:
            i, j = rng.randrange(n), rng.randrange(n)
            if sessions[i].writer_id == sessions[j].writer_id:
                continue
            key = (min(i, j), max(i, j))
            if key in seen:
                continue
            seen.add(key)
            picked_diff.append((i, j))

    feats = list(features) if features is not None else [None] * len(sessions)

    def fv(k):
        if feats[k] is None:
            feats[k] = extract_features(sessions[k])
        return feats[k]

    rows = []
    for label, pairs in ((1, picked_same), (0, picked_diff)):
        for i, j in pairs:
            rows.append(PairRow(pair_distance(fv(i), fv(j)), label,
                                sessions[i].session_id, sessions[j].session_id))
    return PairDataset(tuple(rows))


def fit_biometric_verifier(pairs: PairDataset, config: TrainConfig = TrainConfig()) -> GbmModel:
    """GBM on per-feature distance vectors; positive class is "same writer"."""
    return fit_gbm([r.distance for r in pairs.rows], pairs.labels, config,
                   feature_names=CATALOG_FEATURES)


def score_distance(model: GbmModel, distance: FeatureVector, threshold: Optional[float] = None,
                   subject_id: str = "") -> DetectionResult:
    return _result(subject_id, predict_score(model, distance), threshold, Detector.BIOMETRIC_PAIR)


def score_pair(model: GbmModel, session_a: Session, session_b: Session,
               threshold: Optional[float] = None) -> DetectionResult:
    """Log-odds that both sessions come from one writer; symmetric in its arguments."""
    d = pair_distance(extract_features(session_a), extract_features(session_b))
    return score_distance(model, d, threshold, f"{session_a.session_id}|{session_b.session_id}")


# -- copy-typing ------------------------------------------------------------

TRANSCRIBE_LABELS = {"transcribe": 1, "draft": 0}


def _mode_label(v) -> int:
    if isinstance(v, str) or isinstance(v, enum.Enum):
        key = (v.value if isinstance(v, enum.Enum) else v).lower()
        if key not in TRANSCRIBE_LABELS:
            raise ValueError(f"unknown session label {v!r} (use draft or transcribe)")
        return TRANSCRIBE_LABELS[key]
    if v in (0, 1):
        return int(v)
    raise ValueError(f"unknown session label {v!r}")


def fit_copy_typing_detector(sessions: Sequence[Session], labels: Sequence, config: TrainConfig = TrainConfig(),
                             features: Optional[Sequence[FeatureVector]] = None) -> GbmModel:
    """GBM on raw session features; positive class is "transcribe" (copy-typing)."""
    y = [_mode_label(v) for v in labels]
    rows = list(features) if features is not None else [extract_features(s) for s in sessions]
    return fit_gbm(rows, y, config, feature_names=ALL_FEATURES)


def score_features(model: GbmModel, fv: FeatureVector, threshold: Optional[float] = None,
                   subject_id: str = "") -> DetectionResult:
    return _result(subject_id, predict_score(model, fv), threshold, Detector.COPY_TYPING)


def score_session(model: GbmModel, session: Session, threshold: Optional[float] = None) -> DetectionResult:
    return score_features(model, extract_features(session), threshold, session.session_id)


def accuracy_at(results: Sequence[DetectionResult], labels: Sequence[int], threshold: float = 0.0) -> float:
    if not results or len(results) != len(labels):
        raise ValueError("need equally many results and labels")
    hits = sum((r.score >= threshold) == bool(y) for r, y in zip(results, labels))
    return hits / len(results)
