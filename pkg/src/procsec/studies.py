"""End-to-end synthetic studies for the three detectors.

Each ``run_*`` function generates its data with :mod:`procsec.simgen`, fits or
scores the detector, and returns the headline numbers. They back the
acceptance tests and ``procsec eval report``-style summaries.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import detectors, simgen
from .corpus import split_corpus
from .evaluation import roc, standardized_separation
from .features import extract_features
from .learner import TrainConfig
from .lm import NGramModel, aggregate_curves, prefix_perplexity_curve, sentence_perplexities, split_sentences, train_ngram


# AI-text ---------------------------------------------------------------------

@dataclass(frozen=True)
class AiTextStudyConfig:
    n_ai: int = 200
    n_human: int = 200
    words: tuple[int, int] = (400, 600)
    order: int = 3
    alpha: float = 1e-4
    min_count: int = 2
    perturb_rate: float = 0.01
    seed: int = 0


@dataclass
class AiTextStudyResult:
    essay_auc: float
    sentence_auc: float
    separation: dict[int, float]
    ai_ppl: list[float]
    human_ppl: list[float]
    prefix_ai: list = field(repr=False, default_factory=list)
    prefix_human: list = field(repr=False, default_factory=list)

    @property
    def short_ratio(self) -> float:
        """Largest separation below 100 words relative to the separation at 400."""
        return max(d for n, d in self.separation.items() if n < 100) / self.separation[400]


def study_language_model(cfg: AiTextStudyConfig = AiTextStudyConfig()) -> NGramModel:
    """LM trained on the sentences of the bundled corpus's training slice."""
    sents = [s for p in split_corpus().train for s in split_sentences(p)]
    return train_ngram(sents, cfg.order, cfg.alpha, cfg.min_count)


def run_aitext_study(cfg: AiTextStudyConfig = AiTextStudyConfig(),
                     model: NGramModel | None = None) -> AiTextStudyResult:
    lm = model or study_language_model(cfg)
    ai = simgen.gen_corpora(lm, cfg.n_ai, cfg.words, simgen.CorpusMode.LM_SAMPLED, cfg.seed)
    human = simgen.gen_corpora(lm, cfg.n_human, cfg.words, simgen.CorpusMode.PERTURBED_HUMAN,
                               cfg.seed + 1, perturb_rate=cfg.perturb_rate)
    labels = [1] * len(ai) + [0] * len(human)
    texts = ai + human

    scores = [detectors.ai_text_score(lm, t).score for t in texts]
    essay_auc = roc(scores, labels).auc

    s_scores, s_labels = [], []
    for t, y in zip(texts, labels):
        for rep in sentence_perplexities(lm, t):
            s_scores.append(-rep.ppl)
            s_labels.append(y)
    sentence_auc = roc(s_scores, s_labels).auc

    curves = [prefix_perplexity_curve(lm, t) for t in texts]
    sep = {}
    for n in range(10, 401, 10):
        a = [dict(c.points)[n] for c, y in zip(curves, labels) if y and n in dict(c.points)]
        h = [dict(c.points)[n] for c, y in zip(curves, labels) if not y and n in dict(c.points)]
        sep[n] = standardized_separation(a, h)
    return AiTextStudyResult(
        essay_auc, sentence_auc, sep,
        [-s for s, y in zip(scores, labels) if y], [-s for s, y in zip(scores, labels) if not y],
        aggregate_curves(c for c, y in zip(curves, labels) if y),
        aggregate_curves(c for c, y in zip(curves, labels) if not y),
    )


# biometrics ------------------------------------------------------------------

@dataclass(frozen=True)
class BiometricStudyConfig:
    n_writers: int = 200
    sessions_per_writer: int = 2
    n_train_writers: int = 150
    train_pairs: int = 150  # per class
    test_pairs: int = 50  # per class
    seed: int = 0
    gbm: TrainConfig = TrainConfig()


@dataclass
class BiometricStudyResult:
    within_person_r: float
    eer: float
    auc: float
    n_train: int
    n_test: int


def run_biometric_study(cfg: BiometricStudyConfig = BiometricStudyConfig()) -> BiometricStudyResult:
    pool = simgen.default_text_pool()
    sessions = simgen.gen_repeater_dataset(cfg.n_writers, cfg.sessions_per_writer, pool, cfg.seed)
    feats = [extract_features(s) for s in sessions]

    k = cfg.sessions_per_writer
    first = np.array([feats[i]["inword_logIKI_median"] for i in range(0, len(feats), k)])
    second = np.array([feats[i + 1]["inword_logIKI_median"] for i in range(0, len(feats), k)])
    r = float(np.corrcoef(first, second)[0, 1])

    cut = cfg.n_train_writers * k
    train = detectors.build_pair_dataset(sessions[:cut], cfg.train_pairs, cfg.train_pairs,
                                         cfg.seed, features=feats[:cut])
    test = detectors.build_pair_dataset(sessions[cut:], cfg.test_pairs, cfg.test_pairs,
                                        cfg.seed + 1, features=feats[cut:])
    model = detectors.fit_biometric_verifier(train, cfg.gbm)
    scores = [detectors.score_distance(model, row.distance).score for row in test.rows]
    curve = roc(scores, test.labels)
    return BiometricStudyResult(r, curve.eer, curve.auc, len(train.rows), len(test.rows))


# copy-typing -----------------------------------------------------------------

@dataclass(frozen=True)
class CopyTypingStudyConfig:
    n_draft: int = 500
    n_transcribe: int = 500
    train_fraction: float = 0.7
    seed: int = 0
    gbm: TrainConfig = TrainConfig()


@dataclass
class CopyTypingStudyResult:
    accuracy: float
    auc: float
    n_train: int
    n_test: int


def run_copytyping_study(cfg: CopyTypingStudyConfig = CopyTypingStudyConfig()) -> CopyTypingStudyResult:
    pool = simgen.default_text_pool()
    data = simgen.gen_mode_dataset(cfg.n_draft, cfg.n_transcribe, pool, cfg.seed)
    feats = [extract_features(s) for s, _ in data]
    labels = [int(m is simgen.Mode.TRANSCRIBE) for _, m in data]
    cut = int(round(cfg.train_fraction * len(data)))
    model = detectors.fit_copy_typing_detector([s for s, _ in data[:cut]], labels[:cut], cfg.gbm,
                                               features=feats[:cut])
    results = [detectors.score_features(model, fv, subject_id=s.session_id)
               for fv, (s, _) in zip(feats[cut:], data[cut:])]
    acc = detectors.accuracy_at(results, labels[cut:], 0.0)
    curve = roc([r.score for r in results], labels[cut:])
    return CopyTypingStudyResult(acc, curve.auc, cut, len(data) - cut)
