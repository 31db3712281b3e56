"""Binary-classifier evaluation: confusion matrix, error rates, ROC, AUC and EER.

Scores follow one orientation throughout: higher means "positive class",
and a decision is ``score >= threshold``.

Reference EERs for established biometrics (documentation constants, not
computed here): fingerprint about 0.2 %, iris about 0.01 %.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

REFERENCE_EER = {
    "fingerprint": 0.002,
    "iris": 0.0001,
}


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.fp + self.tn

    @property
    def total(self) -> int:
        return self.positives + self.negatives


@dataclass(frozen=True)
class Rates:
    """Error rates; a rate is ``None`` when its denominator class is empty."""

    fpr: Optional[float]
    fnr: Optional[float]
    tpr: Optional[float]
    tnr: Optional[float]
    accuracy: float


def _check_binary(values, name):
    for v in values:
        if v not in (0, 1, True, False):
            raise ValueError(f"{name} must be binary, got {v!r}")


def confusion(labels: Sequence[int], decisions: Sequence[int]) -> ConfusionMatrix:
    if len(labels) != len(decisions):
        raise ValueError(f"length mismatch: {len(labels)} labels vs {len(decisions)} decisions")
    if not labels:
        raise ValueError("empty input")
    _check_binary(labels, "labels")
    _check_binary(decisions, "decisions")
    tp = fp = tn = fn = 0
    for y, d in zip(labels, decisions):
        if y:
            if d:
                tp += 1
            else:
                fn += 1
        elif d:
            fp += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, tn, fn)


def rates(m: ConfusionMatrix) -> Rates:
    p, n = m.positives, m.negatives
    fpr = m.fp / n if n else None
    fnr = m.fn / p if p else None
    return Rates(
        fpr=fpr,
        fnr=fnr,
        tpr=None if fnr is None else 1.0 - fnr,
        tnr=None if fpr is None else 1.0 - fpr,
        accuracy=(m.tp + m.tn) / m.total,
    )


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    fpr: float
    tpr: float


@dataclass(frozen=True)
class RocCurve:
    points: tuple[RocPoint, ...]
    auc: float
    eer: float
    eer_threshold: float

    @property
    def fpr(self):
        return [p.fpr for p in self.points]

    @property
    def tpr(self):
        return [p.tpr for p in self.points]


def _split_classes(scores, labels):
    if len(scores) != len(labels):
        raise ValueError(f"length mismatch: {len(scores)} scores vs {len(labels)} labels")
    _check_binary(labels, "labels")
    pos = [float(s) for s, y in zip(scores, labels) if y]
    neg = [float(s) for s, y in zip(scores, labels) if not y]
    if not pos or not neg:
        raise ValueError("both classes must be present")
    for s in pos + neg:
        if math.isnan(s):
            raise ValueError("scores must not be NaN")
    return pos, neg


def roc(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """Empirical ROC with one step per distinct score.

    Points run from ``(0, 0)`` at threshold ``+inf`` to ``(1, 1)`` at the
    lowest score. AUC is the trapezoid area; EER is linearly interpolated at
    the first point where FPR reaches FNR.
    """
    pos, neg = _split_classes(scores, labels)
    n_pos, n_neg = len(pos), len(neg)
    rows = sorted(zip((float(s) for s in scores), (int(bool(y)) for y in labels)),
                  key=lambda r: -r[0])
    points = [RocPoint(math.inf, 0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(rows):
        t = rows[i][0]
        while i < len(rows) and rows[i][0] == t:
            if rows[i][1]:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append(RocPoint(t, fp / n_neg, tp / n_pos))

    auc = 0.0
    for a, b in zip(points, points[1:]):
        auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0

    eer, eer_t = _eer(points)
    return RocCurve(tuple(points), auc, eer, eer_t)


def _eer(points: Sequence[RocPoint]) -> tuple[float, float]:
    prev = points[0]
    for pt in points[1:]:
        d = pt.fpr - (1.0 - pt.tpr)
        if d >= 0:
            d_prev = prev.fpr - (1.0 - prev.tpr)
            if d == 0:
                return pt.fpr, pt.threshold
            lam = -d_prev / (d - d_prev)
            eer = prev.fpr + lam * (pt.fpr - prev.fpr)
            if math.isinf(prev.threshold):
                return eer, pt.threshold
            return eer, prev.threshold + lam * (pt.threshold - prev.threshold)
        prev = pt
    return points[-1].fpr, points[-1].threshold  # unreachable: last point has d = 1


def auc_oracle(scores: Sequence[float], labels: Sequence[int]) -> Fraction:
    """Exact ``P(pos > neg) + P(tie) / 2`` by enumerating every pos/neg pair."""
    pos, neg = _split_classes(scores, labels)
    wins2 = 0
    for p in pos:
        for q in neg:
            if p > q:
                wins2 += 2
            elif p == q:
                wins2 += 1
    return Fraction(wins2, 2 * len(pos) * len(neg))


def auc_quality(auc: float) -> str:
    if not 0.0 <= auc <= 1.0:
        raise ValueError(f"AUC must lie in [0, 1], got {auc}")
    if auc >= 0.9:
        return "outstanding"
    if auc >= 0.8:
        return "excellent_good"
    if auc >= 0.7:
        return "acceptable"
    if auc > 0.5:
        return "poor"
    return "random"


def threshold_at_eer(curve: RocCurve) -> float:
    """Score threshold of the first ROC point at or past the FPR = FNR crossing."""
    for pt in curve.points[1:]:
        if pt.fpr >= 1.0 - pt.tpr:
            return pt.threshold
    return curve.points[-1].threshold


def threshold_at_fpr(curve: RocCurve, max_fpr: float) -> float:
    """Lowest threshold whose FPR does not exceed ``max_fpr`` (``+inf`` if none)."""
    if not 0.0 <= max_fpr <= 1.0:
        raise ValueError("max_fpr must lie in [0, 1]")
    best = math.inf
    for pt in curve.points:
        if pt.fpr <= max_fpr:
            best = pt.threshold
    return best


def select_threshold(scores, labels, operating_point: str) -> float:
    """Resolve an ``eer`` or ``fpr:<x>`` operating point to a threshold."""
    curve = roc(scores, labels)
    if operating_point == "eer":
        return threshold_at_eer(curve)
    if operating_point.startswith("fpr:"):
        return threshold_at_fpr(curve, float(operating_point[4:]))
    raise ValueError(f"unknown operating point {operating_point!r} (use 'eer' or 'fpr:<x>')")


def format_roc_csv(curve: RocCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["threshold", "fpr", "tpr"])
    for p in curve.points:
        w.writerow([repr(p.threshold), repr(p.fpr), repr(p.tpr)])
    return buf.getvalue()


def roc_summary(curve: RocCurve) -> dict:
    return {
        "auc": curve.auc,
        "eer": curve.eer,
        "eer_threshold": curve.eer_threshold,
        "auc_quality": auc_quality(min(1.0, max(0.0, curve.auc))),
        "n_points": len(curve.points),
    }


def standardized_separation(pos: Sequence[float], neg: Sequence[float]) -> float:
    """``(mean(neg) - mean(pos)) / sqrt((var(pos) + var(neg)) / 2)``, population variances.

    Positive when the negative class sits above the positive class, as
    perplexities of human text sit above those of model-sampled text.
    """
    if len(pos) < 1 or len(neg) < 1:
        raise ValueError("both groups must be non-empty")
    mp, mn = math.fsum(pos) / len(pos), math.fsum(neg) / len(neg)
    vp = math.fsum((x - mp) ** 2 for x in pos) / len(pos)
    vn = math.fsum((x - mn) ** 2 for x in neg) / len(neg)
    sd = math.sqrt((vp + vn) / 2.0)
    if sd == 0.0:
        raise ValueError("zero pooled standard deviation")
    return (mn - mp) / sd
