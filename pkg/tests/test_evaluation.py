import math
import random
from fractions import Fraction

import pytest

from procsec.evaluation import (REFERENCE_EER, auc_oracle, auc_quality, confusion, format_roc_csv, rates, roc,
                                roc_summary, select_threshold, standardized_separation, threshold_at_eer,
                                threshold_at_fpr)


def test_confusion_counts():
    m = confusion([1, 1, 0, 0], [1, 0, 1, 0])
    assert (m.tp, m.fn, m.fp, m.tn) == (1, 1, 1, 1)
    r = rates(m)
    assert r.fpr == r.fnr == 0.5
    assert r.tpr == 0.5 and r.tnr == 0.5 and r.accuracy == 0.5


def test_perfect_and_empty_class():
    r = rates(confusion([1, 0, 1], [1, 0, 1]))
    assert (r.fpr, r.tpr, r.accuracy) == (0.0, 1.0, 1.0)
    r = rates(confusion([1, 1], [1, 0]))
    assert r.fpr is None and r.tnr is None and r.fnr == 0.5


def test_confusion_errors():
    with pytest.raises(ValueError, match="length"):
        confusion([1, 0], [1])
    with pytest.raises(ValueError):
        confusion([], [])
    with pytest.raises(ValueError, match="binary"):
        confusion([2], [1])


def scored(pos, neg):
    return list(pos) + list(neg), [1] * len(pos) + [0] * len(neg)


def test_roc_perfect():
    c = roc(*scored([0.9, 0.8], [0.7, 0.1]))
    assert c.auc == 1.0 and c.eer == 0.0


def test_roc_three_quarters():
    s, y = scored([0.8, 0.3], [0.5, 0.1])
    assert roc(s, y).auc == 0.75
    assert auc_oracle(s, y) == Fraction(3, 4)


def test_roc_eer_third():
    s, y = scored([0.9, 0.6, 0.4], [0.7, 0.3, 0.1])
    c = roc(s, y)
    assert c.eer == pytest.approx(1 / 3, abs=1e-12)
    assert 0.4 < c.eer_threshold <= 0.6


def test_roc_shape():
    s, y = scored([0.9, 0.5, 0.5], [0.5, 0.2])
    c = roc(s, y)
    assert (c.points[0].fpr, c.points[0].tpr) == (0.0, 0.0)
    assert (c.points[-1].fpr, c.points[-1].tpr) == (1.0, 1.0)
    assert math.isinf(c.points[0].threshold)
    th = [p.threshold for p in c.points]
    assert th == sorted(th, reverse=True)
    assert len(c.points) == 1 + len(set(s))
    assert all(a.fpr <= b.fpr and a.tpr <= b.tpr for a, b in zip(c.points, c.points[1:]))


def test_roc_errors():
    with pytest.raises(ValueError, match="both classes"):
        roc([0.1, 0.2], [1, 1])
    with pytest.raises(ValueError, match="length"):
        roc([0.1], [1, 0])
    with pytest.raises(ValueError, match="NaN"):
        roc([float("nan"), 0.2], [1, 0])


def test_oracle_ties_and_swap():
    assert auc_oracle([3, 3, 3, 3], [1, 0, 1, 0]) == Fraction(1, 2)
    s, y = scored([0.8, 0.3], [0.5, 0.1])
    assert auc_oracle(s, [1 - v for v in y]) == 1 - auc_oracle(s, y)


def random_instance(rng):
    n = rng.randint(2, 50)
    levels = rng.randint(1, 12)
    scores = [float(rng.randrange(levels)) if rng.random() < 0.6 else rng.random() for _ in range(n)]
    labels = [rng.randint(0, 1) for _ in range(n)]
    labels[0], labels[1] = 0, 1
    return scores, labels


def test_trapezoid_matches_oracle():
    rng = random.Random(0)
    for _ in range(200):
        s, y = random_instance(rng)
        assert abs(roc(s, y).auc - float(auc_oracle(s, y))) <= 1e-9


def test_monotone_transform_invariance():
    rng = random.Random(1)
    for _ in range(50):
        s, y = random_instance(rng)
        a = roc(s, y)
        b = roc([math.exp(v) for v in s], y)
        assert a.auc == pytest.approx(b.auc, abs=1e-12)
        assert a.eer == pytest.approx(b.eer, abs=1e-12)


def test_eer_bounds_and_label_swap():
    rng = random.Random(2)
    for _ in range(100):
        s, y = random_instance(rng)
        c = roc(s, y)
        assert 0.0 <= c.eer <= 1.0
        # the curve is above the diagonal near the crossing whenever it dominates it
        if all(p.tpr >= p.fpr for p in c.points):
            assert c.eer <= 0.5
        flipped = roc([-v for v in s], [1 - v for v in y])
        assert flipped.eer == pytest.approx(c.eer, abs=1e-12)


def test_eer_threshold_balances_rates():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(4, 60)
        s = [rng.random() for _ in range(n)]
        y = [rng.randint(0, 1) for _ in range(n)]
        y[0], y[1] = 0, 1
        c = roc(s, y)
        t = threshold_at_eer(c)
        r = rates(confusion(y, [int(v >= t) for v in s]))
        step = max(1 / y.count(1), 1 / y.count(0))
        assert abs(r.fpr - r.fnr) <= step + 1e-12


def test_threshold_at_fpr():
    s, y = scored([0.9, 0.6, 0.4], [0.7, 0.3, 0.1])
    c = roc(s, y)
    assert threshold_at_fpr(c, 0.0) == 0.9
    assert threshold_at_fpr(c, 0.34) == 0.4
    assert threshold_at_fpr(c, 1.0) == 0.1
    with pytest.raises(ValueError):
        threshold_at_fpr(c, 2.0)
    assert select_threshold(s, y, "fpr:0.34") == 0.4
    assert select_threshold(s, y, "eer") == threshold_at_eer(c)
    with pytest.raises(ValueError):
        select_threshold(s, y, "youden")


@pytest.mark.parametrize("auc, band", [
    (0.95, "outstanding"), (0.9, "outstanding"), (0.85, "excellent_good"), (0.8, "excellent_good"),
    (0.75, "acceptable"), (0.7, "acceptable"), (0.6, "poor"), (0.5, "random"), (0.2, "random"),
])
def test_auc_quality(auc, band):
    assert auc_quality(auc) == band


def test_auc_quality_range():
    with pytest.raises(ValueError):
        auc_quality(1.2)


def test_reference_constants():
    assert REFERENCE_EER == {"fingerprint": 0.002, "iris": 0.0001}


def test_roc_export():
    c = roc(*scored([0.8, 0.3], [0.5, 0.1]))
    lines = format_roc_csv(c).splitlines()
    assert lines[0] == "threshold,fpr,tpr"
    assert lines[1] == "inf,0.0,0.0"
    assert len(lines) == 1 + len(c.points)
    summ = roc_summary(c)
    assert summ["auc"] == 0.75 and summ["auc_quality"] == "acceptable"


def test_standardized_separation():
    assert standardized_separation([1.0, 3.0], [5.0, 7.0]) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        standardized_separation([1.0], [1.0])
