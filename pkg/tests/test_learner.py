import math

import numpy as np
import pytest

from procsec.learner import GbmModel, TrainConfig, fit_gbm, logistic_loss, predict_prob, predict_score, predict_scores
from procsec.learner import _backend, _split_py

needs_ext = pytest.mark.skipif(_backend.compiled_best_split is None, reason="compiled kernel not built")


def separable(n=50):
    rows = [[float(i)] for i in range(-n, 0)] + [[float(i)] for i in range(1, n + 1)]
    labels = [0] * n + [1] * n
    return rows, labels


def test_config_validation():
    for bad in (dict(n_rounds=-1), dict(learning_rate=0.0), dict(learning_rate=1.5),
                dict(max_depth=0), dict(min_leaf=0), dict(subsample=0.0)):
        with pytest.raises(ValueError):
            TrainConfig(**bad)
    assert TrainConfig() == TrainConfig(200, 0.1, 3, 5, 0, 1.0)


def test_fit_errors():
    with pytest.raises(ValueError, match="single class"):
        fit_gbm([[1.0], [2.0]], [1, 1])
    with pytest.raises(ValueError, match="empty"):
        fit_gbm([], [])
    with pytest.raises(ValueError):
        fit_gbm([[1.0]], [1])
    with pytest.raises(ValueError, match="0/1"):
        fit_gbm([[1.0], [2.0]], [0, 2])
    with pytest.raises(ValueError, match="labels"):
        fit_gbm([[1.0], [2.0]], [0, 1, 1])
    with pytest.raises(ValueError, match="columns"):
        fit_gbm([[1.0], [2.0, 3.0]], [0, 1])


def test_separable_reaches_full_accuracy():
    rows, labels = separable()
    m = fit_gbm(rows, labels)
    s = predict_scores(m, rows)
    assert np.all((s >= 0) == np.array(labels, bool))


def test_constant_features_predict_base():
    rows = [[1.0, 2.0]] * 20
    labels = [0, 1] * 10
    m = fit_gbm(rows, labels, TrainConfig(n_rounds=10))
    assert m.base_score == 0.0
    assert np.all(predict_scores(m, rows) == 0.0)
    assert all(len(t.feature) == 1 for t in m.trees)


def test_zero_rounds_base_score():
    rows, labels = separable(10)
    labels[0] = 1
    m = fit_gbm(rows, labels, TrainConfig(n_rounds=0))
    p = 11 / 20
    assert m.base_score == pytest.approx(math.log(p / (1 - p)))
    assert predict_prob(m, [3.0]) == pytest.approx(p)
    assert np.all(predict_scores(m, rows) == m.base_score)


def test_deterministic_model_file():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(120, 4))
    y = (X[:, 0] - X[:, 2] + rng.normal(scale=0.3, size=120) > 0).astype(int)
    a = fit_gbm(X.tolist(), y, TrainConfig(n_rounds=30, seed=4)).dumps()
    b = fit_gbm(X.tolist(), y, TrainConfig(n_rounds=30, seed=4)).dumps()
    assert a == b
    sub_a = fit_gbm(X.tolist(), y, TrainConfig(n_rounds=20, seed=4, subsample=0.5)).dumps()
    sub_b = fit_gbm(X.tolist(), y, TrainConfig(n_rounds=20, seed=4, subsample=0.5)).dumps()
    assert sub_a == sub_b


def test_loss_non_increasing_various():
    rng = np.random.default_rng(7)
    for lr in (0.1, 0.5, 1.0):
        X = rng.normal(size=(80, 3)).round(1)
        y = (rng.random(80) < 0.5).astype(int)
        y[:2] = [0, 1]
        m = fit_gbm(X.tolist(), y, TrainConfig(n_rounds=40, learning_rate=lr, min_leaf=1))
        assert np.all(np.diff(m.train_loss) <= 0)
        assert m.train_loss[-1] == pytest.approx(logistic_loss(y.astype(float), predict_scores(m, X.tolist())))


def test_small_learning_rate_continuity():
    rows, labels = separable(20)
    m = fit_gbm(rows, labels, TrainConfig(n_rounds=1, learning_rate=1e-9))
    assert np.max(np.abs(predict_scores(m, rows) - m.base_score)) < 1e-6


def test_permutation_invariance():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 3)).round(2)
    y = (X[:, 1] > 0).astype(int)
    perm = rng.permutation(60)
    a = fit_gbm(X.tolist(), y, TrainConfig(n_rounds=15))
    b = fit_gbm(X[perm].tolist(), y[perm], TrainConfig(n_rounds=15))
    assert np.allclose(predict_scores(a, X.tolist()), predict_scores(b, X.tolist()), rtol=0, atol=1e-12)


def test_monotone_stump():
    rng = np.random.default_rng(5)
    x = rng.uniform(0, 10, size=200)
    y = (x + rng.normal(scale=1.0, size=200) > 5).astype(int)
    m = fit_gbm([[v] for v in x], y, TrainConfig(n_rounds=1, max_depth=1, learning_rate=1.0))
    grid = np.linspace(-1, 11, 200)
    s = predict_scores(m, [[v] for v in grid])
    assert np.all(np.diff(s) >= 0)


def test_tie_break_lowest_feature():
    rows = [[float(i), float(i)] for i in range(10)]
    y = [0] * 5 + [1] * 5
    m = fit_gbm(rows, y, TrainConfig(n_rounds=1, max_depth=1, min_leaf=1))
    assert m.trees[0].feature[0] == 0
    assert m.trees[0].threshold[0] == 4.5


def test_missing_values_imputed_with_median():
    rows = [{"a": 1.0, "b": None}, {"a": 2.0, "b": 10.0}, {"a": 3.0, "b": 20.0}, {"a": 4.0, "b": 30.0}]
    m = fit_gbm(rows, [0, 0, 1, 1], TrainConfig(n_rounds=5, min_leaf=1), feature_names=["a", "b"])
    assert m.imputation_values == (2.5, 20.0)
    s = predict_score(m, {"a": None, "b": None})
    assert math.isfinite(s)
    assert s == predict_score(m, {"a": 2.5, "b": 20.0})
    with pytest.raises(ValueError, match="lacks"):
        predict_score(m, {"a": 1.0})


def test_trees_reference_valid_features():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(100, 5))
    y = (X[:, 4] > 0).astype(int)
    m = fit_gbm(X.tolist(), y, TrainConfig(n_rounds=10))
    assert all(f < 5 for t in m.trees for f in t.feature)


def test_model_round_trip():
    rows, labels = separable(15)
    m = fit_gbm(rows, labels, TrainConfig(n_rounds=5))
    back = GbmModel.loads(m.dumps())
    assert back.dumps() == m.dumps()
    assert predict_score(back, [0.5]) == predict_score(m, [0.5])
    with pytest.raises(ValueError):
        GbmModel.from_dict({"format": "x"})


def _random_split_case(rng):
    n = int(rng.integers(2, 80))
    d = int(rng.integers(1, 6))
    X = np.ascontiguousarray(rng.normal(size=(n, d)).round(int(rng.integers(0, 3))))
    resid = rng.normal(size=n)
    presorted = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.intp))
    mask = (rng.random(n) < 0.8).astype(np.uint8)
    return X, presorted, mask, resid, int(rng.integers(1, 6))


@needs_ext
def test_kernels_agree():
    rng = np.random.default_rng(0)
    for _ in range(300):
        case = _random_split_case(rng)
        assert _backend.compiled_best_split(*case) == _split_py.best_split(*case)


@needs_ext
def test_backends_grow_identical_models():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(150, 6)).round(1)
    y = (X[:, 0] + X[:, 3] > 0).astype(int)
    out = {}
    try:
        for name in ("python", "cython"):
            _backend.use(name)
            out[name] = fit_gbm(X.tolist(), y, TrainConfig(n_rounds=20)).dumps()
    finally:
        _backend.use("cython")
    assert out["python"] == out["cython"]


def test_backend_switch_errors():
    with pytest.raises(ValueError):
        _backend.use("fortran")


def test_python_kernel_no_gain():
    X = np.zeros((10, 1))
    ps = np.ascontiguousarray(np.argsort(X, axis=0).T.astype(np.intp))
    assert _split_py.best_split(X, ps, np.ones(10, np.uint8), np.arange(10.0), 1) == (-1, 0.0, 0.0)


def test_fallback_selected_when_extension_missing():
    import subprocess
    import sys
    code = (
        "import sys\n"
        "class Block:\n"
        "    def find_spec(self, name, path=None, target=None):\n"
        "        if name == 'procsec.learner._split':\n"
        "            raise ImportError('blocked')\n"
        "sys.meta_path.insert(0, Block())\n"
        "from procsec.learner import BACKEND, fit_gbm\n"
        "m = fit_gbm([[0.0], [1.0], [2.0], [3.0]], [0, 0, 1, 1])\n"
        "print(BACKEND)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
