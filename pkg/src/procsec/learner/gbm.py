"""Gradient-boosted regression trees for binary classification (logistic loss)."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import _backend

MODEL_FORMAT = "procsec-gbm"
MODEL_VERSION = 1
HESS_FLOOR = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    n_rounds: int = 200
    learning_rate: float = 0.1
    max_depth: int = 3
    min_leaf: int = 5
    seed: int = 0
    subsample: float = 1.0

    def __post_init__(self):
        if self.n_rounds < 0:
            raise ValueError("n_rounds must be >= 0")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.max_depth < 1 or self.min_leaf < 1:
            raise ValueError("max_depth and min_leaf must be positive")
        if not 0.0 < self.subsample <= 1.0:
            raise ValueError("subsample must lie in (0, 1]")


@dataclass
class Tree:
    """Array-encoded binary tree; ``feature[i] == -1`` marks a leaf.

    Rows with ``x[feature] <= threshold`` go to ``left``.
    """

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)

    def add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def leaf_index(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.intp)
        feat = np.asarray(self.feature, dtype=np.intp)
        thr = np.asarray(self.threshold, dtype=np.float64)
        left = np.asarray(self.left, dtype=np.intp)
        right = np.asarray(self.right, dtype=np.intp)
        rows = np.arange(X.shape[0])
        for _ in range(len(self.feature)):
            f = feat[node]
            internal = f >= 0
            if not internal.any():
                break
            go_left = X[rows, np.where(internal, f, 0)] <= thr[node]
            node = np.where(internal, np.where(go_left, left[node], right[node]), node)
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.value, dtype=np.float64)[self.leaf_index(X)]


@dataclass
class GbmModel:
    base_score: float
    learning_rate: float
    trees: list[Tree]
    feature_names: tuple[str, ...]
    imputation_values: tuple[float, ...]
    config: TrainConfig = field(default_factory=TrainConfig)
    train_loss: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "config": asdict(self.config),
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "feature_names": list(self.feature_names),
            "imputation_values": list(self.imputation_values),
            "trees": [asdict(t) for t in self.trees],
            "train_loss": list(self.train_loss),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "GbmModel":
        if d.get("format") != MODEL_FORMAT:
            raise ValueError("not a GBM model file")
        if d.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')!r}")
        return cls(
            base_score=float(d["base_score"]),
            learning_rate=float(d["learning_rate"]),
            trees=[Tree(**t) for t in d["trees"]],
            feature_names=tuple(d["feature_names"]),
            imputation_values=tuple(float(v) for v in d["imputation_values"]),
            config=TrainConfig(**d["config"]),
            train_loss=[float(v) for v in d.get("train_loss", [])],
        )

    @classmethod
    def loads(cls, text: str) -> "GbmModel":
        return cls.from_dict(json.loads(text))


def _as_matrix(rows, feature_names: Optional[Sequence[str]]) -> tuple[np.ndarray, tuple[str, ...]]:
    """Rows as mappings (name -> value/None) or sequences; ``None`` becomes NaN."""
    rows = list(rows)
    if not rows:
        raise ValueError("empty feature table")
    if isinstance(rows[0], Mapping):
        names = tuple(feature_names) if feature_names is not None else tuple(rows[0].keys())
        out = np.empty((len(rows), len(names)))
        for i, row in enumerate(rows):
            missing = [n for n in names if n not in row]
            if missing:
                raise ValueError(f"row {i} lacks features {missing}")
            out[i] = [np.nan if row[n] is None else float(row[n]) for n in names]
        return out, names
    width = len(rows[0])
    if feature_names is not None and len(feature_names) != width:
        raise ValueError(f"rows have {width} columns, expected {len(feature_names)}")
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"row {i} has {len(row)} columns, expected {width}")
        out[i] = [np.nan if v is None else float(v) for v in row]
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{j}" for j in range(width))
    return out, names


def _impute(X: np.ndarray, values: Sequence[float]) -> np.ndarray:
    X = X.copy()
    nan = np.isnan(X)
    if nan.any():
        X[nan] = np.broadcast_to(np.asarray(values, dtype=np.float64), X.shape)[nan]
    return X


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def logistic_loss(y: np.ndarray, score: np.ndarray) -> float:
    """Mean negative log-likelihood, computed stably."""
    return float(np.mean(np.logaddexp(0.0, score) - y * score))


def _build_tree(X, presorted, resid, hess, in_node, depth, cfg, tree, node):
    n_in = int(in_node.sum())
    feat, thr = -1, 0.0
    if depth < cfg.max_depth and n_in >= 2 * cfg.min_leaf:
        feat, thr, _ = _backend.best_split(X, presorted, in_node, resid, cfg.min_leaf)
    if feat < 0:
        sel = in_node.astype(bool)
        tree.value[node] = float(resid[sel].sum() / max(hess[sel].sum(), HESS_FLOOR))
        return
    go_left = X[:, feat] <= thr
    left_mask = (in_node.astype(bool) & go_left).astype(np.uint8)
    right_mask = (in_node.astype(bool) & ~go_left).astype(np.uint8)
    tree.feature[node] = int(feat)
    tree.threshold[node] = float(thr)
    left = tree.add_node()
    right = tree.add_node()
    tree.left[node], tree.right[node] = left, right
    _build_tree(X, presorted, resid, hess, left_mask, depth + 1, cfg, tree, left)
    _build_tree(X, presorted, resid, hess, right_mask, depth + 1, cfg, tree, right)


def _safeguard_leaves(tree: Tree, leaf_of: np.ndarray, y, score, lr, rows_mask):
    # damp any leaf whose update would raise that leaf's training loss
    for leaf in np.unique(leaf_of[rows_mask]):
        rows = leaf_of == leaf
        v = tree.value[leaf]
        before = np.sum(np.logaddexp(0.0, score[rows]) - y[rows] * score[rows])
        for _ in range(60):
            s = score[rows] + lr * v
            after = np.sum(np.logaddexp(0.0, s) - y[rows] * s)
            if after <= before:
                break
            v *= 0.5
        else:
            v = 0.0
        tree.value[leaf] = float(v)


def fit_gbm(rows, labels: Sequence[int], config: TrainConfig = TrainConfig(),
            feature_names: Optional[Sequence[str]] = None) -> GbmModel:
    """Stagewise logistic boosting of depth-limited least-squares trees.

    Missing values (``None``/NaN) are replaced by per-feature training
    medians, which are stored in the model. Each tree is fit to the
    residuals ``y - p``; leaf values are one Newton step
    ``sum(y - p) / sum(p(1 - p))``.
    """
    X, names = _as_matrix(rows, feature_names)
    y = np.asarray([int(v) for v in labels], dtype=np.float64)
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"{X.shape[0]} rows but {y.shape[0]} labels")
    if X.shape[0] < 2:
        raise ValueError("need at least two rows")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be 0/1")
    if y.min() == y.max():
        raise ValueError("labels contain a single class")

    medians = []
    for j in range(X.shape[1]):
        col = X[:, j][~np.isnan(X[:, j])]
        medians.append(float(np.median(col)) if col.size else 0.0)
    X = np.ascontiguousarray(_impute(X, medians))

    p0 = y.mean()
    base = math.log(p0 / (1.0 - p0))
    score = np.full(y.shape[0], base)
    presorted = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.intp))
    rng = np.random.default_rng(config.seed)

    trees = []
    losses = [logistic_loss(y, score)]
    all_rows = np.ones(y.shape[0], dtype=np.uint8)
    for _ in range(config.n_rounds):
        p = _sigmoid(score)
        resid = y - p
        hess = p * (1.0 - p)
        if config.subsample < 1.0:
            k = max(2 * config.min_leaf, int(round(config.subsample * y.shape[0])))
            in_node = np.zeros(y.shape[0], dtype=np.uint8)
            in_node[rng.choice(y.shape[0], size=min(k, y.shape[0]), replace=False)] = 1
        else:
            in_node = all_rows
        tree = Tree()
        tree.add_node()
        _build_tree(X, presorted, resid, hess, in_node, 0, config, tree, 0)
        leaf_of = tree.leaf_index(X)
        _safeguard_leaves(tree, leaf_of, y, score, config.learning_rate, np.ones(y.shape[0], bool))
        score = score + config.learning_rate * np.asarray(tree.value)[leaf_of]
        trees.append(tree)
        losses.append(logistic_loss(y, score))
    return GbmModel(base, config.learning_rate, trees, names, tuple(medians), config, losses)


def _rows_for_model(model: GbmModel, rows) -> np.ndarray:
    rows = list(rows)
    if not rows:
        return np.empty((0, len(model.feature_names)))
    X, _ = _as_matrix(rows, model.feature_names)
    return _impute(X, model.imputation_values)


def predict_scores(model: GbmModel, rows) -> np.ndarray:
    X = _rows_for_model(model, rows)
    score = np.full(X.shape[0], model.base_score)
    for t in model.trees:
        score += model.learning_rate * t.predict(X)
    return score


def predict_score(model: GbmModel, row) -> float:
    """Log-odds of the positive class for one row."""
    return float(predict_scores(model, [row])[0])


def predict_prob(model: GbmModel, row) -> float:
    return float(_sigmoid(predict_score(model, row)))
