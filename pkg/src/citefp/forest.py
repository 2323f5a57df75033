"""Random forest classifier, written out from first principles.

Binary CART trees on Gini impurity: each node scans a random feature subset
(floor(sqrt(d)) by default), candidate thresholds are midpoints between
adjacent sorted distinct values, and the split with the largest Gini decrease
wins — ties resolved toward the lowest feature index, then the lowest
threshold.  Trees grow to purity or until a node holds fewer than two
samples; there is no depth cap.  The forest predicts by majority vote with
ties going to class 0.

Two determinism guarantees: the same config and data give the same forest,
and permuting training rows (jointly with labels) changes nothing, because
bootstrap draws index into a canonical lexicographic ordering of the rows
rather than the caller's ordering.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import seeding
from .errors import DataFormatError, DegenerateLabelsError, NonFiniteError

__all__ = [
    "RfConfig",
    "Tree",
    "Forest",
    "Evaluation",
    "ForestIntrospection",
    "train_forest",
    "evaluate",
    "forest_introspection",
    "save_forest",
    "load_forest",
]


@dataclass(frozen=True)
class RfConfig:
    n_trees: int = 100
    bootstrap: bool = True
    max_features: int | str | None = "sqrt"
    seed: int = 0

    def resolve_mtry(self, d: int) -> int:
        if self.max_features is None:
            return d
        if self.max_features == "sqrt":
            return max(1, int(math.floor(math.sqrt(d))))
        if isinstance(self.max_features, int) and self.max_features >= 1:
            return min(d, self.max_features)
        raise ValueError(f"max_features must be 'sqrt', None or a positive int, got {self.max_features!r}")


@dataclass
class Tree:
    """Flat node arrays; ``feature == -1`` marks a leaf, root at index 0.

    Internal nodes route samples with value <= threshold to ``left``.
    ``counts`` holds the training class counts reaching each node and
    ``decrease`` the weighted Gini decrease of each split (0 at leaves).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, 2)
    decrease: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        n = X.shape[0]
        idx = np.zeros(n, dtype=np.int64)
        while True:
            feats = self.feature[idx]
            active = feats >= 0
            if not active.any():
                break
            rows = np.nonzero(active)[0]
            cur = idx[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            idx[rows] = np.where(go_left, self.left[cur], self.right[cur])
        counts = self.counts[idx]
        return (counts[:, 1] > counts[:, 0]).astype(np.int64)  # leaf tie -> class 0

    def leaf_depths(self) -> np.ndarray:
        depths = np.zeros(len(self.feature), dtype=np.int64)
        order = [0]
        for node in order:
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
                order.append(int(self.left[node]))
                order.append(int(self.right[node]))
        return depths[self.feature < 0]

    def split_depths_and_decreases(self) -> tuple[np.ndarray, np.ndarray]:
        depths = np.zeros(len(self.feature), dtype=np.int64)
        order = [0]
        for node in order:
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
                order.append(int(self.left[node]))
                order.append(int(self.right[node]))
        internal = self.feature >= 0
        return depths[internal], self.decrease[internal]


@dataclass
class Forest:
    config: RfConfig
    n_features: int
    trees: list[Tree] = field(default_factory=list)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Fraction of trees voting class 1, per row."""
        X = _check_matrix(X, self.n_features)
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += tree.predict(X)
        return votes / len(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) > 0.5).astype(np.int64)  # vote tie -> class 0


def _check_matrix(X: np.ndarray, d: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataFormatError(f"expected a 2-D feature matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteError("feature matrix contains non-finite values")
    if d is not None and X.shape[1] != d:
        raise DataFormatError(f"expected {d} features, got {X.shape[1]}")
    return X


def _gini(n0: np.ndarray, n1: np.ndarray) -> np.ndarray:
    total = n0 + n1
    return 1.0 - (n0 / total) ** 2 - (n1 / total) ** 2


def _best_split(
    X: np.ndarray, y: np.ndarray, rows: np.ndarray, feat_ids: np.ndarray
) -> tuple[int, float, float] | None:
    """Best (feature, threshold, gain) at a node, or None when unsplittable."""
    m = rows.size
    yn = y[rows]
    n1 = int(yn.sum())
    parent = 1.0 - (n1 / m) ** 2 - ((m - n1) / m) ** 2
    best: tuple[float, int, float] | None = None
    for f in feat_ids:
        v = X[rows, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        cut = np.nonzero(vs[1:] > vs[:-1])[0]
        if cut.size == 0:
            continue
        c1 = np.cumsum(yn[order])
        nl = (cut + 1).astype(np.float64)
        nr = m - nl
        l1 = c1[cut]
        r1 = n1 - l1
        child = (nl * _gini(nl - l1, l1) + nr * _gini(nr - r1, r1)) / m
        gain = parent - child
        j = int(np.argmax(gain))  # first max -> lowest threshold
        if best is None or gain[j] > best[0]:
            best = (float(gain[j]), int(f), float((vs[cut[j]] + vs[cut[j] + 1]) / 2.0))
    if best is None or best[0] <= 0.0:
        return None
    return best[1], best[2], best[0]


def _grow_tree(X: np.ndarray, y: np.ndarray, rows: np.ndarray, mtry: int, rng: np.random.Generator) -> Tree:
    n_total = rows.size
    d = X.shape[1]
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    counts: list[list[int]] = []
    decrease: list[float] = []

    def new_node(node_rows: np.ndarray) -> int:
        node = len(feature)
        n1 = int(y[node_rows].sum())
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append([node_rows.size - n1, n1])
        decrease.append(0.0)
        return node

    stack = [(new_node(rows), rows)]
    while stack:
        node, node_rows = stack.pop()
        n0, n1 = counts[node]
        if n0 + n1 < 2 or n0 == 0 or n1 == 0:
            continue
        feat_ids = np.sort(rng.choice(d, size=mtry, replace=False))
        split = _best_split(X, y, node_rows, feat_ids)
        if split is None:
            continue
        f, t, gain = split
        mask = X[node_rows, f] <= t
        left_rows, right_rows = node_rows[mask], node_rows[~mask]
        feature[node] = f
        threshold[node] = t
        decrease[node] = gain * (node_rows.size / n_total)
        left[node] = new_node(left_rows)
        right[node] = new_node(right_rows)
        # Grow left before right: push right first so the stack pops left first.
        stack.append((right[node], right_rows))
        stack.append((left[node], left_rows))

    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        counts=np.array(counts, dtype=np.int64),
        decrease=np.array(decrease),
    )


def train_forest(X: np.ndarray, y: np.ndarray, config: RfConfig = RfConfig()) -> Forest:
    """Fit a forest on binary labels.

    Raises :class:`DegenerateLabelsError` unless both classes are present,
    and :class:`NonFiniteError` on NaN/inf features.  Rows are re-sorted into
    a canonical lexicographic order before any random draw, so models depend
    on the multiset of training rows, not their order.
    """
    X = _check_matrix(X)
    y = np.asarray(y)
    if y.shape != (X.shape[0],):
        raise DataFormatError(f"labels have shape {y.shape}, expected ({X.shape[0]},)")
    if not np.isin(y, (0, 1)).all():
        raise DataFormatError("labels must be 0 or 1")
    y = y.astype(np.int64)
    if len(np.unique(y)) < 2:
        raise DegenerateLabelsError("training data must contain both classes")

    canon = np.lexsort(tuple([y]) + tuple(X[:, j] for j in reversed(range(X.shape[1]))))
    Xc, yc = X[canon], y[canon]

    n, d = Xc.shape
    mtry = config.resolve_mtry(d)
    forest = Forest(config=config, n_features=d)
    for t in range(config.n_trees):
        rng = np.random.default_rng(seeding.derive(config.seed, "tree", t))
        rows = rng.integers(0, n, size=n) if config.bootstrap else np.arange(n)
        forest.trees.append(_grow_tree(Xc, yc, rows, mtry, rng))
    return forest


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class Evaluation:
    accuracy: float
    f1_macro: float
    f1_per_class: tuple[float, float]


def evaluate(y_true: Sequence[int], y_pred: Sequence[int]) -> Evaluation:
    """Accuracy and macro F1 over the two classes.

    A class absent from both truth and prediction contributes F1 = 0, so the
    macro average never divides by zero.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size == 0:
        raise DataFormatError("y_true and y_pred must be equal-length nonempty 1-D arrays")
    acc = float(np.mean(y_true == y_pred))
    f1s = []
    for c in (0, 1):
        tp = int(np.sum((y_pred == c) & (y_true == c)))
        fp = int(np.sum((y_pred == c) & (y_true != c)))
        fn = int(np.sum((y_pred != c) & (y_true == c)))
        f1s.append(2.0 * tp / (2.0 * tp + fp + fn) if tp else 0.0)
    return Evaluation(accuracy=acc, f1_macro=float(np.mean(f1s)), f1_per_class=(f1s[0], f1s[1]))


@dataclass(frozen=True)
class ForestIntrospection:
    """Average leaf depth per tree, plus the forest's cumulative Gini decrease
    by split depth (normalized to end at 1)."""

    avg_leaf_depths: tuple[float, ...]
    cumulative_gini_by_depth: tuple[float, ...]


def forest_introspection(forest: Forest) -> ForestIntrospection:
    avg_depths = tuple(float(tree.leaf_depths().mean()) for tree in forest.trees)
    by_depth: dict[int, float] = {}
    for tree in forest.trees:
        depths, decreases = tree.split_depths_and_decreases()
        for depth, dec in zip(depths, decreases):
            by_depth[int(depth)] = by_depth.get(int(depth), 0.0) + float(dec)
    if not by_depth:
        return ForestIntrospection(avg_depths, ())
    curve = np.zeros(max(by_depth) + 1)
    for depth, total in by_depth.items():
        curve[depth] = total
    cumulative = np.cumsum(curve)
    cumulative /= cumulative[-1]
    return ForestIntrospection(avg_depths, tuple(float(v) for v in cumulative))


# ------------------------------------------------------------------ file I/O


def save_forest(forest: Forest, path: str | Path) -> None:
    """Persist as JSON: config plus one flat node-record array per tree."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trees = []
    for tree in forest.trees:
        nodes = []
        for i in range(len(tree.feature)):
            record: dict = {"n": [int(tree.counts[i, 0]), int(tree.counts[i, 1])]}
            if tree.feature[i] >= 0:
                record.update(
                    f=int(tree.feature[i]),
                    t=float(tree.threshold[i]),
                    l=int(tree.left[i]),
                    r=int(tree.right[i]),
                    g=float(tree.decrease[i]),
                )
            nodes.append(record)
        trees.append(nodes)
    payload = {
        "config": {
            "n_trees": forest.config.n_trees,
            "bootstrap": forest.config.bootstrap,
            "max_features": forest.config.max_features,
            "seed": forest.config.seed,
        },
        "n_features": forest.n_features,
        "trees": trees,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_forest(path: str | Path) -> Forest:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        config = RfConfig(**payload["config"])
        trees = []
        for nodes in payload["trees"]:
            feature = np.array([rec.get("f", -1) for rec in nodes], dtype=np.int64)
            trees.append(
                Tree(
                    feature=feature,
                    threshold=np.array([rec.get("t", 0.0) for rec in nodes]),
                    left=np.array([rec.get("l", -1) for rec in nodes], dtype=np.int64),
                    right=np.array([rec.get("r", -1) for rec in nodes], dtype=np.int64),
                    counts=np.array([rec["n"] for rec in nodes], dtype=np.int64),
                    decrease=np.array([rec.get("g", 0.0) for rec in nodes]),
                )
            )
        return Forest(config=config, n_features=int(payload["n_features"]), trees=trees)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path.name}: bad forest file ({exc})") from None
