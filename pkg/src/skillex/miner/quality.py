"""Phrase quality scoring: ensemble of small decision trees.

Distant supervision: candidates matching a curated positive phrase list
form the positive pool, everything else the (noisy) negative pool. Each
tree trains on an independent balanced subsample drawn with replacement,
and the quality score of a candidate is the fraction of trees voting
positive, so scores lie on the grid {0, 1/T, ..., 1}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from ..corpus import Ngram
from .features import FEATURE_NAMES, PhraseCandidate, PhraseFeatures


class DecisionTree:
    """Axis-aligned binary classification tree, Gini split criterion.

    Flat-array representation: node i splits on feature[i] at threshold[i]
    (go left when x <= threshold), or is a leaf when feature[i] < 0, in
    which case label[i] holds the vote.
    """

    def __init__(self, feature, threshold, left, right, label):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.label = np.asarray(label, dtype=np.int32)

    @property
    def depth(self) -> int:
        def node_depth(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(node_depth(self.left[i]), node_depth(self.right[i]))
        return node_depth(0)

    def predict_one(self, x) -> int:
        i = 0
        while self.feature[i] >= 0:
            if x[self.feature[i]] <= self.threshold[i]:
                i = self.left[i]
            else:
                i = self.right[i]
        return int(self.label[i])

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return np.array([self.predict_one(row) for row in X], dtype=np.int32)

    def to_json(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "label": self.label.tolist(),
        }

    @classmethod
    def from_json(cls, payload: dict) -> "DecisionTree":
        return cls(payload["feature"], payload["threshold"], payload["left"],
                   payload["right"], payload["label"])


def _gini(counts) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return 1.0 - float(np.sum(p * p))


def _best_split(X, y):
    """Best (feature, threshold) by weighted Gini; None when nothing improves.

    Deterministic tie-break: first feature in order, lowest threshold.
    """
    n = len(y)
    parent = _gini(np.bincount(y, minlength=2))
    best = None
    best_impurity = parent
    for f in range(X.shape[1]):
        values = X[:, f]
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        sorted_y = y[order]
        # class counts left of each cut position
        ones_prefix = np.cumsum(sorted_y)
        distinct = np.nonzero(sorted_vals[1:] > sorted_vals[:-1])[0]
        for cut in distinct:
            n_left = cut + 1
            ones_left = ones_prefix[cut]
            left_counts = np.array([n_left - ones_left, ones_left], dtype=float)
            ones_right = ones_prefix[-1] - ones_left
            n_right = n - n_left
            right_counts = np.array([n_right - ones_right, ones_right], dtype=float)
            impurity = (n_left * _gini(left_counts)
                        + n_right * _gini(right_counts)) / n
            if impurity < best_impurity - 1e-15:
                best_impurity = impurity
                threshold = (sorted_vals[cut] + sorted_vals[cut + 1]) / 2.0
                best = (f, float(threshold))
    return best


def _grow_tree(X, y, max_depth: int):
    feature, threshold, left, right, label = [], [], [], [], []

    def add_leaf(ys) -> int:
        idx = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        # strict majority votes positive; ties vote negative
        label.append(1 if np.sum(ys) * 2 > len(ys) else 0)
        return idx

    def grow(Xs, ys, depth) -> int:
        if depth >= max_depth or len(np.unique(ys)) < 2:
            return add_leaf(ys)
        split = _best_split(Xs, ys)
        if split is None:
            return add_leaf(ys)
        f, t = split
        idx = len(feature)
        feature.append(f)
        threshold.append(t)
        left.append(-1)
        right.append(-1)
        label.append(-1)
        mask = Xs[:, f] <= t
        left[idx] = grow(Xs[mask], ys[mask], depth + 1)
        right[idx] = grow(Xs[~mask], ys[~mask], depth + 1)
        return idx

    grow(X, y, 0)
    return DecisionTree(feature, threshold, left, right, label)


@dataclass
class QualityModel:
    trees: list[DecisionTree]
    feature_names: tuple[str, ...] = FEATURE_NAMES
    training_seed: int | None = None

    FORMAT = "skillex.quality-model"
    FORMAT_VERSION = 1

    def quality(self, features: PhraseFeatures | list[float]) -> float:
        """Fraction of trees voting positive, in {0, 1/T, ..., 1}."""
        x = features.vector() if isinstance(features, PhraseFeatures) else features
        x = np.asarray(x, dtype=np.float64)
        votes = sum(tree.predict_one(x) for tree in self.trees)
        return votes / len(self.trees)

    def quality_many(self, feature_rows) -> np.ndarray:
        X = np.asarray(feature_rows, dtype=np.float64)
        if len(X) == 0:
            return np.zeros(0)
        votes = np.zeros(len(X), dtype=np.int64)
        for tree in self.trees:
            votes += tree.predict(X)
        return votes / len(self.trees)

    def to_json(self) -> dict:
        payload = {
            "format": self.FORMAT,
            "format_version": self.FORMAT_VERSION,
            "feature_names": list(self.feature_names),
            "trees": [tree.to_json() for tree in self.trees],
        }
        if self.training_seed is not None:
            payload["seed"] = self.training_seed
        return payload

    @classmethod
    def from_json(cls, payload: dict) -> "QualityModel":
        if payload.get("format") != cls.FORMAT:
            raise TrainingError(f"not a quality model artifact: "
                                f"{payload.get('format')!r}")
        if payload.get("format_version") != cls.FORMAT_VERSION:
            raise TrainingError(f"unsupported quality model version "
                                f"{payload.get('format_version')!r}")
        return cls(trees=[DecisionTree.from_json(t) for t in payload["trees"]],
                   feature_names=tuple(payload["feature_names"]),
                   training_seed=payload.get("seed"))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, ensure_ascii=False,
                      sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "QualityModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def split_pools(positives: set[Ngram],
                candidates: list[tuple[PhraseCandidate, PhraseFeatures]]):
    """Positive pool = candidates matching the positive list (case-insensitive
    exact token-sequence match); everything else is the noisy negative pool."""
    normalized = {tuple(w.lower() for w in p) for p in positives}
    pos_idx, neg_idx = [], []
    for i, (cand, _) in enumerate(candidates):
        key = tuple(w.lower() for w in cand.tokens)
        (pos_idx if key in normalized else neg_idx).append(i)
    return pos_idx, neg_idx


def train_quality_model(positives: set[Ngram],
                        candidates: list[tuple[PhraseCandidate, PhraseFeatures]],
                        T: int = 100,
                        K: int | None = None,
                        max_depth: int = 4,
                        seed: int = 0) -> QualityModel:
    """Train the positive-only ensemble on candidate features.

    Each of the T trees sees K samples, half drawn with replacement from
    each pool. K defaults to twice the positive pool size.
    """
    if not positives:
        raise TrainingError("the positive phrase list is empty")
    if not candidates:
        raise TrainingError("no candidates to train on")
    pos_idx, neg_idx = split_pools(positives, candidates)
    if not pos_idx:
        raise TrainingError(
            "no candidate matched the positive phrase list; extend the list "
            "with phrases that actually occur in the corpus")
    if not neg_idx:
        raise TrainingError("every candidate matched the positive list; "
                            "the negative pool is empty")
    if K is None:
        K = 2 * len(pos_idx)
    k_pos = K // 2
    k_neg = K - k_pos
    X = np.array([feats.vector() for _, feats in candidates], dtype=np.float64)
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(T):
        pick_pos = rng.choice(pos_idx, size=k_pos, replace=True)
        pick_neg = rng.choice(neg_idx, size=k_neg, replace=True)
        rows = np.concatenate([pick_pos, pick_neg])
        labels = np.concatenate([np.ones(k_pos, dtype=np.int64),
                                 np.zeros(k_neg, dtype=np.int64)])
        trees.append(_grow_tree(X[rows], labels, max_depth))
    return QualityModel(trees=trees, training_seed=seed)
