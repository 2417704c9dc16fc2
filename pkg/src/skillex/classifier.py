"""Binary skill/non-skill classifier over term embeddings.

A small feed-forward network: one hidden ReLU layer, logistic output,
trained with plain mini-batch gradient descent on mean binary
cross-entropy. Everything is numpy float64 and seeded, so retraining
with identical data, config and seed is bit-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import Ngram
from .errors import TrainingError
from .util import canonical_json

DEFAULT_HIDDEN = 64
DEFAULT_BATCH = 32
# predicted probabilities are clipped into (0,1) open interval
_PROB_EPS = 1e-12


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _bce_from_logits(z: np.ndarray, y: np.ndarray) -> float:
    # softplus(z) - y*z rewritten as softplus((1-2y)*z): the subtraction
    # cancels catastrophically for confident positives, which would leave
    # absolute noise ~ulp(z) on a near-zero loss
    return float(np.mean(np.logaddexp(0.0, (1.0 - 2.0 * y) * z)))


@dataclass
class LabeledTerm:
    phrase: Ngram
    label: int
    embedding: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.label not in (0, 1):
            raise TrainingError(f"label must be 0 or 1, got {self.label!r} "
                                f"for phrase {self.phrase!r}")


class SkillClassifier:
    """[D, H, 1] network; parameters live in W1, b1, w2, b2."""

    FORMAT = "skillex.classifier"
    FORMAT_VERSION = 1

    def __init__(self, dimension: int, hidden: int = DEFAULT_HIDDEN,
                 seed: int = 0):
        self.dimension = dimension
        self.hidden = hidden
        rng = np.random.default_rng(seed)
        limit1 = np.sqrt(6.0 / (dimension + hidden))
        limit2 = np.sqrt(6.0 / (hidden + 1))
        self.W1 = rng.uniform(-limit1, limit1, size=(dimension, hidden))
        self.b1 = np.zeros(hidden)
        self.w2 = rng.uniform(-limit2, limit2, size=hidden)
        self.b2 = np.zeros(1)
        self.loss_history: list[float] = []
        self.training_seed: int | None = None

    # parameter arrays in a fixed order, for updates and gradient checks
    def parameters(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.w2, self.b2]

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def _forward(self, X: np.ndarray):
        Z1 = X @ self.W1 + self.b1
        A1 = np.maximum(Z1, 0.0)
        z2 = A1 @ self.w2 + self.b2[0]
        return Z1, A1, z2

    def logits(self, X: np.ndarray) -> np.ndarray:
        return self._forward(np.atleast_2d(X))[2]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dimension:
            raise TrainingError(f"embedding dimension {X.shape[1]} does not "
                                f"match model dimension {self.dimension}")
        p = _sigmoid(self._forward(X)[2])
        return np.clip(p, _PROB_EPS, 1.0 - _PROB_EPS)

    def loss(self, X: np.ndarray, y: np.ndarray) -> float:
        return _bce_from_logits(self._forward(X)[2], y)

    def gradients(self, X: np.ndarray, y: np.ndarray) -> list[np.ndarray]:
        """Analytic gradient of the mean cross entropy, same order as parameters()."""
        Z1, A1, z2 = self._forward(X)
        batch = X.shape[0]
        dz2 = (_sigmoid(z2) - y) / batch
        dw2 = A1.T @ dz2
        db2 = np.array([np.sum(dz2)])
        dA1 = np.outer(dz2, self.w2)
        dZ1 = dA1 * (Z1 > 0)
        dW1 = X.T @ dZ1
        db1 = dZ1.sum(axis=0)
        return [dW1, db1, dw2, db2]

    def to_json(self) -> dict:
        payload = {
            "format": self.FORMAT,
            "format_version": self.FORMAT_VERSION,
            "layer_sizes": [self.dimension, self.hidden, 1],
            "parameters": {
                "W1": self.W1.tolist(),
                "b1": self.b1.tolist(),
                "w2": self.w2.tolist(),
                "b2": self.b2.tolist(),
            },
            "loss_history": self.loss_history,
        }
        if self.training_seed is not None:
            payload["seed"] = self.training_seed
        return payload

    @classmethod
    def from_json(cls, payload: dict) -> "SkillClassifier":
        if payload.get("format") != cls.FORMAT:
            raise TrainingError(
                f"not a classifier artifact: {payload.get('format')!r}")
        if payload.get("format_version") != cls.FORMAT_VERSION:
            raise TrainingError(f"unsupported classifier format version "
                                f"{payload.get('format_version')!r}")
        dimension, hidden, out = payload["layer_sizes"]
        if out != 1:
            raise TrainingError(f"expected a single output unit, got {out}")
        model = cls.__new__(cls)
        model.dimension = dimension
        model.hidden = hidden
        params = payload["parameters"]
        model.W1 = np.array(params["W1"], dtype=np.float64)
        model.b1 = np.array(params["b1"], dtype=np.float64)
        model.w2 = np.array(params["w2"], dtype=np.float64)
        model.b2 = np.array(params["b2"], dtype=np.float64)
        if model.W1.shape != (dimension, hidden):
            raise TrainingError("parameter shapes disagree with layer_sizes")
        model.loss_history = [float(v) for v in payload.get("loss_history", [])]
        model.training_seed = payload.get("seed")
        return model

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(self.to_json()))
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SkillClassifier":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def train(data: list[LabeledTerm], epochs: int = 200,
          learning_rate: float = 0.05, batch_size: int = DEFAULT_BATCH,
          hidden: int = DEFAULT_HIDDEN, seed: int = 0,
          shuffle: bool = True) -> SkillClassifier:
    """Mini-batch gradient descent; returns the model with a per-epoch loss trace."""
    if not data:
        raise TrainingError("no training data")
    labels = {t.label for t in data}
    if labels != {0, 1}:
        raise TrainingError(f"training data must contain both classes, "
                            f"got labels {sorted(labels)}")
    dims = {np.asarray(t.embedding).shape for t in data}
    if len(dims) != 1 or len(next(iter(dims))) != 1:
        raise TrainingError(f"embeddings must share one dimension, "
                            f"got shapes {sorted(dims)}")
    X = np.vstack([np.asarray(t.embedding, dtype=np.float64) for t in data])
    y = np.array([float(t.label) for t in data])
    model = SkillClassifier(X.shape[1], hidden=hidden, seed=seed)
    model.training_seed = seed
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n) if shuffle else np.arange(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            grads = model.gradients(X[idx], y[idx])
            for param, grad in zip(model.parameters(), grads):
                param -= learning_rate * grad
        model.loss_history.append(model.loss(X, y))
    return model


def predict(model: SkillClassifier, embedding: np.ndarray,
            decision_threshold: float = 0.5) -> tuple[float, int]:
    """(probability, label); label is 1 iff probability >= threshold."""
    prob = float(model.predict_proba(embedding)[0])
    return prob, int(prob >= decision_threshold)


def accuracy(model: SkillClassifier, data: list[LabeledTerm],
             decision_threshold: float = 0.5) -> float:
    X = np.vstack([np.asarray(t.embedding, dtype=np.float64) for t in data])
    y = np.array([t.label for t in data])
    preds = (model.predict_proba(X) >= decision_threshold).astype(int)
    return float(np.mean(preds == y))


def gradient_check(model: SkillClassifier, sample, step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``sample`` is an ``(embedding, label)`` pair or a LabeledTerm; the check
    runs over every parameter of the model.
    """
    if isinstance(sample, LabeledTerm):
        x, label = sample.embedding, sample.label
    else:
        x, label = sample
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.array([float(label)])
    analytic = model.gradients(X, y)
    worst = 0.0
    for param, grad in zip(model.parameters(), analytic):
        flat = param.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + step
            up = model.loss(X, y)
            flat[i] = keep - step
            down = model.loss(X, y)
            flat[i] = keep
            numeric = (up - down) / (2.0 * step)
            denom = max(abs(gflat[i]) + abs(numeric), 1e-8)
            worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst


def load_labeled_tsv(path) -> list[tuple[Ngram, int]]:
    """``phrase<TAB>label`` rows, label 0/1; phrase tokens space separated."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                phrase, label = line.split("\t")
                value = int(label)
            except ValueError as exc:
                raise TrainingError(f"{path}: line {lineno}: expected "
                                    f"'phrase<TAB>label': {exc}") from exc
            if value not in (0, 1):
                raise TrainingError(f"{path}: line {lineno}: label must be "
                                    f"0 or 1, got {label!r}")
            rows.append((tuple(phrase.split(" ")), value))
    return rows


def sample_negatives(candidates: list[Ngram], positives: set[Ngram],
                     count: int, seed: int = 0) -> list[Ngram]:
    """Seeded draw of non-positive phrases, for 1:1 negative sampling."""
    positive_set = {tuple(w.lower() for w in g) for g in positives}
    pool = sorted(g for g in set(map(tuple, candidates))
                  if g not in positive_set)
    if not pool:
        raise TrainingError("no negative candidates available")
    rng = np.random.default_rng(seed)
    take = min(count, len(pool))
    idx = rng.choice(len(pool), size=take, replace=False)
    return [pool[i] for i in sorted(idx)]
