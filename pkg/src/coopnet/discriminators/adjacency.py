"""Sentence-adjacency discriminator.

The built-in backend is a logistic classifier over a handful of lexical
features of a sentence pair, trained by minimizing binary cross-entropy
with seeded, shuffled SGD. An external backend can instead supply one
adjacency probability per consecutive sentence pair.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple, Optional, Sequence, Union

import numpy as np

from coopnet import text as textmod
from coopnet.corpus import CandidateSummary, SentencePairExample
from coopnet.discriminators.scores import (
    DegenerateData,
    DiscriminatorScore,
    FeatureMismatch,
    MissingExternalProbs,
    ScoringError,
    clamped_log,
)
from coopnet.rng import SplitMix64

FEATURE_NAMES = (
    "content_jaccard",
    "bigram_overlap",
    "length_ratio",
    "starts_with_connective",
    "bias",
)


def adjacency_features(first: str, second: str) -> np.ndarray:
    a = textmod.tokenize(first)
    b = textmod.tokenize(second)
    wa = textmod.word_surfaces(a)
    wb = textmod.word_surfaces(b)
    stop = textmod.stopwords().entries
    ca = {w for w in wa if w not in stop}
    cb = {w for w in wb if w not in stop}
    union = ca | cb
    jaccard = len(ca & cb) / len(union) if union else 0.0
    shortest = min(len(wa), len(wb))
    if shortest:
        bigram = len(textmod.ngrams(wa, 2) & textmod.ngrams(wb, 2)) / shortest
        ratio = shortest / max(len(wa), len(wb))
    else:
        bigram = ratio = 0.0
    conn = 1.0 if textmod.starts_with_connective(wb) else 0.0
    return np.array([jaccard, bigram, ratio, conn, 1.0], dtype=np.float64)


def sigmoid(z):
    """Overflow-safe logistic function (scalar or array)."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


@dataclass
class AdjacencyModel:
    weights: np.ndarray
    bias: float
    feature_spec: tuple[str, ...] = FEATURE_NAMES
    training_meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.feature_spec = tuple(self.feature_spec)
        if self.weights.shape != (len(self.feature_spec),):
            raise FeatureMismatch(
                f"{self.weights.shape[0] if self.weights.ndim else 0} weights for {len(self.feature_spec)} features"
            )
        if not (np.all(np.isfinite(self.weights)) and math.isfinite(self.bias)):
            raise ValueError("model parameters must be finite")

    @classmethod
    def zeros(cls) -> "AdjacencyModel":
        return cls(np.zeros(len(FEATURE_NAMES)), 0.0)

    def logit(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights + self.bias

    def to_json(self) -> dict:
        return {
            "feature_spec": list(self.feature_spec),
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
            "training_meta": self.training_meta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AdjacencyModel":
        try:
            return cls(obj["weights"], float(obj["bias"]), obj["feature_spec"], obj.get("training_meta", {}))
        except KeyError as e:
            raise ValueError(f"adjacency model missing {e.args[0]!r}") from None

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "AdjacencyModel":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


def predict_adjacency(model: AdjacencyModel, first: str, second: str) -> float:
    if model.feature_spec != FEATURE_NAMES:
        raise FeatureMismatch(f"model features {model.feature_spec} != {FEATURE_NAMES}")
    return float(sigmoid(model.logit(adjacency_features(first, second))))


# ---------------------------------------------------------------------------
# Training


def bce_loss(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy, computed from logits for stability."""
    z = X @ weights + bias
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def bce_grad(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    err = sigmoid(X @ weights + bias) - y
    return X.T @ err / len(y), float(np.mean(err))


class TrainResult(NamedTuple):
    model: AdjacencyModel
    loss_curve: list[float]  # entry 0 is the loss at initialization

    @property
    def final_loss(self) -> float:
        return self.loss_curve[-1]


def featurize(pairs: Sequence[SentencePairExample]) -> tuple[np.ndarray, np.ndarray]:
    if not pairs:
        return np.zeros((0, len(FEATURE_NAMES))), np.zeros(0)
    X = np.vstack([adjacency_features(p.first, p.second) for p in pairs])
    y = np.array([p.label for p in pairs], dtype=np.float64)
    return X, y


def train_on_features(
    X: np.ndarray, y: np.ndarray, seed: int = 0, lr: float = 0.1, epochs: int = 50, batch_size: int = 1
) -> TrainResult:
    if lr <= 0 or epochs < 0 or batch_size < 1:
        raise ValueError("lr must be > 0, epochs >= 0, batch_size >= 1")
    labels = set(np.unique(y).tolist())
    if labels != {0.0, 1.0}:
        raise DegenerateData(f"need both labels, got {sorted(labels)}")
    rng = SplitMix64(seed)
    w = np.zeros(X.shape[1])
    b = 0.0
    curve = [bce_loss(w, b, X, y)]
    order = list(range(len(y)))
    for _ in range(epochs):
        rng.shuffle(order)
        for start in range(0, len(order), batch_size):
            idx = order[start : start + batch_size]
            gw, gb = bce_grad(w, b, X[idx], y[idx])
            w -= lr * gw
            b -= lr * gb
        curve.append(bce_loss(w, b, X, y))
    meta = {
        "seed": seed,
        "learning_rate": lr,
        "epochs": epochs,
        "batch_size": batch_size,
        "n_examples": int(len(y)),
        "final_loss": curve[-1],
    }
    return TrainResult(AdjacencyModel(w, b, FEATURE_NAMES, meta), curve)


def train_adjacency(
    pairs: Sequence[SentencePairExample], seed: int = 0, lr: float = 0.1, epochs: int = 50, batch_size: int = 1
) -> TrainResult:
    X, y = featurize(pairs)
    return train_on_features(X, y, seed=seed, lr=lr, epochs=epochs, batch_size=batch_size)


def accuracy(model: AdjacencyModel, X: np.ndarray, y: np.ndarray) -> float:
    pred = (sigmoid(model.logit(X)) >= 0.5).astype(np.float64)
    return float(np.mean(pred == y))


# ---------------------------------------------------------------------------
# Scoring


def score_adjacency(
    candidate: CandidateSummary, backend: str = "external", model: Optional[AdjacencyModel] = None
) -> DiscriminatorScore:
    """Mean log adjacency probability over consecutive sentence pairs.

    The builtin backend scores each pair as ``(previous, current)``.
    Single-sentence candidates score 0 and are flagged ``neutral``.
    """
    sents = candidate.sentences
    if not sents:
        raise ScoringError(f"candidate {candidate.index} has no sentences")
    if backend == "external":
        if candidate.adjacency_probs is None:
            raise MissingExternalProbs(f"candidate {candidate.doc_id}#{candidate.index} has no adjacency_probs")
        probs = list(candidate.adjacency_probs)
        if len(probs) != len(sents) - 1:
            raise MissingExternalProbs(
                f"candidate {candidate.doc_id}#{candidate.index}: {len(probs)} probs for {len(sents)} sentences"
            )
    elif backend == "builtin":
        if model is None:
            raise ScoringError("builtin adjacency backend requires a model")
        probs = [predict_adjacency(model, prev, cur) for prev, cur in zip(sents, sents[1:])]
    else:
        raise ValueError(f"unknown adjacency backend {backend!r}")
    if len(sents) == 1:
        return DiscriminatorScore("adjacency", 0.0, {"probs": []}, frozenset({"neutral"}))
    logs = [clamped_log(p) for p in probs]
    return DiscriminatorScore("adjacency", sum(logs) / len(logs), {"probs": probs})
