"""Desk-scale linear relation classifier with masked entity features.

The featurizer supports two entity representations: entity masking (EM)
replaces each mention span with a single role+type token so no surface
string reaches the model, and typed entity markers (TEM) keep the surface
and wrap it in marker tokens. On top sits a multinomial logistic model
trained by full-batch gradient descent; NA is an ordinary class.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .corpus import NA, AnnotationSet, Corpus, Instance, Source
from .errors import ConfigError

FeatureVector = dict[int, float]

_DISTANCE_BUCKETS = ((0, "0"), (1, "1"), (2, "2"), (4, "3-4"), (8, "5-8"), (16, "9-16"))


class Mode(str, Enum):
    EM = "EM"
    TEM = "TEM"


@dataclass
class TrainConfig:
    mode: Mode = Mode.EM
    hash_dim: int = 4096  # dense weights; memory is hash_dim * classes * 8 bytes
    learning_rate: float = 0.5
    epochs: int = 150
    l2: float = 1e-4
    seed: int = 13

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if self.hash_dim < 16:
            raise ConfigError("hash_dim too small to be useful")
        if self.learning_rate <= 0 or self.epochs <= 0 or self.l2 < 0:
            raise ConfigError("invalid training hyperparameters")


def _hash(feature: str, dim: int) -> int:
    return zlib.crc32(feature.encode("utf-8")) % dim


def _distance_bucket(gap: int) -> str:
    for limit, name in _DISTANCE_BUCKETS:
        if gap <= limit:
            return name
    return "17+"


def _masked_stream(corpus: Corpus, instance: Instance, mode: Mode):
    """Token stream with entity spans masked or marked, plus the gap tokens."""
    sentence = corpus.sentence(instance.sentence_id)
    tokens = sentence.tokens
    first, second = sorted(
        (("subj", instance.subj), ("obj", instance.obj)), key=lambda p: p[1].start
    )

    def block(role, mention):
        if mode is Mode.EM:
            return [f"{role.upper()}-{mention.ner_type}"]
        return [
            f"<{role}:{mention.ner_type}>",
            *tokens[mention.start : mention.end],
            f"</{role}>",
        ]

    between = list(tokens[first[1].end : second[1].start])
    stream = (
        list(tokens[: first[1].start])
        + block(*first)
        + between
        + block(*second)
        + list(tokens[second[1].end :])
    )
    gap = second[1].start - first[1].end
    return stream, between, gap


def featurize(
    corpus: Corpus, instance: Instance, mode: Mode, hash_dim: int = 4096
) -> FeatureVector:
    """Hash unigrams, bigrams, gap tokens, NER pair, and a distance bucket.

    Pure function of the sentence, spans, NER types, and mode; under EM the
    instance's entity surfaces cannot influence the output.
    """
    if not instance.subj.ner_type or not instance.obj.ner_type:
        raise ConfigError("featurize requires NER types on both mentions")
    stream, between, gap = _masked_stream(corpus, instance, mode)
    feats: FeatureVector = {}

    def add(name: str):
        idx = _hash(name, hash_dim)
        feats[idx] = feats.get(idx, 0.0) + 1.0

    for tok in stream:
        add(f"u={tok}")
    for a, b in zip(stream, stream[1:]):
        add(f"b={a}_{b}")
    for tok in between:
        add(f"m={tok}")
    add(f"ner={instance.subj.ner_type}:{instance.obj.ner_type}")
    add(f"d={_distance_bucket(gap)}")
    return feats


@dataclass
class LinearModel:
    classes: list[str]
    weights: np.ndarray  # (classes, hash_dim)
    bias: np.ndarray  # (classes,)
    config: TrainConfig
    loss_history: list[float] = field(default_factory=list)

    def class_index(self, label: str) -> int:
        return self.classes.index(label)


def _to_dense(rows: list[FeatureVector], dim: int) -> np.ndarray:
    X = np.zeros((len(rows), dim), dtype=np.float64)
    for i, feats in enumerate(rows):
        for j, v in feats.items():
            X[i, j] = v
    return X


def loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy with L2 on weights; used by training and tests."""
    logits = X @ weights.T + bias
    logits -= logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = X.shape[0]
    loss = -np.log(probs[np.arange(n), y] + 1e-300).mean()
    loss += 0.5 * l2 * float((weights * weights).sum())
    delta = probs
    delta[np.arange(n), y] -= 1.0
    grad_w = delta.T @ X / n + l2 * weights
    grad_b = delta.mean(axis=0)
    return float(loss), grad_w, grad_b


def train(
    annotations: AnnotationSet, corpus: Corpus, config: TrainConfig
) -> LinearModel:
    """Fit one softmax weight vector per observed class.

    Classes are ordered NA first, then first appearance in the annotation
    set; the whole procedure is deterministic for a fixed seed and input
    order.
    """
    classes = [NA]
    for _, label in annotations.items():
        if label != NA and label not in classes:
            classes.append(label)
    if len(classes) < 2:
        raise ConfigError("training requires at least two classes")

    rows, targets = [], []
    for key, label in annotations.items():
        inst = corpus.instance(key)
        rows.append(featurize(corpus, inst, config.mode, config.hash_dim))
        targets.append(classes.index(label))
    X = _to_dense(rows, config.hash_dim)
    y = np.asarray(targets, dtype=np.int64)

    weights = np.zeros((len(classes), config.hash_dim), dtype=np.float64)
    bias = np.zeros(len(classes), dtype=np.float64)
    history = []
    for _ in range(config.epochs):
        loss, grad_w, grad_b = loss_and_grad(weights, bias, X, y, config.l2)
        history.append(loss)
        weights -= config.learning_rate * grad_w
        bias -= config.learning_rate * grad_b
    return LinearModel(classes, weights, bias, config, history)


def predict(model: LinearModel, corpus: Corpus, instance: Instance, mode: Mode) -> str:
    """Argmax class score; ties go to the earlier class."""
    mode = Mode(mode)
    if mode is not model.config.mode:
        raise ConfigError(
            f"model was trained with {model.config.mode.value}, not {mode.value}"
        )
    feats = featurize(corpus, instance, mode, model.config.hash_dim)
    scores = model.bias.copy()
    for j, v in feats.items():
        scores += model.weights[:, j] * v
    return model.classes[int(np.argmax(scores))]


def predict_corpus(model: LinearModel, corpus: Corpus) -> AnnotationSet:
    labels = {
        inst.key(): predict(model, corpus, inst, model.config.mode)
        for inst in corpus.instances
    }
    return AnnotationSet(Source.PRED, labels)


def save_model(model: LinearModel, path) -> None:
    doc = {
        "format_version": 1,
        "classes": model.classes,
        "mode": model.config.mode.value,
        "hash_dim": model.config.hash_dim,
        "learning_rate": model.config.learning_rate,
        "epochs": model.config.epochs,
        "l2": model.config.l2,
        "seed": model.config.seed,
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != 1:
        raise ConfigError(f"unsupported model format: {doc.get('format_version')}")
    config = TrainConfig(
        mode=Mode(doc["mode"]),
        hash_dim=doc["hash_dim"],
        learning_rate=doc["learning_rate"],
        epochs=doc["epochs"],
        l2=doc["l2"],
        seed=doc["seed"],
    )
    return LinearModel(
        classes=list(doc["classes"]),
        weights=np.asarray(doc["weights"], dtype=np.float64),
        bias=np.asarray(doc["bias"], dtype=np.float64),
        config=config,
    )
