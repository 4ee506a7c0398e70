"""Snippet classifier: functional vs non-functional requirement categories.

One-vs-rest linear SVMs trained by Pegasos-style stochastic subgradient
descent on hinge loss.  Inputs combine two views of the text:

* a sparse part: signed feature hashing of unigram and bigram counts into
  2^18 buckets, L2-normalized;
* a dense part: one generative feature per label, the per-token log
  likelihood ratio of a label-specific bigram model against a background
  model built from all training text, scaled by 0.1.

Training is single-threaded and bit-deterministic for a fixed seed.
"""

from __future__ import annotations

import base64
import csv
import hashlib
import json
import math
import random
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from reqlens.ngram import NgramModel, count_ngrams
from reqlens.text import tokenize

MAGIC = "ELIMDL1"
HASH_DIM = 1 << 18
LM_ORDER = 2
LM_FEATURE_SCALE = 0.1

DEFAULT_LABELS = ("F", "availability", "performance", "security", "usability", "other-NFR")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1


def fnv1a64(text: str) -> int:
    """FNV-1a 64-bit hash of the UTF-8 bytes; stable across processes."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _U64
    return h


def hash_slot(key: str) -> tuple[int, float]:
    """(bucket, sign) for a feature key: bucket = h mod 2^18, sign from the
    parity of the 64-bit hash so colliding features cancel in expectation."""
    h = fnv1a64(key)
    return h % HASH_DIM, -1.0 if (h.bit_count() & 1) else 1.0


@dataclass(frozen=True)
class Hyperparams:
    lam: float = 1e-3
    epochs: int = 50
    seed: int = 0
    use_bigrams: bool = True
    use_lm_features: bool = True
    labels: tuple[str, ...] | None = None  # None: derive from training data

    def to_dict(self) -> dict:
        data = asdict(self)
        data["labels"] = list(self.labels) if self.labels is not None else None
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Hyperparams":
        labels = data.get("labels")
        return cls(
            lam=data["lam"],
            epochs=data["epochs"],
            seed=data["seed"],
            use_bigrams=data.get("use_bigrams", True),
            use_lm_features=data.get("use_lm_features", True),
            labels=tuple(labels) if labels is not None else None,
        )


@dataclass(frozen=True)
class FeatureVector:
    """Sparse hashed part plus one dense generative feature per label."""

    sparse: dict[int, float]
    dense: tuple[float, ...]

    def indices_values(self, n_labels: int) -> tuple[np.ndarray, np.ndarray]:
        """Flatten to aligned (index, value) arrays over dim 2^18 + n_labels."""
        idx = list(self.sparse.keys()) + [HASH_DIM + i for i in range(n_labels)]
        val = list(self.sparse.values()) + list(self.dense)
        return np.asarray(idx, dtype=np.int64), np.asarray(val, dtype=np.float64)


@dataclass
class ModelArtifact:
    """A trained classifier: weights, biases, hyperparams and the LMs."""

    labels: tuple[str, ...]
    weights: np.ndarray  # shape (n_labels, HASH_DIM + n_labels)
    bias: np.ndarray  # shape (n_labels,)
    hyper: Hyperparams
    class_lms: dict[str, NgramModel]
    background_lm: NgramModel

    @property
    def feature_dim(self) -> int:
        return HASH_DIM + len(self.labels)

    def __post_init__(self) -> None:
        if list(self.labels) != sorted(set(self.labels)):
            raise ValueError("labels must be unique and sorted lexicographically")
        if self.weights.shape != (len(self.labels), self.feature_dim):
            raise ValueError(
                f"weights shape {self.weights.shape} does not match "
                f"({len(self.labels)}, {self.feature_dim})"
            )


def _hash_text(tokens: Sequence[str], use_bigrams: bool) -> dict[int, float]:
    sparse: dict[int, float] = {}
    keys: Iterable[str] = iter(tokens)
    if use_bigrams:
        keys = list(tokens) + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
    for key in keys:
        slot, sign = hash_slot(key)
        sparse[slot] = sparse.get(slot, 0.0) + sign
    norm = math.sqrt(sum(v * v for v in sparse.values()))
    if norm > 0.0:
        sparse = {slot: v / norm for slot, v in sparse.items() if v != 0.0}
    else:
        sparse = {}
    return sparse


def _lm_features(
    tokens: Sequence[str],
    labels: Sequence[str],
    class_lms: dict[str, NgramModel],
    background_lm: NgramModel,
    enabled: bool,
) -> tuple[float, ...]:
    if not enabled or not tokens:
        return tuple(0.0 for _ in labels)
    background_nll = background_lm.sequence_nll(tokens)
    per_token = 1.0 / max(1, len(tokens))
    return tuple(
        LM_FEATURE_SCALE * (background_nll - class_lms[label].sequence_nll(tokens)) * per_token
        for label in labels
    )


def vectorize(text: str, model: ModelArtifact) -> FeatureVector:
    """Hash unigrams/bigrams (signed, L2-normalized) and append LM features."""
    tokens = tokenize(text)
    return FeatureVector(
        sparse=_hash_text(tokens, model.hyper.use_bigrams),
        dense=_lm_features(
            tokens, model.labels, model.class_lms, model.background_lm,
            model.hyper.use_lm_features,
        ),
    )


def train(examples: Sequence[tuple[str, str]], hyper: Hyperparams = Hyperparams()) -> ModelArtifact:
    """Train one-vs-rest Pegasos SVMs over (text, label) pairs.

    Builds the per-label and background bigram models first (they feed the
    dense features), then runs `hyper.epochs` epochs of single-example
    subgradient steps with learning rate 1/(lambda*t).  The hinge tie at
    margin exactly 1 takes the active branch.  Deterministic per seed.
    """
    if not examples:
        raise ValueError("training data is empty")
    seen_labels = sorted({label for _, label in examples})
    if len(seen_labels) < 2:
        raise ValueError(f"training needs >= 2 distinct labels, got {seen_labels}")
    labels = tuple(sorted(set(hyper.labels))) if hyper.labels is not None else tuple(seen_labels)
    unknown = sorted(set(seen_labels) - set(labels))
    if unknown:
        raise ValueError(f"examples carry labels outside the label set: {unknown}")

    per_label_tokens: dict[str, list[str]] = {label: [] for label in labels}
    all_tokens: list[str] = []
    for text, label in examples:
        tokens = tokenize(text)
        per_label_tokens[label].extend(tokens)
        all_tokens.extend(tokens)
    class_lms = {label: count_ngrams(per_label_tokens[label], LM_ORDER) for label in labels}
    background_lm = count_ngrams(all_tokens, LM_ORDER)

    stub = ModelArtifact(
        labels=labels,
        weights=np.zeros((len(labels), HASH_DIM + len(labels))),
        bias=np.zeros(len(labels)),
        hyper=hyper,
        class_lms=class_lms,
        background_lm=background_lm,
    )
    vectors = [vectorize(text, stub) for text, _ in examples]
    xs = [vec.indices_values(len(labels)) for vec in vectors]
    ys = [label for _, label in examples]

    dim = HASH_DIM + len(labels)
    weights = np.zeros((len(labels), dim))
    biases = np.zeros(len(labels))
    n = len(examples)
    for li, label in enumerate(labels):
        y = np.array([1.0 if example_label == label else -1.0 for example_label in ys])
        # w is kept as scale * v so the regularization shrink is O(1) per step.
        v = np.zeros(dim)
        scale = 1.0
        b = 0.0
        rng = random.Random(hyper.seed)
        order = list(range(n))
        t = 0
        for _ in range(hyper.epochs):
            rng.shuffle(order)
            for i in order:
                t += 1
                eta = 1.0 / (hyper.lam * t)
                idx, val = xs[i]
                margin = y[i] * (scale * float(v[idx] @ val) + b)
                shrink = 1.0 - eta * hyper.lam
                if shrink == 0.0:
                    v[:] = 0.0
                    scale = 1.0
                else:
                    scale *= shrink
                if margin <= 1.0:
                    v[idx] += (eta * y[i] / scale) * val
                    b += eta * y[i]
                if scale < 1e-9:
                    v *= scale
                    scale = 1.0
        weights[li] = scale * v
        biases[li] = b
    return replace(stub, weights=weights, bias=biases)


def decision_values(model: ModelArtifact, text: str) -> dict[str, float]:
    vec = vectorize(text, model)
    idx, val = vec.indices_values(len(model.labels))
    scores = model.weights[:, idx] @ val + model.bias
    return {label: float(scores[i]) for i, label in enumerate(model.labels)}


def predict(model: ModelArtifact, text: str) -> tuple[str, dict[str, float]]:
    """Argmax label and the per-label decision values; ties take the
    lexicographically smallest label (labels are stored sorted)."""
    decisions = decision_values(model, text)
    values = np.array([decisions[label] for label in model.labels])
    return model.labels[int(np.argmax(values))], decisions


def evaluate(model: ModelArtifact, examples: Sequence[tuple[str, str]]) -> dict:
    """Micro accuracy plus per-label precision/recall/F1 (0 when undefined)."""
    if not examples:
        raise ValueError("evaluate needs at least one example")
    tp: dict[str, int] = {label: 0 for label in model.labels}
    fp: dict[str, int] = {label: 0 for label in model.labels}
    fn: dict[str, int] = {label: 0 for label in model.labels}
    support: dict[str, int] = {label: 0 for label in model.labels}
    correct = 0
    for text, gold in examples:
        guess, _ = predict(model, text)
        support[gold] = support.get(gold, 0) + 1
        if guess == gold:
            correct += 1
            tp[gold] += 1
        else:
            fp[guess] += 1
            fn[gold] = fn.get(gold, 0) + 1
    per_label = {}
    for label in model.labels:
        precision = tp[label] / (tp[label] + fp[label]) if tp[label] + fp[label] else 0.0
        recall = tp[label] / (tp[label] + fn[label]) if tp[label] + fn[label] else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_label[label] = {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "support": support[label],
        }
    return {"accuracy": correct / len(examples), "per_label": per_label}


def pegasos_objective(model: ModelArtifact, examples: Sequence[tuple[str, str]]) -> float:
    """lambda/2 * ||w||^2 + mean hinge, summed over the per-label problems."""
    total = 0.0
    vectors = [vectorize(text, model) for text, _ in examples]
    xs = [vec.indices_values(len(model.labels)) for vec in vectors]
    for li, label in enumerate(model.labels):
        w = model.weights[li]
        reg = 0.5 * model.hyper.lam * float(w @ w)
        hinge = 0.0
        for (idx, val), (_, gold) in zip(xs, examples):
            y = 1.0 if gold == label else -1.0
            hinge += max(0.0, 1.0 - y * (float(w[idx] @ val) + model.bias[li]))
        total += reg + hinge / len(examples)
    return total


# -- persistence -------------------------------------------------------------


def save_model(model: ModelArtifact, path: str | Path) -> str:
    """Write `ELIMDL1 <sha256>` header plus a JSON body; returns the digest.

    Weight vectors are embedded as base64 of their raw float64 bytes so a
    load restores them bit-exactly.
    """
    payload = {
        "labels": list(model.labels),
        "hyper": model.hyper.to_dict(),
        "bias": model.bias.tolist(),
        "weights_b64": base64.b64encode(np.ascontiguousarray(model.weights).tobytes()).decode(),
        "weights_shape": list(model.weights.shape),
        "class_lms": {label: lm.to_dict() for label, lm in model.class_lms.items()},
        "background_lm": model.background_lm.to_dict(),
    }
    body = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    Path(path).write_text(f"{MAGIC} {digest}\n{body}\n", encoding="utf-8")
    return digest


def load_model(path: str | Path) -> ModelArtifact:
    """Load and checksum-verify a model file."""
    raw = Path(path).read_text("utf-8")
    header, _, body = raw.partition("\n")
    fields = header.split()
    if len(fields) != 2 or fields[0] != MAGIC:
        raise ValueError(f"{path}: not a model file (missing {MAGIC} header)")
    body = body.rstrip("\n")
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    if digest != fields[1]:
        raise ValueError(f"{path}: checksum mismatch; file is corrupt")
    payload = json.loads(body)
    shape = tuple(payload["weights_shape"])
    weights = np.frombuffer(base64.b64decode(payload["weights_b64"]), dtype=np.float64)
    return ModelArtifact(
        labels=tuple(payload["labels"]),
        weights=weights.reshape(shape).copy(),
        bias=np.asarray(payload["bias"], dtype=np.float64),
        hyper=Hyperparams.from_dict(payload["hyper"]),
        class_lms={
            label: NgramModel.from_dict(lm) for label, lm in payload["class_lms"].items()
        },
        background_lm=NgramModel.from_dict(payload["background_lm"]),
    )


def read_training_csv(path: str | Path) -> list[tuple[str, str]]:
    """Read `label,text` rows (header required, text quoted as needed)."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:2]] != ["label", "text"]:
            raise ValueError(f"{path}: expected a CSV header `label,text`")
        return [(row["text"], row["label"]) for row in reader]
