"""Feature-hash token encoder and the linear logits projection.

The encoder hashes character unigrams of the token and its neighbours (plus
adjacent-token pairs) into a fixed-dimension sparse vector, standing in for
a contextual encoder; the projection maps features to label logits, trained
with per-token cross-entropy.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

import numpy as np

from .decode import LogitsSequence
from .errors import InvalidInputError, NumericalFailureError
from .labelspace import LabelSet

_BOS = "\x02"
_EOS = "\x03"


@dataclass(frozen=True)
class FeatureEncoder:
    dim: int = 2**18
    window: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.dim <= 0:
            raise InvalidInputError("feature dimension must be positive")
        if self.window < 0:
            raise InvalidInputError("window radius must be non-negative")


@dataclass(frozen=True)
class FeatureVector:
    """Sparse vector: sorted unique indices with summed values."""

    indices: np.ndarray  # int64
    values: np.ndarray  # float64

    def __post_init__(self):
        self.indices.setflags(write=False)
        self.values.setflags(write=False)


@dataclass
class LinearProjection:
    weights: np.ndarray  # (k, d)
    bias: np.ndarray  # (k,)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise InvalidInputError("weights must be (k, d) with a length-k bias")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise InvalidInputError("projection parameters must be finite")

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def zeros(cls, k: int, dim: int) -> "LinearProjection":
        return cls(np.zeros((k, dim)), np.zeros(k))


def _hash_feature(key: str, seed: int, dim: int) -> int:
    digest = hashlib.blake2b(
        key.encode("utf-8"), digest_size=8, salt=seed.to_bytes(8, "little", signed=True)
    ).digest()
    return int.from_bytes(digest, "little") % dim


def encode(tokens: list[str], enc: FeatureEncoder) -> list[FeatureVector]:
    """Per-token sparse features from the token and its window neighbours."""
    if any(not isinstance(t, str) or not t for t in tokens):
        raise InvalidInputError("tokens must be non-empty strings")
    padded = [_BOS] * enc.window + list(tokens) + [_EOS] * enc.window
    out: list[FeatureVector] = []
    for t in range(len(tokens)):
        raw: dict[int, float] = {}
        for off in range(-enc.window, enc.window + 1):
            tok = padded[t + enc.window + off]
            for ch in tok:
                idx = _hash_feature(f"u|{off}|{ch}", enc.seed, enc.dim)
                raw[idx] = raw.get(idx, 0.0) + 1.0
            for a, b in zip(tok, tok[1:]):
                idx = _hash_feature(f"b|{off}|{a}{b}", enc.seed, enc.dim)
                raw[idx] = raw.get(idx, 0.0) + 1.0
        for off in range(-enc.window, enc.window):
            a = padded[t + enc.window + off]
            b = padded[t + enc.window + off + 1]
            idx = _hash_feature(f"p|{off}|{a}\x00{b}", enc.seed, enc.dim)
            raw[idx] = raw.get(idx, 0.0) + 1.0
        indices = np.fromiter(sorted(raw), dtype=np.int64, count=len(raw))
        values = np.asarray([raw[i] for i in sorted(raw)], dtype=np.float64)
        out.append(FeatureVector(indices, values))
    return out


@dataclass(frozen=True)
class SentenceFeatures:
    """Packed per-sentence features: the union of active columns and a dense
    (n, |columns|) local matrix. Equivalent to the per-token sparse vectors
    but amenable to single-matmul projection and gradient updates.
    """

    columns: np.ndarray  # unique feature indices, sorted
    matrix: np.ndarray  # (n, len(columns))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __len__(self) -> int:
        return self.n


def pack_features(features: list[FeatureVector]) -> SentenceFeatures:
    all_idx = np.concatenate([fv.indices for fv in features]) if features else np.empty(0, np.int64)
    columns, inverse = np.unique(all_idx, return_inverse=True)
    matrix = np.zeros((len(features), len(columns)))
    pos = 0
    for t, fv in enumerate(features):
        width = len(fv.indices)
        matrix[t, inverse[pos : pos + width]] = fv.values
        pos += width
    return SentenceFeatures(columns, matrix)


def project(
    features: list[FeatureVector] | SentenceFeatures, proj: LinearProjection
) -> LogitsSequence:
    """Row t = W h_t + b over the sparse features."""
    if not isinstance(features, SentenceFeatures):
        features = pack_features(features)
    if len(features.columns) and int(features.columns[-1]) >= proj.dim:
        raise InvalidInputError("feature index exceeds projection dimension")
    rows = features.matrix @ proj.weights[:, features.columns].T + proj.bias
    return LogitsSequence(rows)


def softmax(row: np.ndarray) -> np.ndarray:
    shifted = row - np.max(row)
    e = np.exp(shifted)
    return e / e.sum()


@dataclass
class EmissionTrainConfig:
    epochs: int = 20
    learning_rate: float = 0.1
    batch_size: int = 8
    seed: int = 0


def apply_logits_gradient(
    proj: LinearProjection,
    features: list[FeatureVector] | SentenceFeatures,
    grad_logits: np.ndarray,
    learning_rate: float,
) -> None:
    """In-place SGD step: push a (n, k) logits gradient through W h + b."""
    if not isinstance(features, SentenceFeatures):
        features = pack_features(features)
    proj.weights[:, features.columns] -= learning_rate * (
        grad_logits.T @ features.matrix
    )
    proj.bias -= learning_rate * grad_logits.sum(axis=0)


def token_ce_and_gradient(
    logits: LogitsSequence, gold: list[int]
) -> tuple[float, np.ndarray]:
    """Mean per-token cross-entropy and its logits gradient (softmax - onehot)."""
    if len(gold) != logits.n:
        raise InvalidInputError("gold length does not match logits")
    n = logits.n
    scores = logits.scores
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=1, keepdims=True)
    rows = np.arange(n)
    loss = -float(np.log(p[rows, gold]).sum()) / n
    grad = p
    grad[rows, gold] -= 1.0
    return loss, grad / n


def train_emission(
    corpus: list[tuple[list[FeatureVector], list[int]]],
    labels: LabelSet,
    enc: FeatureEncoder,
    config: EmissionTrainConfig | None = None,
) -> tuple[LinearProjection, list[float]]:
    """Mini-batch gradient descent on mean per-token cross-entropy.

    `corpus` pairs pre-encoded feature sequences with gold label indices.
    Returns the projection and the per-epoch mean loss trajectory.
    """
    if not corpus:
        raise InvalidInputError("training corpus is empty")
    for features, gold in corpus:
        if len(features) != len(gold):
            raise InvalidInputError("features/gold length mismatch")
        for y in gold:
            if not 0 <= y < labels.k:
                raise InvalidInputError(f"gold label out of range: {y}")
    config = config or EmissionTrainConfig()
    corpus = [
        (f if isinstance(f, SentenceFeatures) else pack_features(f), g)
        for f, g in corpus
    ]
    proj = LinearProjection.zeros(labels.k, enc.dim)
    rng = random.Random(config.seed)
    order = list(range(len(corpus)))
    epoch_losses: list[float] = []
    for _ in range(config.epochs):
        rng.shuffle(order)
        total = 0.0
        for b0 in range(0, len(order), config.batch_size):
            batch = order[b0 : b0 + config.batch_size]
            grads = []
            for i in batch:
                features, gold = corpus[i]
                logits = project(features, proj)
                loss, grad = token_ce_and_gradient(logits, gold)
                if not np.isfinite(loss):
                    raise NumericalFailureError(
                        f"non-finite loss at sentence {i}"
                    )
                total += loss
                grads.append((features, grad))
            lr = config.learning_rate / len(batch)
            for features, grad in grads:
                apply_logits_gradient(proj, features, grad, lr)
        epoch_losses.append(total / len(order))
    return proj, epoch_losses
