"""Linear-chain CRF: log-space forward algorithm, exact NLL gradients via
forward-backward, joint training with the emission projection, and Viterbi
decoding (optionally constraint-masked).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from . import emission as em
from .decode import LabelSequence, LogitsSequence, viterbi_decode
from .errors import InvalidInputError, NumericalFailureError
from .labelspace import ConstraintMatrix, LabelSet, build_constraint_matrix

FORBIDDEN_SCORE = -1e4


def _lse(mat: np.ndarray, axis: int) -> np.ndarray:
    """log-sum-exp with the max-shift trick (hot path; avoids call overhead)."""
    m = mat.max(axis=axis)
    return m + np.log(np.exp(mat - np.expand_dims(m, axis)).sum(axis=axis))


@dataclass
class CrfParams:
    transitions: np.ndarray  # (k, k)
    start_scores: np.ndarray  # (k,)
    end_scores: np.ndarray  # (k,)

    def __post_init__(self):
        self.transitions = np.asarray(self.transitions, dtype=np.float64)
        self.start_scores = np.asarray(self.start_scores, dtype=np.float64)
        self.end_scores = np.asarray(self.end_scores, dtype=np.float64)
        k = self.transitions.shape[0]
        if self.transitions.shape != (k, k):
            raise InvalidInputError("transitions must be square")
        if self.start_scores.shape != (k,) or self.end_scores.shape != (k,):
            raise InvalidInputError("start/end scores must have length k")
        for arr in (self.transitions, self.start_scores, self.end_scores):
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError("CRF parameters must be finite")

    @property
    def k(self) -> int:
        return self.transitions.shape[0]

    @classmethod
    def zeros(cls, k: int) -> "CrfParams":
        return cls(np.zeros((k, k)), np.zeros(k), np.zeros(k))

    @classmethod
    def constraint_initialized(
        cls, cm: ConstraintMatrix, penalty: float = FORBIDDEN_SCORE
    ) -> "CrfParams":
        k = cm.k
        trans = np.where(cm.allow, 0.0, penalty)
        start = np.where(cm.start_allow, 0.0, penalty)
        end = np.where(cm.end_allow, 0.0, penalty)
        return cls(trans, start, end)


@dataclass
class CrfGradients:
    transitions: np.ndarray
    start_scores: np.ndarray
    end_scores: np.ndarray
    logits: list[np.ndarray]  # one (n, k) array per batch element


def _check_dims(logits: LogitsSequence, params: CrfParams) -> None:
    if logits.n == 0:
        raise InvalidInputError("CRF operations require n >= 1")
    if logits.k != params.k:
        raise InvalidInputError(
            f"logits have k={logits.k}, CRF parameters have k={params.k}"
        )


def log_partition(logits: LogitsSequence, params: CrfParams) -> float:
    """log sum over all k^n paths of exp(path score), forward algorithm."""
    _check_dims(logits, params)
    alpha = params.start_scores + logits.scores[0]
    for t in range(1, logits.n):
        alpha = _lse(alpha[:, None] + params.transitions, axis=0) + logits.scores[t]
    return float(_lse(alpha + params.end_scores, axis=0))


def gold_path_score(
    logits: LogitsSequence, gold: list[int], params: CrfParams
) -> float:
    _check_dims(logits, params)
    if len(gold) != logits.n:
        raise InvalidInputError("gold length does not match logits")
    score = params.start_scores[gold[0]] + params.end_scores[gold[-1]]
    score += sum(logits.scores[t, y] for t, y in enumerate(gold))
    score += sum(params.transitions[p, q] for p, q in zip(gold, gold[1:]))
    return float(score)


def _forward_backward(logits: LogitsSequence, params: CrfParams):
    """Returns (logZ, unary marginals (n,k), pairwise marginal sum (k,k))."""
    n, k = logits.n, logits.k
    scores = logits.scores
    alpha = np.empty((n, k))
    alpha[0] = params.start_scores + scores[0]
    for t in range(1, n):
        alpha[t] = _lse(alpha[t - 1][:, None] + params.transitions, axis=0)
        alpha[t] += scores[t]
    log_z = float(_lse(alpha[-1] + params.end_scores, axis=0))
    beta = np.empty((n, k))
    beta[-1] = params.end_scores
    for t in range(n - 2, -1, -1):
        beta[t] = _lse(
            params.transitions + (scores[t + 1] + beta[t + 1])[None, :], axis=1
        )
    unary = np.exp(alpha + beta - log_z)
    pair = np.zeros((k, k))
    for t in range(1, n):
        pair += np.exp(
            alpha[t - 1][:, None]
            + params.transitions
            + (scores[t] + beta[t])[None, :]
            - log_z
        )
    return log_z, unary, pair


def nll_and_gradient(
    batch: list[tuple[LogitsSequence, list[int]]], params: CrfParams
) -> tuple[float, CrfGradients]:
    """Mean NLL over the batch and exact gradients (expected minus observed
    sufficient statistics, averaged over the batch).
    """
    if not batch:
        raise InvalidInputError("batch is empty")
    k = params.k
    b = len(batch)
    total = 0.0
    g_trans = np.zeros((k, k))
    g_start = np.zeros(k)
    g_end = np.zeros(k)
    g_logits: list[np.ndarray] = []
    for logits, gold in batch:
        _check_dims(logits, params)
        if len(gold) != logits.n:
            raise InvalidInputError("gold length does not match logits")
        log_z, unary, pair = _forward_backward(logits, params)
        total += log_z - gold_path_score(logits, gold, params)
        gl = unary.copy()
        for t, y in enumerate(gold):
            gl[t, y] -= 1.0
        g_logits.append(gl / b)
        g_trans += pair
        for p, q in zip(gold, gold[1:]):
            g_trans[p, q] -= 1.0
        g_start += unary[0]
        g_start[gold[0]] -= 1.0
        g_end += unary[-1]
        g_end[gold[-1]] -= 1.0
    return total / b, CrfGradients(g_trans / b, g_start / b, g_end / b, g_logits)


@dataclass
class CrfTrainConfig:
    epochs: int = 20
    learning_rate: float = 0.1
    batch_size: int = 8
    seed: int = 0
    constraint_init: bool = False  # forbidden transitions pinned at FORBIDDEN_SCORE


@dataclass
class CrfTrainResult:
    params: CrfParams
    projection: em.LinearProjection
    epoch_losses: list[float]


def train_crf(
    corpus: list[tuple[list[em.FeatureVector], list[int]]],
    labels: LabelSet,
    enc: em.FeatureEncoder,
    config: CrfTrainConfig | None = None,
    cm: ConstraintMatrix | None = None,
    init_projection: em.LinearProjection | None = None,
) -> CrfTrainResult:
    """Mini-batch gradient descent on the CRF NLL, jointly updating the
    emission projection and the transition/start/end scores.

    With `constraint_init`, forbidden entries start at FORBIDDEN_SCORE and
    stay frozen there (cm defaults to the BMES matrix for `labels`).
    """
    if not corpus:
        raise InvalidInputError("training corpus is empty")
    for features, gold in corpus:
        if len(features) != len(gold):
            raise InvalidInputError("features/gold length mismatch")
    config = config or CrfTrainConfig()
    corpus = [
        (f if isinstance(f, em.SentenceFeatures) else em.pack_features(f), g)
        for f, g in corpus
    ]
    if config.constraint_init:
        cm = cm or build_constraint_matrix(labels)
        params = CrfParams.constraint_initialized(cm)
    else:
        params = CrfParams.zeros(labels.k)
    if init_projection is not None:
        proj = em.LinearProjection(
            init_projection.weights.copy(), init_projection.bias.copy()
        )
    else:
        proj = em.LinearProjection.zeros(labels.k, enc.dim)
    rng = random.Random(config.seed)
    order = list(range(len(corpus)))
    epoch_losses: list[float] = []
    for _ in range(config.epochs):
        rng.shuffle(order)
        total = 0.0
        for b0 in range(0, len(order), config.batch_size):
            batch_idx = order[b0 : b0 + config.batch_size]
            batch = []
            for i in batch_idx:
                features, gold = corpus[i]
                batch.append((em.project(features, proj), gold))
            loss, grads = nll_and_gradient(batch, params)
            if not np.isfinite(loss):
                raise NumericalFailureError(
                    f"non-finite loss in batch starting at sentence {batch_idx[0]}"
                )
            total += loss * len(batch)
            lr = config.learning_rate
            params.transitions -= lr * grads.transitions
            params.start_scores -= lr * grads.start_scores
            params.end_scores -= lr * grads.end_scores
            if config.constraint_init:
                params.transitions[~cm.allow] = FORBIDDEN_SCORE
                params.start_scores[~cm.start_allow] = FORBIDDEN_SCORE
                params.end_scores[~cm.end_allow] = FORBIDDEN_SCORE
            for i, grad_l in zip(batch_idx, grads.logits):
                em.apply_logits_gradient(proj, corpus[i][0], grad_l, lr)
        epoch_losses.append(total / len(order))
    return CrfTrainResult(params, proj, epoch_losses)


def crf_decode(
    logits: LogitsSequence,
    params: CrfParams,
    labels: LabelSet,
    cm: ConstraintMatrix | None = None,
) -> LabelSequence:
    """Viterbi with the learned transition scores; masking applied when a
    constraint matrix is supplied (the CRF+LC arm).
    """
    decode_cm = cm if cm is not None else _unconstrained_matrix(labels)
    return viterbi_decode(
        logits,
        decode_cm,
        transitions=params.transitions,
        start_scores=params.start_scores,
        end_scores=params.end_scores,
    )


def _unconstrained_matrix(labels: LabelSet) -> ConstraintMatrix:
    k = labels.k
    return ConstraintMatrix(
        labels, np.ones((k, k), dtype=bool), np.ones(k, dtype=bool), np.ones(k, dtype=bool)
    )
