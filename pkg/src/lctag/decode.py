"""Decoders over per-token label logits: plain argmax, masked greedy
(logits-constrained), and constrained Viterbi.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidInputError
from .labelspace import ConstraintMatrix, LabelSet

# Stand-in for -inf in masked scores. Large enough to never win an argmax,
# small enough that sums along a path stay finite (no overflow to -inf).
MASK_SCORE = -1e30


@dataclass(frozen=True)
class LogitsSequence:
    """An n x k matrix of unnormalized per-token label scores."""

    scores: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.scores, dtype=np.float64)
        if arr.ndim != 2:
            raise InvalidInputError("logits must be a 2-d (n, k) array")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("logits must be finite")
        object.__setattr__(self, "scores", arr)
        arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    @property
    def k(self) -> int:
        return self.scores.shape[1]


@dataclass(frozen=True)
class LabelSequence:
    """A decoded (or gold) sequence of label indices over a LabelSet."""

    indices: list[int]
    labels: LabelSet

    def __post_init__(self):
        for idx in self.indices:
            if not 0 <= idx < self.labels.k:
                raise InvalidInputError(f"label index out of range: {idx}")

    def names(self) -> list[str]:
        return [self.labels.name_of(i) for i in self.indices]

    def __len__(self) -> int:
        return len(self.indices)


def argmax_decode(logits: LogitsSequence, labels: LabelSet) -> LabelSequence:
    """Per-row argmax; ties break to the lowest index."""
    if logits.n and logits.k != labels.k:
        raise InvalidInputError(f"logits have k={logits.k}, labels have k={labels.k}")
    idx = np.argmax(logits.scores, axis=1) if logits.n else np.empty(0, dtype=int)
    return LabelSequence([int(i) for i in idx], labels)


def lc_decode(logits: LogitsSequence, cm: ConstraintMatrix) -> LabelSequence:
    """Masked greedy decoding: the first token's logits are masked by the
    start mask, and each later token's logits by the valid-successor row of
    the previous prediction. Strictly left-to-right; the end mask is not
    enforced (see viterbi_decode for the global decoder).
    """
    if logits.n and logits.k != cm.k:
        raise InvalidInputError(f"logits have k={logits.k}, constraints have k={cm.k}")
    out: list[int] = []
    scores = logits.scores
    mask = cm.start_allow
    for t in range(logits.n):
        # Argmax over the unmasked entries only; equivalent to scoring the
        # masked entries at MASK_SCORE but immune to ties against it.
        allowed = np.flatnonzero(mask)
        y = int(allowed[np.argmax(scores[t, allowed])])
        out.append(y)
        mask = cm.allow[y]
    return LabelSequence(out, cm.labels)


def viterbi_decode(
    logits: LogitsSequence,
    cm: ConstraintMatrix,
    transitions: np.ndarray | None = None,
    start_scores: np.ndarray | None = None,
    end_scores: np.ndarray | None = None,
) -> LabelSequence:
    """Highest-scoring label sequence under the constraint matrix.

    Maximizes sum_t logits[t][y_t] + sum_t transitions[y_{t-1}][y_t]
    (+ optional start/end scores), with forbidden transitions and
    start/end-mask violations scored out. Ties break to the
    lexicographically smallest index sequence.
    """
    k = cm.k
    if logits.n and logits.k != k:
        raise InvalidInputError(f"logits have k={logits.k}, constraints have k={k}")
    if logits.n == 0:
        return LabelSequence([], cm.labels)
    trans = np.zeros((k, k)) if transitions is None else np.asarray(transitions, float)
    if trans.shape != (k, k):
        raise InvalidInputError(f"transitions must be ({k}, {k})")
    start = np.zeros(k) if start_scores is None else np.asarray(start_scores, float)
    end = np.zeros(k) if end_scores is None else np.asarray(end_scores, float)
    trans = np.where(cm.allow, trans, MASK_SCORE)
    start = np.where(cm.start_allow, start, MASK_SCORE)
    end = np.where(cm.end_allow, end, MASK_SCORE)

    n = logits.n
    scores = logits.scores
    # Suffix DP: beta[t][q] = best score of a path covering tokens t..n-1
    # that labels token t with q (includes end scores).
    beta = np.empty((n, k))
    beta[n - 1] = scores[n - 1] + end
    for t in range(n - 2, -1, -1):
        beta[t] = scores[t] + np.max(trans + beta[t + 1][None, :], axis=1)
    # Front-to-back reconstruction over suffix-optimal continuations gives
    # the lexicographically smallest optimal path (argmax ties -> lowest index).
    best_total = float(np.max(start + beta[0]))
    if best_total <= MASK_SCORE / 2:
        raise RuntimeError("no valid path exists under the constraint matrix")
    y = int(np.argmax(start + beta[0]))
    out = [y]
    for t in range(1, n):
        y = int(np.argmax(trans[y] + beta[t]))
        out.append(y)
    return LabelSequence(out, cm.labels)


def path_score(
    logits: LogitsSequence,
    seq: list[int],
    transitions: np.ndarray | None = None,
    start_scores: np.ndarray | None = None,
    end_scores: np.ndarray | None = None,
) -> float:
    """Score of one label sequence under the Viterbi objective."""
    if len(seq) != logits.n:
        raise InvalidInputError("sequence length does not match logits")
    total = float(sum(logits.scores[t, y] for t, y in enumerate(seq)))
    if transitions is not None:
        total += float(sum(transitions[p, q] for p, q in zip(seq, seq[1:])))
    if start_scores is not None and seq:
        total += float(start_scores[seq[0]])
    if end_scores is not None and seq:
        total += float(end_scores[seq[-1]])
    return total


def write_logits_jsonl(
    records: Iterable[tuple[list[str], LogitsSequence]], path_or_stream
) -> None:
    """Write the JSON-lines logits file: one object per sentence with
    `tokens` and row-major `logits`.
    """
    def _dump(fh):
        for tokens, logits in records:
            obj = {"tokens": tokens, "logits": logits.scores.tolist()}
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")

    if hasattr(path_or_stream, "write"):
        _dump(path_or_stream)
    else:
        with open(path_or_stream, "w", encoding="utf-8") as fh:
            _dump(fh)


def read_logits_jsonl(path_or_stream, k: int) -> list[tuple[list[str], LogitsSequence]]:
    """Read the JSON-lines logits file, validating shapes against k."""
    if hasattr(path_or_stream, "read"):
        lines = path_or_stream.read().splitlines()
    else:
        with open(path_or_stream, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    out: list[tuple[list[str], LogitsSequence]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"line {lineno}: malformed JSON: {exc}") from None
        tokens = obj.get("tokens")
        rows = obj.get("logits")
        if not isinstance(tokens, list) or not isinstance(rows, list):
            raise InvalidInputError(f"line {lineno}: missing tokens/logits fields")
        if len(rows) != len(tokens):
            raise InvalidInputError(
                f"line {lineno}: {len(tokens)} tokens but {len(rows)} logits rows"
            )
        arr = np.asarray(rows, dtype=np.float64)
        if arr.size and (arr.ndim != 2 or arr.shape[1] != k):
            raise InvalidInputError(f"line {lineno}: logits rows must have {k} columns")
        if arr.size == 0:
            arr = arr.reshape(0, k)
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError(f"line {lineno}: non-finite logits")
        out.append((tokens, LogitsSequence(arr)))
    return out
