"""Export per-token label logits for a two-column corpus.

The output contract is shared with the decoding toolkit:
- vocabulary file: header ``scheme=BMES k=<int>``, then one label name per
  line in canonical order (B/M/E/S per entity type, then O);
- logits file: one JSON object per sentence,
  ``{"tokens": [...], "logits": [[...k floats...] per token]}``.

Scorers are resolved from a model identifier. ``stub://TYPE1,TYPE2`` builds a
deterministic hash-based scorer (no external dependencies); any other
identifier is treated as a Hugging Face token-classification model name and
loaded lazily through ``transformers``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Protocol

import numpy as np


class AlignmentError(ValueError):
    """Model output rows could not be aligned one-to-one with input tokens."""


@dataclass(frozen=True)
class ExportJob:
    model: str  # scorer identifier, e.g. "stub://PER,LOC" or a HF model name
    corpus_path: str
    logits_path: str
    vocab_path: str
    batch_size: int = 16
    device: str = "cpu"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass(frozen=True)
class ExportResult:
    sentences: int
    tokens: int


class Scorer(Protocol):
    """A token-classification model: label names plus per-token scores."""

    @property
    def label_names(self) -> list[str]: ...

    def score_batch(self, batch: list[list[str]]) -> list[np.ndarray]:
        """One (n_tokens, k) float array per sentence, rows aligned to the
        input tokens."""
        ...


def bmes_label_names(entity_types: list[str]) -> list[str]:
    names = [f"{tag}-{t}" for t in entity_types for tag in "BMES"]
    names.append("O")
    return names


class StubScorer:
    """Deterministic dependency-free scorer for wiring and format tests.

    Each (token, label) score is derived from a keyed hash of the token, so
    re-export is byte-identical and scores carry no linguistic signal.
    """

    def __init__(self, entity_types: list[str], salt: int = 0):
        if not entity_types:
            raise ValueError("stub scorer needs at least one entity type")
        self._labels = bmes_label_names(entity_types)
        self._salt = salt

    @property
    def label_names(self) -> list[str]:
        return list(self._labels)

    def _score(self, token: str, label: str) -> float:
        digest = hashlib.blake2b(
            f"{token}\x00{label}".encode("utf-8"),
            digest_size=8,
            salt=self._salt.to_bytes(8, "little", signed=True),
        ).digest()
        # map the 64-bit hash to a score in [-2, 2)
        return int.from_bytes(digest, "little") / 2**62 - 2.0

    def score_batch(self, batch: list[list[str]]) -> list[np.ndarray]:
        return [
            np.array(
                [[self._score(tok, lab) for lab in self._labels] for tok in tokens]
            ).reshape(len(tokens), len(self._labels))
            for tokens in batch
        ]


class TransformersScorer:
    """Hugging Face token-classification model, deterministic inference.

    A character made of several sub-tokens is represented by its first
    sub-token's scores.
    """

    def __init__(self, model_name: str, device: str = "cpu"):
        import torch
        from transformers import AutoModelForTokenClassification, AutoTokenizer

        self._torch = torch
        self._tokenizer = AutoTokenizer.from_pretrained(model_name)
        self._model = AutoModelForTokenClassification.from_pretrained(model_name)
        self._model.to(device)
        self._model.eval()
        self._device = device
        id2label = self._model.config.id2label
        self._labels = [id2label[i] for i in range(len(id2label))]

    @property
    def label_names(self) -> list[str]:
        return list(self._labels)

    def score_batch(self, batch: list[list[str]]) -> list[np.ndarray]:
        torch = self._torch
        encoded = self._tokenizer(
            batch,
            is_split_into_words=True,
            return_tensors="pt",
            padding=True,
            truncation=False,
        ).to(self._device)
        with torch.no_grad():
            logits = self._model(**encoded).logits.cpu().numpy()
        out = []
        for i, tokens in enumerate(batch):
            word_ids = encoded.word_ids(batch_index=i)
            first_rows = {}
            for pos, wid in enumerate(word_ids):
                if wid is not None and wid not in first_rows:
                    first_rows[wid] = pos
            if len(first_rows) != len(tokens):
                raise AlignmentError(
                    f"model produced {len(first_rows)} word alignments for "
                    f"{len(tokens)} tokens"
                )
            out.append(logits[i, [first_rows[w] for w in range(len(tokens))]])
        return out


def resolve_scorer(model: str, device: str = "cpu") -> Scorer:
    if model.startswith("stub://"):
        types = [t for t in model[len("stub://"):].split(",") if t]
        return StubScorer(types)
    return TransformersScorer(model, device=device)


def read_corpus_tokens(path_or_stream) -> list[list[str]]:
    """Token sequences from a two-column file (token, tab, label; blank line
    between sentences). The label column is optional and ignored."""
    if hasattr(path_or_stream, "read"):
        lines = path_or_stream.read().splitlines()
    else:
        with open(path_or_stream, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    sentences: list[list[str]] = []
    current: list[str] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            if current:
                sentences.append(current)
                current = []
            continue
        token = line.split("\t", 1)[0]
        if not token:
            raise ValueError(f"line {lineno}: empty token")
        current.append(token)
    if current:
        sentences.append(current)
    return sentences


def write_vocab_file(label_names: list[str], path) -> None:
    lines = [f"scheme=BMES k={len(label_names)}"]
    lines.extend(label_names)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _batched(items: list, size: int) -> Iterable[list]:
    for i in range(0, len(items), size):
        yield items[i : i + size]


def export(job: ExportJob, scorer: Scorer | None = None) -> ExportResult:
    """Score every sentence and write the logits and vocabulary files.

    Raises AlignmentError naming the sentence when a scorer's row count does
    not match the token count, and ValueError on non-finite scores.
    """
    scorer = scorer if scorer is not None else resolve_scorer(job.model, job.device)
    sentences = read_corpus_tokens(job.corpus_path)
    label_names = scorer.label_names
    k = len(label_names)
    total_tokens = 0
    sentence_index = 0
    with open(job.logits_path, "w", encoding="utf-8") as fh:
        for batch in _batched(sentences, job.batch_size):
            for tokens, scores in zip(batch, scorer.score_batch(batch)):
                sentence_index += 1
                scores = np.asarray(scores, dtype=np.float64)
                if scores.shape != (len(tokens), k):
                    raise AlignmentError(
                        f"sentence {sentence_index}: got {scores.shape[0]} logits "
                        f"rows for {len(tokens)} tokens"
                    )
                if not np.all(np.isfinite(scores)):
                    raise ValueError(
                        f"sentence {sentence_index}: non-finite score in model output"
                    )
                obj = {"tokens": tokens, "logits": scores.tolist()}
                fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
                total_tokens += len(tokens)
    write_vocab_file(label_names, job.vocab_path)
    return ExportResult(sentences=len(sentences), tokens=total_tokens)
