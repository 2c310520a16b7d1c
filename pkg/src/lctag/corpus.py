"""Corpus handling: CJK sentence segmentation, two-column file I/O,
BMES <-> entity-span conversion, strict entity-level scoring, label-space
relabeling, and a synthetic corpus generator.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .decode import LabelSequence
from .errors import InvalidInputError
from .labelspace import (
    ConstraintMatrix,
    Label,
    LabelSet,
    PositionTag,
    build_constraint_matrix,
    build_label_set,
    is_valid_sequence,
)


@dataclass
class Sentence:
    tokens: list[str]
    gold: LabelSequence | None = None

    def __post_init__(self):
        if self.gold is not None and len(self.gold) != len(self.tokens):
            raise InvalidInputError("gold labels do not length-match tokens")


@dataclass(frozen=True)
class EntitySpan:
    entity_type: str
    start: int  # inclusive
    end: int  # inclusive

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise InvalidInputError("span must satisfy 0 <= start <= end")


@dataclass(frozen=True)
class SegmentationProfile:
    name: str
    terminal_marks: frozenset[str]
    trailing_closers: frozenset[str]


# Profile C: primary sentence-ending punctuation only.
PROFILE_C = SegmentationProfile("c", frozenset("。！？"), frozenset())
# Profiles A/B additionally attach closing quotes right after a terminal.
PROFILE_AB = SegmentationProfile("ab", frozenset("。！？"), frozenset("」』”’"))

PROFILES = {"ab": PROFILE_AB, "a": PROFILE_AB, "b": PROFILE_AB, "c": PROFILE_C}


def segment(text: str, profile: SegmentationProfile) -> list[str]:
    """Split after each terminal mark; a run of trailing closers immediately
    following a terminal stays with the preceding segment. Lossless:
    concatenating the output reproduces the input.
    """
    segments: list[str] = []
    buf: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        buf.append(ch)
        i += 1
        if ch in profile.terminal_marks:
            while i < len(text) and text[i] in profile.trailing_closers:
                buf.append(text[i])
                i += 1
            segments.append("".join(buf))
            buf = []
    if buf:
        segments.append("".join(buf))
    return segments


def tokenize(text: str) -> list[str]:
    """One Unicode scalar per token; runs of ASCII alphanumerics stay whole;
    whitespace is dropped.
    """
    tokens: list[str] = []
    run: list[str] = []
    for ch in text:
        if ch.isascii() and ch.isalnum():
            run.append(ch)
            continue
        if run:
            tokens.append("".join(run))
            run = []
        if not ch.isspace():
            tokens.append(ch)
    if run:
        tokens.append("".join(run))
    return tokens


def read_corpus(path_or_stream, labels: LabelSet) -> list[Sentence]:
    """Read a two-column (token TAB label) file; blank lines end sentences."""
    if hasattr(path_or_stream, "read"):
        lines = path_or_stream.read().splitlines()
    else:
        with open(path_or_stream, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    sentences: list[Sentence] = []
    tokens: list[str] = []
    gold: list[int] = []

    def flush():
        if tokens:
            sentences.append(
                Sentence(list(tokens), LabelSequence(list(gold), labels))
            )
            tokens.clear()
            gold.clear()

    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            flush()
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0]:
            raise InvalidInputError(f"line {lineno}: malformed corpus line: {line!r}")
        token, name = parts
        if name not in labels:
            raise InvalidInputError(f"line {lineno}: unknown label: {name!r}")
        tokens.append(token)
        gold.append(labels.index_of(name))
    flush()
    return sentences


def write_corpus(sentences: list[Sentence], path_or_stream) -> None:
    def _dump(fh):
        for sent in sentences:
            if sent.gold is None:
                raise InvalidInputError("cannot write a sentence without labels")
            for token, name in zip(sent.tokens, sent.gold.names()):
                fh.write(f"{token}\t{name}\n")
            fh.write("\n")

    if hasattr(path_or_stream, "write"):
        _dump(path_or_stream)
    else:
        with open(path_or_stream, "w", encoding="utf-8") as fh:
            _dump(fh)


def extract_entities(seq: LabelSequence) -> list[EntitySpan]:
    """Spans from maximal well-formed B(M)*E runs and S singletons.

    Tolerates invalid sequences: dangling B/M runs, type switches mid-run,
    and unopened M/E yield no span.
    """
    spans: list[EntitySpan] = []
    labels = seq.labels
    start = -1
    run_type: str | None = None
    for t, idx in enumerate(seq.indices):
        lab = labels.labels[idx]
        if lab.tag is PositionTag.B:
            start, run_type = t, lab.entity_type
        elif lab.tag is PositionTag.M:
            if run_type is not None and lab.entity_type != run_type:
                start, run_type = -1, None
        elif lab.tag is PositionTag.E:
            if run_type is not None and lab.entity_type == run_type:
                spans.append(EntitySpan(run_type, start, t))
            start, run_type = -1, None
        elif lab.tag is PositionTag.S:
            spans.append(EntitySpan(lab.entity_type, t, t))
            start, run_type = -1, None
        else:  # O
            start, run_type = -1, None
    return sorted(spans, key=lambda s: (s.start, s.end, s.entity_type))


def encode_entities(
    spans: list[EntitySpan], length: int, labels: LabelSet
) -> LabelSequence:
    """Inverse of extract_entities for non-overlapping spans within length."""
    indices = [labels.index_of("O")] * length
    occupied = [False] * length
    for span in sorted(spans, key=lambda s: s.start):
        if span.end >= length:
            raise InvalidInputError("span extends past sentence end")
        if any(occupied[span.start : span.end + 1]):
            raise InvalidInputError("overlapping spans cannot be encoded")
        for t in range(span.start, span.end + 1):
            occupied[t] = True
        if span.start == span.end:
            indices[span.start] = labels.index_of(f"S-{span.entity_type}")
        else:
            indices[span.start] = labels.index_of(f"B-{span.entity_type}")
            for t in range(span.start + 1, span.end):
                indices[t] = labels.index_of(f"M-{span.entity_type}")
            indices[span.end] = labels.index_of(f"E-{span.entity_type}")
    return LabelSequence(indices, labels)


@dataclass
class ScoreReport:
    precision: float
    recall: float
    f1: float
    per_type: dict[str, dict[str, float]]

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_type": self.per_type,
        }


def _prf(matched: int, predicted: int, gold: int) -> tuple[float, float, float]:
    p = matched / predicted if predicted else 0.0
    r = matched / gold if gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


def score(gold: list[Sentence], pred: list[LabelSequence]) -> ScoreReport:
    """Strict entity-level P/R/F1: a predicted span counts iff its type,
    start, and end all match a gold span.
    """
    if len(gold) != len(pred):
        raise InvalidInputError("gold and predictions have different sizes")
    matched: dict[str, int] = {}
    n_pred: dict[str, int] = {}
    n_gold: dict[str, int] = {}
    for sent, pseq in zip(gold, pred):
        if sent.gold is None:
            raise InvalidInputError("gold sentence lacks labels")
        if len(pseq) != len(sent.tokens):
            raise InvalidInputError("prediction does not length-match sentence")
        gspans = set(extract_entities(sent.gold))
        pspans = set(extract_entities(pseq))
        for s in gspans:
            n_gold[s.entity_type] = n_gold.get(s.entity_type, 0) + 1
        for s in pspans:
            n_pred[s.entity_type] = n_pred.get(s.entity_type, 0) + 1
        for s in gspans & pspans:
            matched[s.entity_type] = matched.get(s.entity_type, 0) + 1
    types = sorted(set(n_gold) | set(n_pred))
    per_type = {}
    for t in types:
        p, r, f1 = _prf(matched.get(t, 0), n_pred.get(t, 0), n_gold.get(t, 0))
        per_type[t] = {"precision": p, "recall": r, "f1": f1}
    p, r, f1 = _prf(
        sum(matched.values()), sum(n_pred.values()), sum(n_gold.values())
    )
    return ScoreReport(p, r, f1, per_type)


def relabel_subset(
    sentences: list[Sentence],
    mapping: dict[str, str | None],
    target_labels: LabelSet,
) -> list[Sentence]:
    """Re-encode a corpus under another label vocabulary: mapped spans keep
    their extent with the new type; spans mapped to None become O.
    """
    for tgt in mapping.values():
        if tgt is not None and tgt not in target_labels.entity_types:
            raise InvalidInputError(f"mapped type {tgt!r} not in target label set")
    out: list[Sentence] = []
    for sent in sentences:
        if sent.gold is None:
            raise InvalidInputError("relabeling requires gold labels")
        new_spans: list[EntitySpan] = []
        for span in extract_entities(sent.gold):
            if span.entity_type not in mapping:
                raise InvalidInputError(
                    f"mapping does not cover source type {span.entity_type!r}"
                )
            tgt = mapping[span.entity_type]
            if tgt is not None:
                new_spans.append(EntitySpan(tgt, span.start, span.end))
        out.append(
            Sentence(
                list(sent.tokens),
                encode_entities(new_spans, len(sent.tokens), target_labels),
            )
        )
    return out


# --- synthetic corpora ----------------------------------------------------

_CJK_BASE = 0x4E00


@dataclass
class SynthSpec:
    """Generator settings for a synthetic character-tagged corpus.

    Each (entity type, position tag) slot and the outside filler get a
    disjoint character alphabet, so at noise_rate 0 the token alone
    determines its label. Boundary noise replaces entity-boundary tokens
    (and some outside tokens) with characters from a shared ambiguous pool,
    so boundary labels cannot be resolved from the token alone.
    """

    entity_types: list[str]
    n_sentences: int
    sentence_length: tuple[int, int] = (10, 24)
    entities_per_sentence: tuple[int, int] = (1, 3)
    entity_length: tuple[int, int] = (1, 4)
    noise_rate: float = 0.0
    # Of the noised boundary tokens, this fraction is drawn from another
    # type's same-tag alphabet (type-misleading) instead of the neutral pool.
    confusion_rate: float = 0.0
    # Relative sampling weights per entity type (defaults to uniform); a
    # skewed profile mimics natural long-tailed type distributions.
    type_weights: tuple[float, ...] | None = None
    chars_per_slot: int = 30
    ambiguous_pool_size: int = 12

    def __post_init__(self):
        if not self.entity_types:
            raise InvalidInputError("entity_types must be non-empty")
        if self.n_sentences <= 0:
            raise InvalidInputError("n_sentences must be positive")
        if self.sentence_length[0] < 1 or self.sentence_length[0] > self.sentence_length[1]:
            raise InvalidInputError("bad sentence_length range")
        if self.entity_length[0] < 1 or self.entity_length[0] > self.entity_length[1]:
            raise InvalidInputError("bad entity_length range")
        if self.entity_length[0] > self.sentence_length[0]:
            raise InvalidInputError("entity length exceeds sentence length")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise InvalidInputError("noise_rate must be in [0, 1]")
        if not 0.0 <= self.confusion_rate <= 1.0:
            raise InvalidInputError("confusion_rate must be in [0, 1]")
        if self.type_weights is not None:
            if len(self.type_weights) != len(self.entity_types):
                raise InvalidInputError("type_weights length must match entity_types")
            if any(w < 0 for w in self.type_weights) or sum(self.type_weights) <= 0:
                raise InvalidInputError("type_weights must be non-negative, not all zero")


def _slot_alphabets(spec: SynthSpec) -> tuple[dict, list[str], list[str]]:
    cursor = _CJK_BASE
    slots: dict[tuple[str, PositionTag], list[str]] = {}
    for etype in spec.entity_types:
        for tag in (PositionTag.B, PositionTag.M, PositionTag.E, PositionTag.S):
            slots[(etype, tag)] = [
                chr(cursor + i) for i in range(spec.chars_per_slot)
            ]
            cursor += spec.chars_per_slot
    outside = [chr(cursor + i) for i in range(spec.chars_per_slot)]
    cursor += spec.chars_per_slot
    ambiguous = [chr(cursor + i) for i in range(spec.ambiguous_pool_size)]
    return slots, outside, ambiguous


def synth_corpus(
    spec: SynthSpec, seed: int, labels: LabelSet | None = None
) -> tuple[list[Sentence], LabelSet]:
    """Deterministic synthetic corpus; every gold sequence is BMES-valid."""
    labels = labels or build_label_set(spec.entity_types)
    rng = random.Random(seed)
    slots, outside, ambiguous = _slot_alphabets(spec)
    cm = build_constraint_matrix(labels)
    sentences: list[Sentence] = []
    for _ in range(spec.n_sentences):
        length = rng.randint(*spec.sentence_length)
        spans: list[EntitySpan] = []
        occupied = [False] * length
        want = rng.randint(*spec.entities_per_sentence)
        attempts = 0
        while len(spans) < want and attempts < 50:
            attempts += 1
            ell = rng.randint(spec.entity_length[0], min(spec.entity_length[1], length))
            start = rng.randint(0, length - ell)
            if any(occupied[start : start + ell]):
                continue
            etype = (
                rng.choices(spec.entity_types, weights=spec.type_weights, k=1)[0]
                if spec.type_weights
                else rng.choice(spec.entity_types)
            )
            spans.append(EntitySpan(etype, start, start + ell - 1))
            for t in range(start, start + ell):
                occupied[t] = True
        gold = encode_entities(spans, length, labels)
        tokens: list[str] = []
        for idx in gold.indices:
            lab = labels.labels[idx]
            if lab.tag is PositionTag.O:
                if spec.noise_rate and rng.random() < spec.noise_rate / 2:
                    tokens.append(rng.choice(ambiguous))
                else:
                    tokens.append(rng.choice(outside))
            else:
                boundary = lab.tag in (PositionTag.B, PositionTag.E, PositionTag.S)
                if boundary and spec.noise_rate and rng.random() < spec.noise_rate:
                    others = [t for t in spec.entity_types if t != lab.entity_type]
                    if others and rng.random() < spec.confusion_rate:
                        tokens.append(rng.choice(slots[(rng.choice(others), lab.tag)]))
                    else:
                        tokens.append(rng.choice(ambiguous))
                else:
                    tokens.append(rng.choice(slots[(lab.entity_type, lab.tag)]))
        assert is_valid_sequence(labels, cm, gold.indices)
        sentences.append(Sentence(tokens, gold))
    return sentences, labels
