"""BMES label vocabularies and the transition-constraint matrix.

Label ordering is fixed (B, M, E, S per entity type in input order, then O
last) so that indices, vocabulary files, and constraint counts are
reproducible.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import InvalidInputError

SCHEME_BMES = "BMES"


class PositionTag(enum.Enum):
    B = "B"
    M = "M"
    E = "E"
    S = "S"
    O = "O"


ENTITY_TAGS = (PositionTag.B, PositionTag.M, PositionTag.E, PositionTag.S)


@dataclass(frozen=True)
class Label:
    """A position tag plus (for non-O tags) an entity type."""

    tag: PositionTag
    entity_type: str | None

    def __post_init__(self):
        if self.tag is PositionTag.O:
            if self.entity_type is not None:
                raise InvalidInputError("O label carries no entity type")
        elif not self.entity_type:
            raise InvalidInputError(f"{self.tag.value} label requires an entity type")

    @property
    def name(self) -> str:
        if self.tag is PositionTag.O:
            return "O"
        return f"{self.tag.value}-{self.entity_type}"

    @classmethod
    def parse(cls, name: str) -> "Label":
        if name == "O":
            return cls(PositionTag.O, None)
        if len(name) < 3 or name[1] != "-" or name[0] not in "BMES":
            raise InvalidInputError(f"malformed label name: {name!r}")
        return cls(PositionTag(name[0]), name[2:])


@dataclass(frozen=True)
class LabelSet:
    """An ordered BMES label vocabulary with a stable label/index bijection."""

    entity_types: tuple[str, ...]
    scheme: str
    labels: tuple[Label, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {lab.name: i for i, lab in enumerate(self.labels)}
        )

    @property
    def k(self) -> int:
        return len(self.labels)

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise InvalidInputError(f"unknown label: {name!r}") from None

    def name_of(self, index: int) -> str:
        if not 0 <= index < self.k:
            raise InvalidInputError(f"label index out of range: {index}")
        return self.labels[index].name

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def vocab_hash(self) -> str:
        """Hash of the canonical vocabulary text, for checkpoint compatibility."""
        return hashlib.sha256(format_vocab(self).encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class ConstraintMatrix:
    """Boolean valid-transition matrix plus start/end masks for a LabelSet."""

    labels: LabelSet
    allow: np.ndarray  # (k, k) bool
    start_allow: np.ndarray  # (k,) bool
    end_allow: np.ndarray  # (k,) bool

    def __post_init__(self):
        for arr in (self.allow, self.start_allow, self.end_allow):
            arr.setflags(write=False)

    @property
    def k(self) -> int:
        return self.labels.k

    def allowed_transition_count(self) -> int:
        return int(self.allow.sum())


def build_label_set(entity_types: Iterable[str], scheme: str = SCHEME_BMES) -> LabelSet:
    """Build the BMES+O vocabulary for the given entity types (k = 4T + 1)."""
    types = tuple(entity_types)
    if scheme != SCHEME_BMES:
        raise InvalidInputError(f"unsupported scheme: {scheme!r}")
    if not types:
        raise InvalidInputError("entity_types must be non-empty")
    if len(set(types)) != len(types):
        raise InvalidInputError("entity_types must be unique")
    if any(not t for t in types):
        raise InvalidInputError("entity type names must be non-empty")
    labels = [Label(tag, t) for t in types for tag in ENTITY_TAGS]
    labels.append(Label(PositionTag.O, None))
    return LabelSet(entity_types=types, scheme=scheme, labels=tuple(labels))


def build_constraint_matrix(labels: LabelSet) -> ConstraintMatrix:
    """Valid BMES transitions:

    B-X -> {M-X, E-X};  M-X -> {M-X, E-X};
    E-X, S-X, O -> {B-*, S-*, O}.

    Start mask admits {B-*, S-*, O}; end mask admits {E-*, S-*, O}.
    """
    k = labels.k
    allow = np.zeros((k, k), dtype=bool)
    start_allow = np.zeros(k, dtype=bool)
    end_allow = np.zeros(k, dtype=bool)
    openers = {PositionTag.B, PositionTag.S, PositionTag.O}
    closers = {PositionTag.E, PositionTag.S, PositionTag.O}
    for q, lab in enumerate(labels.labels):
        start_allow[q] = lab.tag in openers
        end_allow[q] = lab.tag in closers
    for p, src in enumerate(labels.labels):
        for q, dst in enumerate(labels.labels):
            if src.tag in (PositionTag.B, PositionTag.M):
                ok = dst.entity_type == src.entity_type and dst.tag in (
                    PositionTag.M,
                    PositionTag.E,
                )
            else:  # E, S, O: any entity may open next, or O
                ok = dst.tag in openers
            allow[p, q] = ok
    return ConstraintMatrix(labels, allow, start_allow, end_allow)


def is_valid_sequence(
    labels: LabelSet, cm: ConstraintMatrix, seq: list[int]
) -> bool:
    """True iff seq satisfies the start mask, end mask, and every transition."""
    for idx in seq:
        if not 0 <= idx < labels.k:
            raise InvalidInputError(f"label index out of range: {idx}")
    if not seq:
        return True
    if not cm.start_allow[seq[0]] or not cm.end_allow[seq[-1]]:
        return False
    return all(cm.allow[p, q] for p, q in zip(seq, seq[1:]))


def format_vocab(labels: LabelSet) -> str:
    lines = [f"scheme={labels.scheme} k={labels.k}"]
    lines.extend(lab.name for lab in labels.labels)
    return "\n".join(lines) + "\n"


def write_vocab(labels: LabelSet, path_or_stream) -> None:
    """Write the label vocabulary file (header line, then one label per line)."""
    text = format_vocab(labels)
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        with open(path_or_stream, "w", encoding="utf-8") as fh:
            fh.write(text)


def read_vocab(path_or_stream) -> LabelSet:
    """Read a vocabulary file back into a LabelSet, validating the ordering."""
    if hasattr(path_or_stream, "read"):
        text = path_or_stream.read()
    else:
        with open(path_or_stream, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = text.splitlines()
    if not lines:
        raise InvalidInputError("empty vocabulary file")
    header = dict(
        part.split("=", 1) for part in lines[0].split() if "=" in part
    )
    if header.get("scheme") != SCHEME_BMES or "k" not in header:
        raise InvalidInputError(f"malformed vocabulary header: {lines[0]!r}")
    names = [ln.strip() for ln in lines[1:] if ln.strip()]
    if len(names) != int(header["k"]):
        raise InvalidInputError(
            f"vocabulary lists {len(names)} labels but header says k={header['k']}"
        )
    parsed = [Label.parse(n) for n in names]
    types: list[str] = []
    for lab in parsed:
        if lab.tag is PositionTag.B and lab.entity_type not in types:
            types.append(lab.entity_type)
    rebuilt = build_label_set(types)
    if [lab.name for lab in rebuilt.labels] != names:
        raise InvalidInputError("vocabulary file does not follow canonical ordering")
    return rebuilt
