"""Bridge from token-classification models to the decoding toolkit's file
formats: runs a model over a two-column corpus and writes a JSON-lines
per-token logits file plus the matching label vocabulary file.
"""

from .exporter import (
    AlignmentError,
    ExportJob,
    ExportResult,
    Scorer,
    StubScorer,
    export,
    read_corpus_tokens,
    resolve_scorer,
    write_vocab_file,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "ExportJob",
    "ExportResult",
    "Scorer",
    "StubScorer",
    "export",
    "read_corpus_tokens",
    "resolve_scorer",
    "write_vocab_file",
]
