"""Command-line entry point: export per-token logits for a corpus."""

from __future__ import annotations

import argparse
import sys

from .exporter import AlignmentError, ExportJob, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logits-exporter",
        description="Run a token-classification model over a two-column "
        "corpus and write per-token logits (JSON lines) plus the label "
        "vocabulary file",
    )
    parser.add_argument(
        "--model", required=True,
        help="scorer identifier: stub://TYPE1,TYPE2 or a Hugging Face "
        "token-classification model name",
    )
    parser.add_argument("--corpus", required=True, help="two-column input file")
    parser.add_argument("--logits-out", required=True)
    parser.add_argument("--vocab-out", required=True)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--device", default="cpu")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        model=args.model,
        corpus_path=args.corpus,
        logits_path=args.logits_out,
        vocab_path=args.vocab_out,
        batch_size=args.batch_size,
        device=args.device,
    )
    try:
        result = export(job)
    except (AlignmentError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.sentences} sentences ({result.tokens} tokens)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
