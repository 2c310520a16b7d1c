"""Command-line interface.

Exit codes: 0 success, 2 I/O or invalid input, 3 numerical failure,
4 checkpoint/vocabulary incompatibility.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import advisor as adv
from . import checkpoint as ck
from . import corpus as cp
from . import crf as crf_mod
from . import emission as em
from . import labelspace as ls
from . import pipeline
from .decode import read_logits_jsonl
from .errors import CompatibilityError, InvalidInputError, NumericalFailureError

EXIT_OK = 0
EXIT_IO = 2
EXIT_NUMERICAL = 3
EXIT_COMPAT = 4

DEFAULT_SEED = 0


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--dim", type=int, default=2**18, help="feature-hash dimension")
    p.add_argument("--window", type=int, default=2, help="context window radius")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lctag", description="Constrained BMES sequence-labeling toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="split text into sentences")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--profile", choices=sorted(cp.PROFILES), default="c")

    p = sub.add_parser("train", help="train an emission (and optionally CRF) model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True, help="label vocabulary file")
    p.add_argument("--arm", choices=pipeline.ARMS, default="lc")
    p.add_argument("--checkpoint", required=True, help="output checkpoint path")
    p.add_argument("--constraint-init", action="store_true")
    _add_train_flags(p)

    p = sub.add_parser("decode", help="decode a corpus into a predictions file")
    p.add_argument("--labels", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--arm", choices=pipeline.ARMS, default="lc")
    p.add_argument("--checkpoint", help="model checkpoint (runs the emission model)")
    p.add_argument("--logits", help="pre-computed JSON-lines logits file")
    p.add_argument("--output", required=True)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("score", help="entity-level P/R/F1 of predictions vs gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--output", help="write the JSON report here (default stdout)")

    p = sub.add_parser("grid", help="run the four-arm benchmark grid")
    p.add_argument("--corpus", help="two-column corpus file")
    p.add_argument("--labels", help="label vocabulary file (with --corpus)")
    p.add_argument("--synth", help="generator spec, e.g. types=6,sentences=3000,noise=0.3")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output", help="write the JSON table here (default stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=5.0)
    p.add_argument("--dim", type=int, default=2**16)

    p = sub.add_parser("advise", help="model-selection recommendation")
    p.add_argument("-L", "--labels-count", type=int, required=True)
    p.add_argument("-N", "--sentences", type=int, required=True)
    p.add_argument("--alpha", type=float, default=adv.DEFAULT_PARAMS.alpha)
    p.add_argument("--beta", type=float, default=adv.DEFAULT_PARAMS.beta)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--types", type=int, required=True)
    p.add_argument("--sentences", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output", required=True)
    p.add_argument("--labels-out", help="also write the label vocabulary here")
    return parser


def _parse_synth_spec(text: str) -> cp.SynthSpec:
    fields = {}
    for part in text.split(","):
        if "=" not in part:
            raise InvalidInputError(f"malformed synth spec item: {part!r}")
        key, value = part.split("=", 1)
        fields[key.strip()] = value.strip()
    types = int(fields.pop("types", 6))
    sentences = int(fields.pop("sentences", 3000))
    noise = float(fields.pop("noise", 0.0))
    if fields:
        raise InvalidInputError(f"unknown synth spec keys: {sorted(fields)}")
    return cp.SynthSpec(
        entity_types=[f"T{i + 1}" for i in range(types)],
        n_sentences=sentences,
        noise_rate=noise,
    )


def _cmd_segment(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        text = fh.read()
    segments = cp.segment(text.rstrip("\n"), cp.PROFILES[args.profile])
    with open(args.output, "w", encoding="utf-8") as fh:
        for seg in segments:
            fh.write(seg + "\n")
    return EXIT_OK


def _cmd_train(args) -> int:
    labels = ls.read_vocab(args.labels)
    sentences = cp.read_corpus(args.corpus, labels)
    enc = em.FeatureEncoder(dim=args.dim, window=args.window, seed=args.seed)
    encoded = pipeline.encode_corpus(sentences, enc)
    if args.arm in ("crf", "crf+lc"):
        result = crf_mod.train_crf(
            encoded,
            labels,
            enc,
            crf_mod.CrfTrainConfig(
                epochs=args.epochs,
                learning_rate=args.learning_rate,
                batch_size=args.batch_size,
                seed=args.seed,
                constraint_init=args.constraint_init,
            ),
        )
        proj, losses, params = result.projection, result.epoch_losses, result.params
    else:
        proj, losses = em.train_emission(
            encoded,
            labels,
            enc,
            em.EmissionTrainConfig(
                epochs=args.epochs,
                learning_rate=args.learning_rate,
                batch_size=args.batch_size,
                seed=args.seed,
            ),
        )
        params = None
    for epoch, loss in enumerate(losses, start=1):
        print(f"epoch {epoch}: loss {loss:.6f}")
    preds = [
        pipeline.decode_arm(
            em.project(feats, proj),
            "baseline",
            labels,
            ls.build_constraint_matrix(labels),
            params,
        )
        for feats, _ in encoded
    ]
    correct = sum(
        sum(p == g for p, g in zip(pred.indices, gold))
        for pred, (_, gold) in zip(preds, encoded)
    )
    total = sum(len(gold) for _, gold in encoded)
    print(f"final token accuracy: {correct / total:.4f}")
    ck.save_checkpoint(
        ck.Checkpoint(labels.vocab_hash(), enc, proj, params), args.checkpoint
    )
    return EXIT_OK


def _cmd_decode(args) -> int:
    labels = ls.read_vocab(args.labels)
    sentences = cp.read_corpus(args.corpus, labels)
    cm = ls.build_constraint_matrix(labels)
    params = None
    if args.checkpoint:
        ckpt = ck.load_checkpoint(args.checkpoint)
        ck.check_vocab_compatibility(ckpt, labels)
        logits_list = [
            em.project(em.encode(s.tokens, ckpt.encoder), ckpt.projection)
            for s in sentences
        ]
        params = ckpt.crf_params
    elif args.logits:
        records = read_logits_jsonl(args.logits, labels.k)
        if len(records) != len(sentences):
            raise InvalidInputError(
                "logits file and corpus have different sentence counts"
            )
        for (tokens, logits), sent in zip(records, sentences):
            if len(tokens) != len(sent.tokens):
                raise InvalidInputError("logits tokens do not match corpus tokens")
        logits_list = [logits for _, logits in records]
    else:
        raise InvalidInputError("decode requires --checkpoint or --logits")
    if args.arm in ("crf", "crf+lc") and params is None:
        raise InvalidInputError(f"arm {args.arm!r} requires a CRF checkpoint")
    preds = pipeline.decode_sentences(
        logits_list, args.arm, labels, cm, params, threads=args.threads
    )
    out = [cp.Sentence(s.tokens, pred) for s, pred in zip(sentences, preds)]
    cp.write_corpus(out, args.output)
    return EXIT_OK


def _cmd_score(args) -> int:
    labels = ls.read_vocab(args.labels)
    gold = cp.read_corpus(args.gold, labels)
    pred = cp.read_corpus(args.pred, labels)
    report = cp.score(gold, [s.gold for s in pred])
    text = json.dumps(report.to_dict(), indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _cmd_grid(args) -> int:
    if bool(args.corpus) == bool(args.synth):
        raise InvalidInputError("grid requires exactly one of --corpus or --synth")
    if args.corpus:
        if not args.labels:
            raise InvalidInputError("--corpus requires --labels")
        labels = ls.read_vocab(args.labels)
        sentences = cp.read_corpus(args.corpus, labels)
    else:
        spec = _parse_synth_spec(args.synth)
        sentences, labels = cp.synth_corpus(spec, args.seed)
    config = pipeline.GridConfig(
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        encoder=em.FeatureEncoder(dim=args.dim),
        threads=args.threads,
    )
    result = pipeline.run_grid(sentences, labels, args.seed, config)
    text = json.dumps(result.to_dict(), indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _cmd_advise(args) -> int:
    profile = adv.DatasetProfile(args.labels_count, args.sentences)
    params = adv.AdvisorParams(args.alpha, args.beta)
    print(
        json.dumps(
            {
                "recommendation": adv.recommend(profile, params).value,
                "threshold": adv.data_threshold(profile, params),
            }
        )
    )
    return EXIT_OK


def _cmd_synth(args) -> int:
    spec = cp.SynthSpec(
        entity_types=[f"T{i + 1}" for i in range(args.types)],
        n_sentences=args.sentences,
        noise_rate=args.noise,
    )
    sentences, labels = cp.synth_corpus(spec, args.seed)
    cp.write_corpus(sentences, args.output)
    if args.labels_out:
        ls.write_vocab(labels, args.labels_out)
    return EXIT_OK


_HANDLERS = {
    "segment": _cmd_segment,
    "train": _cmd_train,
    "decode": _cmd_decode,
    "score": _cmd_score,
    "grid": _cmd_grid,
    "advise": _cmd_advise,
    "synth": _cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except CompatibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPAT
    except NumericalFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InvalidInputError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
