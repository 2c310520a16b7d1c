"""End-to-end training/decoding/scoring used by the CLI and the benchmark
grid: the four decoder arms (baseline, lc, crf, crf+lc) over one corpus.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import corpus as cp
from . import crf as crf_mod
from . import emission as em
from .decode import LabelSequence, LogitsSequence, argmax_decode, lc_decode
from .errors import InvalidInputError
from .labelspace import ConstraintMatrix, LabelSet, build_constraint_matrix

ARMS = ("baseline", "lc", "crf", "crf+lc")


@dataclass
class GridConfig:
    epochs: int = 5
    learning_rate: float = 5.0
    batch_size: int = 8
    encoder: em.FeatureEncoder = field(
        default_factory=lambda: em.FeatureEncoder(dim=2**16)
    )
    test_fraction: float = 0.2
    threads: int = 1


def encode_corpus(
    sentences: list[cp.Sentence], enc: em.FeatureEncoder
) -> list[tuple[list[em.FeatureVector], list[int]]]:
    out = []
    for sent in sentences:
        if sent.gold is None:
            raise InvalidInputError("training sentences need gold labels")
        out.append((em.pack_features(em.encode(sent.tokens, enc)), sent.gold.indices))
    return out


def decode_arm(
    logits: LogitsSequence,
    arm: str,
    labels: LabelSet,
    cm: ConstraintMatrix,
    params: crf_mod.CrfParams | None = None,
) -> LabelSequence:
    if arm == "baseline":
        return argmax_decode(logits, labels)
    if arm == "lc":
        return lc_decode(logits, cm)
    if arm in ("crf", "crf+lc"):
        if params is None:
            raise InvalidInputError(f"arm {arm!r} requires CRF parameters")
        return crf_mod.crf_decode(
            logits, params, labels, cm=cm if arm == "crf+lc" else None
        )
    raise InvalidInputError(f"unknown decoder arm: {arm!r}")


def decode_sentences(
    logits_list: list[LogitsSequence],
    arm: str,
    labels: LabelSet,
    cm: ConstraintMatrix,
    params: crf_mod.CrfParams | None = None,
    threads: int = 1,
) -> list[LabelSequence]:
    """Decode each sentence independently; output order matches input order."""
    def one(logits: LogitsSequence) -> LabelSequence:
        return decode_arm(logits, arm, labels, cm, params)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, logits_list))
    return [one(lg) for lg in logits_list]


@dataclass
class GridResult:
    seed: int
    f1: dict[str, float]
    reports: dict[str, cp.ScoreReport]

    def to_dict(self) -> dict:
        return {"seed": self.seed, "arms": {a: self.f1[a] for a in ARMS}}


def run_grid(
    sentences: list[cp.Sentence],
    labels: LabelSet,
    seed: int,
    config: GridConfig | None = None,
) -> GridResult:
    """Train on a split of the corpus and score all four arms on the rest."""
    config = config or GridConfig()
    if len(sentences) < 5:
        raise InvalidInputError("corpus too small for a train/test split")
    order = list(range(len(sentences)))
    random.Random(seed).shuffle(order)
    n_test = max(1, int(len(sentences) * config.test_fraction))
    test = [sentences[i] for i in order[:n_test]]
    train = [sentences[i] for i in order[n_test:]]

    cm = build_constraint_matrix(labels)
    enc = config.encoder
    train_enc = encode_corpus(train, enc)
    test_feats = [em.pack_features(em.encode(sent.tokens, enc)) for sent in test]

    proj, _ = em.train_emission(
        train_enc,
        labels,
        enc,
        em.EmissionTrainConfig(
            epochs=config.epochs,
            learning_rate=config.learning_rate,
            batch_size=config.batch_size,
            seed=seed,
        ),
    )
    crf_result = crf_mod.train_crf(
        train_enc,
        labels,
        enc,
        crf_mod.CrfTrainConfig(
            epochs=config.epochs,
            learning_rate=config.learning_rate,
            batch_size=config.batch_size,
            seed=seed,
        ),
    )

    emission_logits = [em.project(f, proj) for f in test_feats]
    crf_logits = [em.project(f, crf_result.projection) for f in test_feats]

    f1: dict[str, float] = {}
    reports: dict[str, cp.ScoreReport] = {}
    for arm in ARMS:
        if arm in ("baseline", "lc"):
            preds = decode_sentences(
                emission_logits, arm, labels, cm, threads=config.threads
            )
        else:
            preds = decode_sentences(
                crf_logits, arm, labels, cm, crf_result.params, threads=config.threads
            )
        report = cp.score(test, preds)
        f1[arm] = report.f1
        reports[arm] = report
    return GridResult(seed, f1, reports)
