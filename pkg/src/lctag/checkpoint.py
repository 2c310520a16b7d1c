"""Versioned JSON checkpoint for trained models.

Holds the label-vocabulary hash, the feature-encoder settings, the emission
projection (non-zero weight columns only), and optional CRF parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .crf import CrfParams
from .emission import FeatureEncoder, LinearProjection
from .errors import CompatibilityError, InvalidInputError
from .labelspace import LabelSet

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    vocab_hash: str
    encoder: FeatureEncoder
    projection: LinearProjection
    crf_params: CrfParams | None = None

    @property
    def k(self) -> int:
        return self.projection.k


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    w = ckpt.projection.weights
    nonzero_cols = np.flatnonzero(np.any(w != 0.0, axis=0))
    obj = {
        "version": FORMAT_VERSION,
        "k": ckpt.k,
        "vocab_hash": ckpt.vocab_hash,
        "encoder": {
            "dim": ckpt.encoder.dim,
            "window": ckpt.encoder.window,
            "seed": ckpt.encoder.seed,
        },
        "emission": {
            "columns": nonzero_cols.tolist(),
            "weights": w[:, nonzero_cols].tolist(),
            "bias": ckpt.projection.bias.tolist(),
        },
    }
    if ckpt.crf_params is not None:
        obj["crf"] = {
            "transitions": ckpt.crf_params.transitions.tolist(),
            "start_scores": ckpt.crf_params.start_scores.tolist(),
            "end_scores": ckpt.crf_params.end_scores.tolist(),
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("version") != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported checkpoint version: {obj.get('version')}")
    enc = FeatureEncoder(**obj["encoder"])
    k = int(obj["k"])
    weights = np.zeros((k, enc.dim))
    cols = np.asarray(obj["emission"]["columns"], dtype=np.int64)
    if len(cols):
        weights[:, cols] = np.asarray(obj["emission"]["weights"], dtype=np.float64)
    proj = LinearProjection(weights, np.asarray(obj["emission"]["bias"]))
    crf_params = None
    if "crf" in obj:
        crf_params = CrfParams(
            np.asarray(obj["crf"]["transitions"]),
            np.asarray(obj["crf"]["start_scores"]),
            np.asarray(obj["crf"]["end_scores"]),
        )
    return Checkpoint(obj["vocab_hash"], enc, proj, crf_params)


def check_vocab_compatibility(ckpt: Checkpoint, labels: LabelSet) -> None:
    if ckpt.vocab_hash != labels.vocab_hash():
        raise CompatibilityError(
            "checkpoint was trained against a different label vocabulary"
        )
