"""Shared fixtures and independent brute-force oracles.

The oracles enumerate every path explicitly (no dynamic programming) so
they stay independent of the implementations they check.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from lctag.labelspace import ConstraintMatrix, LabelSet, build_constraint_matrix, build_label_set


@pytest.fixture
def labels1() -> LabelSet:
    return build_label_set(["PER"])


@pytest.fixture
def labels2() -> LabelSet:
    return build_label_set(["PER", "LOC"])


@pytest.fixture
def cm1(labels1) -> ConstraintMatrix:
    return build_constraint_matrix(labels1)


@pytest.fixture
def cm2(labels2) -> ConstraintMatrix:
    return build_constraint_matrix(labels2)


def enumerate_paths(n: int, k: int) -> np.ndarray:
    """All k^n index sequences as an (k^n, n) array."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*([np.arange(k)] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def brute_force_path_scores(
    scores: np.ndarray,
    transitions: np.ndarray | None = None,
    start_scores: np.ndarray | None = None,
    end_scores: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(paths, total score per path) by explicit enumeration."""
    n, k = scores.shape
    paths = enumerate_paths(n, k)
    totals = scores[np.arange(n)[None, :], paths].sum(axis=1).astype(float)
    if transitions is not None and n > 1:
        totals += transitions[paths[:, :-1], paths[:, 1:]].sum(axis=1)
    if start_scores is not None:
        totals += start_scores[paths[:, 0]]
    if end_scores is not None:
        totals += end_scores[paths[:, -1]]
    return paths, totals


def brute_force_viterbi_max(
    scores: np.ndarray,
    cm: ConstraintMatrix,
    transitions: np.ndarray | None = None,
    start_scores: np.ndarray | None = None,
    end_scores: np.ndarray | None = None,
) -> float:
    """Max total score over all constraint-valid paths, by enumeration."""
    n, _ = scores.shape
    paths, totals = brute_force_path_scores(scores, transitions, start_scores, end_scores)
    valid = cm.start_allow[paths[:, 0]] & cm.end_allow[paths[:, -1]]
    if n > 1:
        valid &= cm.allow[paths[:, :-1], paths[:, 1:]].all(axis=1)
    assert valid.any(), "constraint matrix admits no path"
    return float(totals[valid].max())


def brute_force_log_partition(
    scores: np.ndarray,
    transitions: np.ndarray,
    start_scores: np.ndarray,
    end_scores: np.ndarray,
) -> float:
    """log sum of exp(path score) over every path, by enumeration."""
    _, totals = brute_force_path_scores(scores, transitions, start_scores, end_scores)
    m = totals.max()
    return float(m + np.log(np.exp(totals - m).sum()))
