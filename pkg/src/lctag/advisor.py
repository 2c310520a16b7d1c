"""Model-selection advisor: the Gamma(L, N) decision rule, the weighted
residual objective it was fitted with, and the BiLSTM degradation ratio.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InvalidInputError, NumericalFailureError


@dataclass(frozen=True)
class DatasetProfile:
    label_count: int  # full label vocabulary size, O included
    sentence_count: int

    def __post_init__(self):
        if self.label_count < 2:
            raise InvalidInputError("label_count must be >= 2")
        if self.sentence_count < 1:
            raise InvalidInputError("sentence_count must be >= 1")


@dataclass(frozen=True)
class AdvisorParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidInputError("alpha and beta must be positive")


DEFAULT_PARAMS = AdvisorParams(alpha=0.16, beta=2.8)

LABEL_COUNT_CUTOFF = 20


class Recommendation(enum.Enum):
    LC_ONLY = "lc_only"
    CRF_PLUS_LC = "crf_plus_lc"


def data_threshold(profile: DatasetProfile, params: AdvisorParams = DEFAULT_PARAMS) -> float:
    """Sentence count above which an LC-only model is preferred: alpha * L^beta."""
    return params.alpha * profile.label_count**params.beta


def recommend(
    profile: DatasetProfile, params: AdvisorParams = DEFAULT_PARAMS
) -> Recommendation:
    """LC_ONLY iff L >= 20 and N strictly exceeds alpha * L^beta; CRF+LC otherwise."""
    if (
        profile.label_count >= LABEL_COUNT_CUTOFF
        and profile.sentence_count > data_threshold(profile, params)
    ):
        return Recommendation.LC_ONLY
    return Recommendation.CRF_PLUS_LC


@dataclass(frozen=True)
class Observation:
    """An F1 residual (best minus predicted) for one dataset profile."""

    delta: float
    profile: DatasetProfile

    def __post_init__(self):
        if not math.isfinite(self.delta):
            raise InvalidInputError("delta must be finite")


def objective_and_gradient(
    observations: list[Observation], params: AdvisorParams
) -> tuple[float, float, float]:
    """Weighted squared-residual objective

        V = sum_i delta_i^2 * exp(-alpha * N_i / L_i^beta)

    and its analytic gradient (dV/dalpha, dV/dbeta).
    """
    if not observations:
        raise InvalidInputError("observations must be non-empty")
    value = 0.0
    d_alpha = 0.0
    d_beta = 0.0
    for obs in observations:
        ratio = obs.profile.sentence_count / obs.profile.label_count**params.beta
        w = math.exp(-params.alpha * ratio)
        term = obs.delta**2 * w
        value += term
        d_alpha += term * (-ratio)
        d_beta += term * params.alpha * ratio * math.log(obs.profile.label_count)
    return value, d_alpha, d_beta


Box = tuple[tuple[float, float], tuple[float, float]]
DEFAULT_BOX: Box = ((0.01, 1.0), (1.0, 4.0))


@dataclass
class FitResult:
    params: AdvisorParams
    trajectory: list[tuple[float, float, float]]  # (alpha, beta, objective)


def fit(
    observations: list[Observation],
    init: AdvisorParams = DEFAULT_PARAMS,
    box: Box = DEFAULT_BOX,
    steps: int = 200,
    learning_rate: float = 0.01,
) -> FitResult:
    """Projected gradient descent on the weighted objective.

    Steps that would increase the objective are retried with a halved step
    size, so the objective is non-increasing across accepted iterates.
    """
    (a_lo, a_hi), (b_lo, b_hi) = box
    if a_lo > a_hi or b_lo > b_hi:
        raise InvalidInputError("box bounds are empty")
    if not (a_lo <= init.alpha <= a_hi and b_lo <= init.beta <= b_hi):
        raise InvalidInputError("init must lie inside the box")
    alpha, beta = init.alpha, init.beta
    value, d_alpha, d_beta = objective_and_gradient(observations, AdvisorParams(alpha, beta))
    if not math.isfinite(value):
        raise NumericalFailureError("objective is non-finite at init")
    trajectory = [(alpha, beta, value)]
    lr = learning_rate
    for _ in range(steps):
        cand_a = min(max(alpha - lr * d_alpha, a_lo), a_hi)
        cand_b = min(max(beta - lr * d_beta, b_lo), b_hi)
        if (cand_a, cand_b) == (alpha, beta):
            break
        cand_v, cand_da, cand_db = objective_and_gradient(
            observations, AdvisorParams(cand_a, cand_b)
        )
        if not math.isfinite(cand_v):
            raise NumericalFailureError("objective became non-finite")
        if cand_v > value:
            lr /= 2.0
            continue
        alpha, beta, value = cand_a, cand_b, cand_v
        d_alpha, d_beta = cand_da, cand_db
        trajectory.append((alpha, beta, value))
    return FitResult(AdvisorParams(alpha, beta), trajectory)


def bilstm_degradation_ratio(p1: DatasetProfile, p2: DatasetProfile) -> float:
    """Relative BiLSTM damage between two profiles: (L1/L2)^1.7 * (N1/N2)^0.6."""
    return (p1.label_count / p2.label_count) ** 1.7 * (
        p1.sentence_count / p2.sentence_count
    ) ** 0.6
