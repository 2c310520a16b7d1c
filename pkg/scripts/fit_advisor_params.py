#!/usr/bin/env python3
"""Fit the model-selection advisor's (alpha, beta) weighting parameters to a
set of F1-residual observations by projected gradient descent and print the
optimization trajectory.

Observations can be supplied as a JSON file of
[{"delta": float, "L": int, "N": int}, ...]; without --observations a small
synthetic set is generated from the default power law plus noise.

Example:
    python3 scripts/fit_advisor_params.py --steps 200 --learning-rate 0.05
"""

import argparse
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from lctag.advisor import (
    DEFAULT_BOX,
    DEFAULT_PARAMS,
    AdvisorParams,
    DatasetProfile,
    Observation,
    fit,
)


def synthetic_observations(seed: int, count: int = 8) -> list[Observation]:
    rng = random.Random(seed)
    obs = []
    for _ in range(count):
        profile = DatasetProfile(rng.randint(5, 40), rng.randint(500, 20_000))
        weight = pow(2.718281828, -DEFAULT_PARAMS.alpha * profile.sentence_count
                     / profile.label_count**DEFAULT_PARAMS.beta)
        obs.append(Observation(0.05 * weight + rng.gauss(0, 0.005), profile))
    return obs


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--observations", help="JSON file of residuals")
    parser.add_argument("--init-alpha", type=float, default=0.5)
    parser.add_argument("--init-beta", type=float, default=2.0)
    parser.add_argument("--steps", type=int, default=100)
    parser.add_argument("--learning-rate", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    if args.observations:
        raw = json.loads(Path(args.observations).read_text("utf-8"))
        obs = [
            Observation(item["delta"], DatasetProfile(item["L"], item["N"]))
            for item in raw
        ]
    else:
        obs = synthetic_observations(args.seed)
    init = AdvisorParams(args.init_alpha, args.init_beta)
    result = fit(obs, init, DEFAULT_BOX, steps=args.steps,
                 learning_rate=args.learning_rate)
    for i, (alpha, beta, value) in enumerate(result.trajectory):
        print(f"step {i:4d}: alpha={alpha:.4f} beta={beta:.4f} "
              f"objective={value:.6f}")
    print(f"final: alpha={result.params.alpha:.4f} beta={result.params.beta:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
