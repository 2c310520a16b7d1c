#!/usr/bin/env python3
"""Measure how each decoder arm's F1 scales with corpus size on the synthetic
noisy-boundary benchmark (same generator, growing sentence count).

Example:
    python3 scripts/dataset_expansion.py --sizes 1000 3000 10000 --seed 0
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from lctag.corpus import SynthSpec, synth_corpus
from lctag.emission import FeatureEncoder
from lctag.pipeline import ARMS, GridConfig, run_grid


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--types", type=int, default=6)
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[1000, 3000, 10_000])
    parser.add_argument("--noise", type=float, default=0.3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=5)
    parser.add_argument("--learning-rate", type=float, default=5.0)
    parser.add_argument("--dim", type=int, default=2**16)
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    config = GridConfig(
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        encoder=FeatureEncoder(dim=args.dim),
    )
    print("sentences  " + "  ".join(f"{arm:>9}" for arm in ARMS))
    for size in args.sizes:
        spec = SynthSpec(
            entity_types=[f"T{i + 1}" for i in range(args.types)],
            n_sentences=size,
            noise_rate=args.noise,
        )
        sentences, labels = synth_corpus(spec, seed=args.seed)
        f1 = run_grid(sentences, labels, seed=args.seed, config=config).f1
        print(f"{size:>9}  " + "  ".join(f"{f1[arm]:>9.4f}" for arm in ARMS))
    return 0


if __name__ == "__main__":
    sys.exit(main())
