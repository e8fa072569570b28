#!/usr/bin/env python3
"""Write a CLCW weight file with seeded random weights.

Random weights produce no useful denoising but exercise the full inference
path at the real model size, which is what the bench and streaming
equivalence workflows need.
"""

import argparse
from pathlib import Path

from clcdenoise import ModelConfig, StreamMeta, random_weights, save_weights


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out", type=Path, help="destination .clcw path")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--hidden", type=int, default=256)
    parser.add_argument("--order", type=int, default=5)
    parser.add_argument("--lookahead", type=int, default=0)
    args = parser.parse_args()

    config = ModelConfig(clc_order=args.order, hidden=args.hidden)
    meta = StreamMeta(clc_order=args.order, lookahead=args.lookahead)
    weights = random_weights(config, seed=args.seed, meta=meta)
    save_weights(args.out, weights)
    print(f"wrote {args.out} ({config.param_count()} parameters)")


if __name__ == "__main__":
    main()
