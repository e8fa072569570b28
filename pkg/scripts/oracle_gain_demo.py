#!/usr/bin/env python3
"""Measure oracle enhancement gain: per-bin least-squares taps vs a plain mask.

For each noisy/clean pair the script computes, per frequency bin, the
least-squares optimal complex combination of the current and past noisy
frames against the clean frames, then resynthesizes.  Comparing tap count 1
(a plain complex mask) against a deeper history shows how much the extra
taps buy when speech and noise share bins.  These are oracle numbers: the
coefficients see the clean signal, so they bound what a predictor can do.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from clcdenoise import (
    StftAnalyzer,
    StftConfig,
    StftSynthesizer,
    history_matrix,
    ls_optimal,
    si_sdr,
)
from clcdenoise.wavio import read_wav


def oracle_enhance(noisy, clean, order):
    """Resynthesize noisy audio through per-bin LS-optimal coefficients."""
    cfg = StftConfig()
    pad = np.zeros(cfg.window_len - cfg.hop)
    noisy_spec = StftAnalyzer(cfg).process(np.concatenate([pad, noisy]))
    clean_spec = StftAnalyzer(cfg).process(np.concatenate([pad, clean]))
    enhanced = np.array(clean_spec)
    for f in range(noisy_spec.shape[1]):
        rows, valid = history_matrix(noisy_spec[:, f], order=order)
        coeffs = ls_optimal(rows, clean_spec[valid, f])
        enhanced[valid, f] = rows @ coeffs
    out = StftSynthesizer(cfg).process(enhanced)
    # drop the padding inserted before analysis, keep common length
    out = out[cfg.window_len - cfg.hop :]
    n = min(len(out), len(clean))
    return out[:n], clean[:n]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("dataset", type=Path, help="dir with noisy/ and clean/ wavs")
    parser.add_argument("--orders", type=int, nargs="+", default=[1, 5])
    parser.add_argument("--limit", type=int, default=10, help="max pairs to score")
    args = parser.parse_args()

    noisy_dir = args.dataset / "noisy"
    clean_dir = args.dataset / "clean"
    names = sorted(p.name for p in noisy_dir.glob("*.wav"))[: args.limit]
    if not names:
        raise SystemExit(f"no wav files under {noisy_dir}")

    per_order = {order: [] for order in args.orders}
    noisy_scores = []
    for name in names:
        noisy, _ = read_wav(noisy_dir / name)
        clean, _ = read_wav(clean_dir / name)
        n = min(len(noisy), len(clean))
        noisy, clean = noisy[:n], clean[:n]
        noisy_scores.append(si_sdr(noisy, clean))
        for order in args.orders:
            est, ref = oracle_enhance(noisy, clean, order)
            per_order[order].append(si_sdr(est, ref))

    summary = {
        "pairs": len(names),
        "noisy_si_sdr_db": round(float(np.mean(noisy_scores)), 2),
        "oracle": {
            str(order): round(float(np.mean(scores)), 2)
            for order, scores in per_order.items()
        },
    }
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
