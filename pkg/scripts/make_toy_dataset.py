#!/usr/bin/env python3
"""Synthesize a small noisy/clean pair set without any external corpora.

Speech stand-ins are harmonic tones with slow pitch and amplitude drift;
noises are filtered randomness with distinct spectral tilts.  Good enough to
exercise the mixer, the eval workflow, and toy-scale training.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from clcdenoise import MixSpec, build_testset
from clcdenoise.wavio import write_wav_pcm16

RATE = 16000


def synth_speech(rng, seconds):
    """Harmonic tone with drifting f0 and a syllable-ish amplitude envelope."""
    n = int(seconds * RATE)
    t = np.arange(n) / RATE
    f0 = rng.uniform(110, 220) * (1.0 + 0.05 * np.sin(2 * np.pi * rng.uniform(0.2, 0.5) * t))
    phase = 2 * np.pi * np.cumsum(f0) / RATE
    x = np.zeros(n)
    for k in range(1, 6):
        x += rng.uniform(0.2, 1.0) / k * np.sin(k * phase + rng.uniform(0, 2 * np.pi))
    envelope = 0.55 + 0.45 * np.sin(2 * np.pi * rng.uniform(2.0, 4.0) * t + rng.uniform(0, 2 * np.pi))
    x *= envelope
    return 0.4 * x / np.max(np.abs(x))


def synth_noise(rng, seconds, tilt):
    """Gaussian noise shaped by a first-order recursive filter; tilt in [0,1)."""
    n = int(seconds * RATE)
    white = rng.standard_normal(n)
    shaped = np.empty(n)
    acc = 0.0
    for i in range(n):
        acc = tilt * acc + (1.0 - tilt) * white[i]
        shaped[i] = acc
    return 0.3 * shaped / np.max(np.abs(shaped))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out", type=Path, help="output root directory")
    parser.add_argument("--pairs", type=int, default=20)
    parser.add_argument("--seconds", type=float, default=2.0)
    parser.add_argument("--snr-db", type=int, default=0, choices=(-5, 0, 5, 10, 20, 40))
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    speech_dir = args.out / "speech"
    noise_dir = args.out / "noise"
    speech_dir.mkdir(parents=True, exist_ok=True)
    noise_dir.mkdir(parents=True, exist_ok=True)

    speech_ids = []
    for i in range(args.pairs):
        sid = f"sp{i:03d}"
        write_wav_pcm16(speech_dir / f"{sid}.wav", synth_speech(rng, args.seconds), RATE)
        speech_ids.append(sid)
    noise_ids = []
    for i, tilt in enumerate((0.0, 0.9, 0.98)):
        nid = f"nz{i:03d}"
        write_wav_pcm16(noise_dir / f"{nid}.wav", synth_noise(rng, args.seconds + 1.0, tilt), RATE)
        noise_ids.append(nid)

    specs = [
        MixSpec(
            speech_id=sid,
            noise_ids=[noise_ids[i % len(noise_ids)]],
            snr_db=args.snr_db,
            gain_db=0,
            seed=args.seed * 1000 + i,
        )
        for i, sid in enumerate(speech_ids)
    ]
    manifest_in = args.out / "recipe.jsonl"
    with manifest_in.open("w") as fh:
        for spec in specs:
            fh.write(
                json.dumps(
                    {
                        "speech_id": spec.speech_id,
                        "noise_ids": spec.noise_ids,
                        "snr_db": spec.snr_db,
                        "gain_db": spec.gain_db,
                        "seed": spec.seed,
                    },
                    sort_keys=True,
                )
                + "\n"
            )

    rows = build_testset(specs, speech_dir, noise_dir, args.out / "mixed")
    snrs = [row["achieved_snr_db"] for row in rows]
    print(
        f"wrote {len(rows)} pairs to {args.out / 'mixed'} "
        f"(achieved SNR {min(snrs):.2f}..{max(snrs):.2f} dB), recipe at {manifest_in}"
    )


if __name__ == "__main__":
    main()
