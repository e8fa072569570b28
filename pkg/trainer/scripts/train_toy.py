#!/usr/bin/env python3
"""Train the coefficient predictor on a synthetic toy set and report the gain.

Without --dataset the script synthesizes its own paired clips: harmonic
voiced sweeps for speech, recursively filtered noise, mixed at a fixed SNR
in the mixer's on-disk layout (noisy/, clean/, manifest.jsonl).  Training
then overfits that set and the summary reports the training-set SI-SDR
improvement measured through the differentiable replica.  Desk-scale only:
the point is a reproducible end-to-end run, not a deployable model.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
from scipy.io import wavfile

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from clctrain.train import TrainConfig, evaluate_si_sdr_gain, train
from clctrain.weights_io import import_model

RATE = 16000


def synth_voice(rng, seconds):
    n = int(seconds * RATE)
    t = np.arange(n) / RATE
    f0 = 130.0 + 60.0 * np.sin(2 * np.pi * 0.7 * t + rng.uniform(0, 2 * np.pi))
    phase = 2 * np.pi * np.cumsum(f0) / RATE
    x = np.zeros(n)
    for k in range(1, 6):
        x += np.sin(k * phase + rng.uniform(0, 2 * np.pi)) / k
    envelope = 0.4 + 0.6 * np.abs(np.sin(2 * np.pi * 1.3 * t + rng.uniform(0, np.pi)))
    return (x * envelope).astype(np.float64)


def synth_noise(rng, n, tilt):
    white = rng.standard_normal(n + 1)
    out = np.empty(n)
    state = 0.0
    for i in range(n):
        state = tilt * state + (1.0 - tilt) * white[i]
        out[i] = state
    return out


def write_pcm16(path, x):
    scaled = np.clip(np.rint(x * 32768.0), -32768, 32767).astype(np.int16)
    wavfile.write(path, RATE, scaled)


def build_dataset(root: Path, pairs: int, seconds: float, snr_db: float, seed: int):
    rng = np.random.default_rng(seed)
    (root / "noisy").mkdir(parents=True, exist_ok=True)
    (root / "clean").mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(pairs):
        clean = synth_voice(rng, seconds)
        noise = synth_noise(rng, len(clean), tilt=rng.uniform(0.0, 0.95))
        noise *= np.sqrt(np.mean(clean**2) / np.mean(noise**2)) * 10 ** (-snr_db / 20)
        noisy = clean + noise
        scale = 0.89 / max(np.max(np.abs(noisy)), np.max(np.abs(clean)), 1e-9)
        cid = f"pair{i:03d}"
        write_pcm16(root / "noisy" / f"{cid}.wav", noisy * scale)
        write_pcm16(root / "clean" / f"{cid}.wav", clean * scale)
        rows.append({"id": cid, "snr_db": snr_db})
    with open(root / "manifest.jsonl", "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workdir", type=Path, default=Path("toy_run"))
    parser.add_argument("--dataset", type=Path, help="existing mixer-format dir; skips synthesis")
    parser.add_argument("--pairs", type=int, default=20)
    parser.add_argument("--seconds", type=float, default=2.0)
    parser.add_argument("--snr-db", type=float, default=0.0)
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if args.dataset is None:
        dataset = args.workdir / "dataset"
        build_dataset(dataset, args.pairs, args.seconds, args.snr_db, args.seed + 100)
    else:
        dataset = args.dataset

    out = args.workdir / "toy_model.clcw"
    out.parent.mkdir(parents=True, exist_ok=True)
    config = TrainConfig(epochs=args.epochs, seed=args.seed)
    started = time.monotonic()
    history = train(config, dataset, out)
    elapsed = time.monotonic() - started

    model, settings = import_model(out)
    gain = evaluate_si_sdr_gain(model, dataset, settings)
    print(
        json.dumps(
            {
                "dataset": str(dataset),
                "model": str(out),
                "epochs": args.epochs,
                "seconds_elapsed": round(elapsed, 1),
                "start_loss": history[0],
                "final_loss": history[-1],
                "si_sdr_gain_db": round(gain, 2),
            },
            indent=2,
        )
    )


if __name__ == "__main__":
    main()
