import json

import numpy as np
import pytest
import torch
from scipy.io import wavfile

from clctrain import CoeffNet, NetDims

RATE = 16000


def synth_voice(rng, seconds):
    """Harmonic tone with pitch drift and an amplitude envelope."""
    n = int(seconds * RATE)
    t = np.arange(n) / RATE
    f0 = rng.uniform(110, 220) * (1.0 + 0.05 * np.sin(2 * np.pi * rng.uniform(0.2, 0.5) * t))
    phase = 2 * np.pi * np.cumsum(f0) / RATE
    x = np.zeros(n)
    for k in range(1, 6):
        x += rng.uniform(0.2, 1.0) / k * np.sin(k * phase + rng.uniform(0, 2 * np.pi))
    x *= 0.55 + 0.45 * np.sin(2 * np.pi * rng.uniform(2.0, 4.0) * t + rng.uniform(0, 2 * np.pi))
    return 0.4 * x / np.max(np.abs(x))


def synth_noise(rng, n, tilt):
    white = rng.standard_normal(n)
    shaped = np.empty(n)
    acc = 0.0
    for i in range(n):
        acc = tilt * acc + (1.0 - tilt) * white[i]
        shaped[i] = acc
    return shaped


def write_pcm16(path, x):
    q = np.clip(np.rint(np.asarray(x) * 32768.0), -32768, 32767).astype(np.int16)
    wavfile.write(path, RATE, q)


def build_pair_set(root, pairs, seconds, snr_db, seed):
    """Write a mixer-format dataset: noisy/, clean/, manifest.jsonl."""
    rng = np.random.default_rng(seed)
    (root / "noisy").mkdir(parents=True)
    (root / "clean").mkdir(parents=True)
    rows = []
    for i in range(pairs):
        clean = synth_voice(rng, seconds)
        noise = synth_noise(rng, len(clean), tilt=(0.0, 0.9, 0.98)[i % 3])
        scale = np.sqrt(np.mean(clean**2) / (np.mean(noise**2) * 10 ** (snr_db / 10)))
        noisy = clean + scale * noise
        peak = np.max(np.abs(noisy))
        if peak > 1.0:
            clean = clean / peak
            noisy = noisy / peak
        clip_id = f"{i:05d}_toy"
        write_pcm16(root / "noisy" / f"{clip_id}.wav", noisy)
        write_pcm16(root / "clean" / f"{clip_id}.wav", clean)
        rows.append({"id": clip_id, "snr_db": snr_db})
    with (root / "manifest.jsonl").open("w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return root


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy") / "mixed"
    return build_pair_set(root, pairs=20, seconds=2.0, snr_db=0, seed=11)


TINY_DIMS = NetDims(n_bins=8, clc_order=2, hidden=4, gru_layers=2)


def make_folded(dims=TINY_DIMS, seed=1):
    """Random folded model with non-trivial batch norm statistics."""
    torch.manual_seed(seed)
    model = CoeffNet(dims)
    with torch.no_grad():
        model.norm.running_mean.uniform_(-0.5, 0.5)
        model.norm.running_var.uniform_(0.5, 2.0)
        model.norm.weight.uniform_(0.5, 1.5)
        model.norm.bias.uniform_(-0.3, 0.3)
    return model.fold()
