#!/usr/bin/env python3
"""Regenerate the tiny golden fixtures under tests/fixtures/golden_tiny/.

The forward pass here is computed with scalar Python arithmetic (lists and
math.*) rather than the package's vectorized code, so the fixtures pin the
network semantics independently.  Weights are seeded, quantized to f32 by the
CLCW round trip, and the reference consumes exactly those f32 values.

Committed fixtures should only change when the network contract changes;
rerun with the same seed to verify reproducibility.
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

from clcdenoise import ModelConfig, StreamMeta, load_weights, random_weights, save_weights

SEED = 20240817
FRAMES = 6
CONFIG = ModelConfig(n_bins=8, clc_order=2, hidden=4, gru_layers=2)
META = StreamMeta(sample_rate=16000, fft_size=14, hop=3, n_bins=8, clc_order=2, lookahead=0)


def matvec_in_major(w, x):
    # w indexed [input][output]
    n_out = len(w[0])
    return [sum(w[i][j] * x[i] for i in range(len(x))) for j in range(n_out)]


def matvec_out_major(w, x):
    # w indexed [output][input]
    return [sum(w[r][c] * x[c] for c in range(len(x))) for r in range(len(w))]


def sigmoid(v):
    return 1.0 / (1.0 + math.exp(-v))


def gru_step(x, h, w_ih, w_hh, b_ih, b_hh):
    hid = len(h)
    gi = [a + b for a, b in zip(matvec_out_major(w_ih, x), b_ih)]
    gh = [a + b for a, b in zip(matvec_out_major(w_hh, h), b_hh)]
    out = []
    for u in range(hid):
        r = sigmoid(gi[u] + gh[u])
        z = sigmoid(gi[hid + u] + gh[hid + u])
        n = math.tanh(gi[2 * hid + u] + r * gh[2 * hid + u])
        out.append((1.0 - z) * n + z * h[u])
    return out


def reference_forward(weights, spectra):
    """Scalar-arithmetic forward pass over all frames.

    Returns per-stage activations keyed by file stem, everything as nested
    Python lists of floats.
    """
    fc_in_w = weights.fc_in_w.tolist()
    fc_in_b = weights.fc_in_b.tolist()
    bn_scale = weights.bn_scale.tolist()
    bn_bias = weights.bn_bias.tolist()
    fc_out_w = weights.fc_out_w.tolist()
    fc_out_b = weights.fc_out_b.tolist()
    layers = [
        (l.w_ih.tolist(), l.w_hh.tolist(), l.b_ih.tolist(), l.b_hh.tolist())
        for l in weights.gru
    ]
    hidden = [[0.0] * len(bn_scale) for _ in layers]

    stages = {"features": [], "affine_relu": [], "gru1": [], "gru2": [], "output_flat": [], "coeffs": []}
    F = CONFIG.n_bins
    for spec in spectra:
        feats = [spec[f].real for f in range(F)] + [spec[f].imag for f in range(F)]
        stages["features"].append(feats)
        pre = [a + b for a, b in zip(matvec_in_major(fc_in_w, feats), fc_in_b)]
        act = [max(0.0, s * v + b) for v, s, b in zip(pre, bn_scale, bn_bias)]
        stages["affine_relu"].append(act)
        x = act
        for idx, (w_ih, w_hh, b_ih, b_hh) in enumerate(layers):
            hidden[idx] = gru_step(x, hidden[idx], w_ih, w_hh, b_ih, b_hh)
            x = hidden[idx]
            stages[f"gru{idx + 1}"].append(list(x))
        flat = [
            math.tanh(a + b) for a, b in zip(matvec_in_major(fc_out_w, x), fc_out_b)
        ]
        stages["output_flat"].append(flat)
        coeffs = [
            [[flat[i * F * 2 + f * 2], flat[i * F * 2 + f * 2 + 1]] for f in range(F)]
            for i in range(CONFIG.clc_order)
        ]
        stages["coeffs"].append(coeffs)
    return stages


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default_out = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "golden_tiny"
    parser.add_argument("--out-dir", type=Path, default=default_out)
    parser.add_argument("--seed", type=int, default=SEED)
    args = parser.parse_args()
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)

    weights = random_weights(CONFIG, seed=args.seed, meta=META)
    clcw_path = out / "tiny.clcw"
    save_weights(clcw_path, weights)
    # the reference must see the f32 values exactly as a loader will
    _, weights = load_weights(clcw_path)

    rng = np.random.default_rng(args.seed + 1)
    spectra = rng.uniform(-1.2, 1.2, size=(FRAMES, CONFIG.n_bins, 2))
    complex_spectra = spectra[..., 0] + 1j * spectra[..., 1]

    stages = reference_forward(weights, complex_spectra)

    files = {"input_spectra": spectra.astype("<f4")}
    shapes = {"input_spectra": list(spectra.shape)}
    for name, data in stages.items():
        arr = np.asarray(data, dtype="<f4")
        files[name] = arr
        shapes[name] = list(arr.shape)

    for name, arr in files.items():
        (out / f"{name}.f32").write_bytes(arr.tobytes(order="C"))

    manifest = {
        "seed": args.seed,
        "frames": FRAMES,
        "config": {
            "n_bins": CONFIG.n_bins,
            "clc_order": CONFIG.clc_order,
            "hidden": CONFIG.hidden,
            "gru_layers": CONFIG.gru_layers,
        },
        "dtype": "float32 little-endian, C order",
        "shapes": shapes,
        "weights_file": "tiny.clcw",
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(files)} stage files + tiny.clcw to {out}")


if __name__ == "__main__":
    main()
