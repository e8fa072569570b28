"""Golden activation vector export for cross-implementation tests.

Writes, for a given folded model and seeded random input frames, every
network stage as a flat little-endian f32 file plus a JSON sidecar with the
shapes.  Complex-valued stages are stored as trailing (real, imag) pairs.
"""

import json
from pathlib import Path

import numpy as np
import torch

from .replica import CoeffNet, forward_with_intermediates, spectrum_features

TINY = {"n_bins": 8, "clc_order": 2, "hidden": 4, "gru_layers": 2}


def export_golden(
    model: CoeffNet, out_dir: str | Path, frames: int = 3, seed: int = 0
) -> dict[str, list[int]]:
    """Run seeded inputs through the model and write all stages to out_dir.

    Returns the shape table that was written to the sidecar.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    spectra = rng.uniform(-1.2, 1.2, size=(frames, model.dims.n_bins, 2)).astype(np.float32)
    complex_in = torch.view_as_complex(torch.from_numpy(spectra))

    model.eval()
    with torch.no_grad():
        stages = forward_with_intermediates(model, spectrum_features(complex_in))

    arrays = {"input_spectra": spectra}
    for name, tensor in stages.items():
        arr = tensor.numpy()
        if np.iscomplexobj(arr):
            arr = np.stack([arr.real, arr.imag], axis=-1)
        arrays[name] = np.ascontiguousarray(arr, dtype="<f4")

    shapes = {}
    for name, arr in arrays.items():
        (out / f"{name}.f32").write_bytes(arr.tobytes(order="C"))
        shapes[name] = list(arr.shape)
    sidecar = {
        "seed": seed,
        "frames": frames,
        "config": dict(TINY) if _is_tiny(model) else _dims_dict(model),
        "dtype": "float32 little-endian, C order",
        "shapes": shapes,
    }
    (out / "shapes.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return shapes


def _dims_dict(model: CoeffNet) -> dict[str, int]:
    d = model.dims
    return {
        "n_bins": d.n_bins,
        "clc_order": d.clc_order,
        "hidden": d.hidden,
        "gru_layers": d.gru_layers,
    }


def _is_tiny(model: CoeffNet) -> bool:
    return _dims_dict(model) == TINY
