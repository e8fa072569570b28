"""CLCW weight file export and import for trained models.

The byte layout: magic "CLCW", u32 version 1, u32 tensor count, then per
tensor a u32 name length, the UTF-8 name, u32 ndim, u32 dims, and row-major
f32 data, all little-endian.  Tensors are written in a fixed canonical
order so identical weights produce identical files.
"""

import struct
from pathlib import Path

import numpy as np
import torch

from .errors import ConfigError, DataError
from .replica import CoeffNet, FrameAffine, NetDims, PipelineSettings

MAGIC = b"CLCW"
VERSION = 1

META_FIELDS = ("sample_rate", "fft_size", "hop", "n_bins", "clc_order", "lookahead", "alpha")
INT_META = {"sample_rate", "fft_size", "hop", "n_bins", "clc_order", "lookahead"}


def canonical_order(gru_layers: int) -> list[str]:
    names = ["fc_in.w", "fc_in.b", "bn.scale", "bn.bias"]
    for i in range(1, gru_layers + 1):
        names += [f"gru{i}.w_ih", f"gru{i}.w_hh", f"gru{i}.b_ih", f"gru{i}.b_hh"]
    names += ["fc_out.w", "fc_out.b"]
    names += [f"meta.{f}" for f in META_FIELDS]
    return names


def model_tensors(model: CoeffNet, settings: PipelineSettings) -> dict[str, np.ndarray]:
    """Collect a folded model's tensors under their file names.

    Linear weights are stored input-major (transposed from torch layout);
    GRU tensors keep torch's reset/update/candidate packing as is.
    """
    if not model.folded:
        raise ConfigError("export requires a folded model; call .fold() first")
    sd = {k: v.detach().cpu() for k, v in model.state_dict().items()}
    out = {
        "fc_in.w": sd["fc_in.weight"].T.contiguous().numpy(),
        "fc_in.b": sd["fc_in.bias"].numpy(),
        "bn.scale": sd["norm.scale"].numpy(),
        "bn.bias": sd["norm.bias"].numpy(),
        "fc_out.w": sd["fc_out.weight"].T.contiguous().numpy(),
        "fc_out.b": sd["fc_out.bias"].numpy(),
    }
    for i in range(1, model.dims.gru_layers + 1):
        out[f"gru{i}.w_ih"] = sd[f"gru.weight_ih_l{i - 1}"].numpy()
        out[f"gru{i}.w_hh"] = sd[f"gru.weight_hh_l{i - 1}"].numpy()
        out[f"gru{i}.b_ih"] = sd[f"gru.bias_ih_l{i - 1}"].numpy()
        out[f"gru{i}.b_hh"] = sd[f"gru.bias_hh_l{i - 1}"].numpy()
    for field in META_FIELDS:
        out[f"meta.{field}"] = np.float32(getattr(settings, field))
    return out


def check_shapes(tensors: dict[str, np.ndarray], dims: NetDims) -> None:
    """Reject any drift between tensor shapes and the declared dimensions."""
    h, d_in, d_out = dims.hidden, dims.input_dim, dims.output_dim
    expected = {
        "fc_in.w": (d_in, h),
        "fc_in.b": (h,),
        "bn.scale": (h,),
        "bn.bias": (h,),
        "fc_out.w": (h, d_out),
        "fc_out.b": (d_out,),
    }
    for i in range(1, dims.gru_layers + 1):
        expected[f"gru{i}.w_ih"] = (3 * h, h)
        expected[f"gru{i}.w_hh"] = (3 * h, h)
        expected[f"gru{i}.b_ih"] = (3 * h,)
        expected[f"gru{i}.b_hh"] = (3 * h,)
    for name, shape in expected.items():
        if name not in tensors:
            raise ConfigError(f"missing tensor {name}")
        got = np.shape(tensors[name])
        if got != shape:
            raise ConfigError(f"{name}: shape {got} drifted from config {shape}")


def write_clcw(path: str | Path, tensors: dict[str, np.ndarray], gru_layers: int) -> None:
    order = canonical_order(gru_layers)
    missing = [n for n in order if n not in tensors]
    if missing:
        raise ConfigError(f"missing tensors for export: {missing}")
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<II", VERSION, len(order))
    for name in order:
        arr = np.asarray(tensors[name], dtype="<f4", order="C")
        encoded = name.encode("utf-8")
        blob += struct.pack("<I", len(encoded))
        blob += encoded
        blob += struct.pack("<I", arr.ndim)
        blob += struct.pack(f"<{arr.ndim}I", *arr.shape)
        blob += arr.tobytes(order="C")
    Path(path).write_bytes(bytes(blob))


def read_clcw(path: str | Path) -> dict[str, np.ndarray]:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise DataError(f"{path}: not a CLCW file")
    version, count = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise DataError(f"{path}: unsupported version {version}")
    pos = 12
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<I", data, pos)
        pos += 4
        name = data[pos : pos + name_len].decode("utf-8")
        pos += name_len
        (ndim,) = struct.unpack_from("<I", data, pos)
        pos += 4
        shape = struct.unpack_from(f"<{ndim}I", data, pos)
        pos += 4 * ndim
        n = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(data, dtype="<f4", count=n, offset=pos).reshape(shape)
        pos += 4 * n
        tensors[name] = arr
    if pos != len(data):
        raise DataError(f"{path}: {len(data) - pos} trailing bytes")
    return tensors


def export_model(path: str | Path, model: CoeffNet, settings: PipelineSettings) -> None:
    """Fold if needed, validate shapes, and write the weight file."""
    folded = model if model.folded else model.fold()
    tensors = model_tensors(folded, settings)
    check_shapes(tensors, model.dims)
    write_clcw(path, tensors, model.dims.gru_layers)


def import_model(path: str | Path) -> tuple[CoeffNet, PipelineSettings]:
    """Load a CLCW file back into a folded torch model."""
    tensors = read_clcw(path)
    missing = [f"meta.{f}" for f in META_FIELDS if f"meta.{f}" not in tensors]
    if missing:
        raise DataError(f"{path}: missing {missing}")
    meta = {}
    for field in META_FIELDS:
        value = float(tensors[f"meta.{field}"])
        meta[field] = int(round(value)) if field in INT_META else value
    settings = PipelineSettings(**meta)

    layers = 0
    while f"gru{layers + 1}.w_ih" in tensors:
        layers += 1
    if layers == 0:
        raise DataError(f"{path}: no GRU layer tensors")
    hidden = tensors["fc_in.b"].shape[0]
    dims = NetDims(
        n_bins=settings.n_bins,
        clc_order=settings.clc_order,
        hidden=hidden,
        gru_layers=layers,
    )
    check_shapes(tensors, dims)

    def t(name):
        return torch.from_numpy(tensors[name].copy())

    model = CoeffNet(dims, norm=FrameAffine(t("bn.scale"), t("bn.bias")))
    with torch.no_grad():
        model.fc_in.weight.copy_(t("fc_in.w").T)
        model.fc_in.bias.copy_(t("fc_in.b"))
        model.fc_out.weight.copy_(t("fc_out.w").T)
        model.fc_out.bias.copy_(t("fc_out.b"))
        for i in range(1, layers + 1):
            getattr(model.gru, f"weight_ih_l{i - 1}").copy_(t(f"gru{i}.w_ih"))
            getattr(model.gru, f"weight_hh_l{i - 1}").copy_(t(f"gru{i}.w_hh"))
            getattr(model.gru, f"bias_ih_l{i - 1}").copy_(t(f"gru{i}.b_ih"))
            getattr(model.gru, f"bias_hh_l{i - 1}").copy_(t(f"gru{i}.b_hh"))
    model.eval()
    return model, settings
