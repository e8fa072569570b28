"""CLCW weight file reader/writer.

Binary layout, all integers little-endian u32, all tensor data float32
row-major:

    magic   4 bytes  b"CLCW"
    version u32      currently 1
    count   u32      number of tensors
    then per tensor:
        name_len u32, name (UTF-8, name_len bytes)
        ndim u32, dims u32 * ndim   (ndim 0 means scalar, one value)
        data f32 * prod(dims)

Stream metadata rides along as meta.* scalar tensors.  Tensors are written
in one canonical order so identical weights produce identical bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .nn import GruLayerWeights, ModelConfig, ModelWeights, StreamMeta

MAGIC = b"CLCW"
VERSION = 1

_META_FIELDS = ("sample_rate", "fft_size", "hop", "n_bins", "clc_order", "lookahead", "alpha")
_INT_META = {"sample_rate", "fft_size", "hop", "n_bins", "clc_order", "lookahead"}


def _canonical_order(n_layers: int) -> list[str]:
    names = ["fc_in.w", "fc_in.b", "bn.scale", "bn.bias"]
    for i in range(1, n_layers + 1):
        names += [f"gru{i}.w_ih", f"gru{i}.w_hh", f"gru{i}.b_ih", f"gru{i}.b_hh"]
    names += ["fc_out.w", "fc_out.b"]
    names += [f"meta.{f}" for f in _META_FIELDS]
    return names


def _tensor_map(weights: ModelWeights) -> dict[str, np.ndarray]:
    meta = weights.meta
    out = {
        "fc_in.w": weights.fc_in_w,
        "fc_in.b": weights.fc_in_b,
        "bn.scale": weights.bn_scale,
        "bn.bias": weights.bn_bias,
        "fc_out.w": weights.fc_out_w,
        "fc_out.b": weights.fc_out_b,
    }
    for i, layer in enumerate(weights.gru, start=1):
        out[f"gru{i}.w_ih"] = layer.w_ih
        out[f"gru{i}.w_hh"] = layer.w_hh
        out[f"gru{i}.b_ih"] = layer.b_ih
        out[f"gru{i}.b_hh"] = layer.b_hh
    for f in _META_FIELDS:
        out[f"meta.{f}"] = np.asarray(getattr(meta, f), dtype=np.float32)
    return out


def save_weights(path: str | Path, weights: ModelWeights) -> None:
    """Write weights to a CLCW file (canonical tensor order, deterministic bytes)."""
    tensors = _tensor_map(weights)
    order = _canonical_order(len(weights.gru))
    parts = [MAGIC, struct.pack("<II", VERSION, len(order))]
    for name in order:
        # ascontiguousarray would promote 0-d scalars to 1-d and change the layout
        arr = np.asarray(tensors[name], dtype=np.float32, order="C")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<I", arr.ndim))
        if arr.ndim:
            parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes(order="C"))
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(
                f"{self.path}: truncated while reading {what}: "
                f"need {n} bytes at offset {self.pos}, only {len(self.data) - self.pos} available"
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]


def _read_tensors(path: str | Path) -> dict[str, np.ndarray]:
    raw = Path(path).read_bytes()
    r = _Reader(raw, str(path))
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    version = r.u32("version")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}, expected {VERSION}")
    count = r.u32("tensor count")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        name_len = r.u32("tensor name length")
        name = r.take(name_len, "tensor name").decode("utf-8")
        ndim = r.u32(f"ndim of {name}")
        dims = [r.u32(f"dim {d} of {name}") for d in range(ndim)]
        n_vals = int(np.prod(dims)) if dims else 1
        data = r.take(4 * n_vals, f"data of {name}")
        arr = np.frombuffer(data, dtype="<f4").astype(np.float32)
        tensors[name] = arr.reshape(dims) if dims else arr.reshape(())
    if r.pos != len(raw):
        raise FormatError(f"{path}: {len(raw) - r.pos} trailing bytes after last tensor")
    return tensors


def _require(tensors: dict[str, np.ndarray], name: str, path: str) -> np.ndarray:
    if name not in tensors:
        raise FormatError(f"{path}: missing required tensor {name}")
    arr = tensors[name]
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{path}: tensor {name} contains non-finite values")
    return arr


def _check_shape(arr: np.ndarray, expected: tuple[int, ...], name: str, path: str) -> np.ndarray:
    if arr.shape != expected:
        raise FormatError(f"{path}: tensor {name} has shape {arr.shape}, expected {expected}")
    return arr


def load_weights(path: str | Path) -> tuple[ModelConfig, ModelWeights]:
    """Read a CLCW file; raises FormatError naming the offending tensor on any defect."""
    spath = str(path)
    tensors = _read_tensors(path)

    meta_vals = {}
    for f in _META_FIELDS:
        arr = _require(tensors, f"meta.{f}", spath)
        _check_shape(arr, (), f"meta.{f}", spath)
        v = float(arr)
        meta_vals[f] = int(round(v)) if f in _INT_META else v
    meta = StreamMeta(**meta_vals)
    if meta.n_bins != meta.fft_size // 2 + 1:
        raise FormatError(
            f"{spath}: meta.n_bins is {meta.n_bins}, expected fft_size/2+1 = {meta.fft_size // 2 + 1}"
        )
    if meta.clc_order < 1:
        raise FormatError(f"{spath}: meta.clc_order must be >= 1, got {meta.clc_order}")
    if not 0 <= meta.lookahead < meta.clc_order:
        raise FormatError(
            f"{spath}: meta.lookahead {meta.lookahead} outside [0, clc_order) = [0, {meta.clc_order})"
        )

    n_layers = 0
    while f"gru{n_layers + 1}.w_ih" in tensors:
        n_layers += 1
    if n_layers == 0:
        raise FormatError(f"{spath}: missing required tensor gru1.w_ih")

    fc_in_w = _require(tensors, "fc_in.w", spath)
    if fc_in_w.ndim != 2:
        raise FormatError(f"{spath}: tensor fc_in.w has shape {fc_in_w.shape}, expected 2-D")
    input_dim = 2 * meta.n_bins
    hidden = fc_in_w.shape[1]
    _check_shape(fc_in_w, (input_dim, hidden), "fc_in.w", spath)
    fc_in_b = _check_shape(_require(tensors, "fc_in.b", spath), (hidden,), "fc_in.b", spath)
    bn_scale = _check_shape(_require(tensors, "bn.scale", spath), (hidden,), "bn.scale", spath)
    bn_bias = _check_shape(_require(tensors, "bn.bias", spath), (hidden,), "bn.bias", spath)

    layers = []
    in_dim = hidden
    for i in range(1, n_layers + 1):
        w_ih = _check_shape(
            _require(tensors, f"gru{i}.w_ih", spath), (3 * hidden, in_dim), f"gru{i}.w_ih", spath
        )
        w_hh = _check_shape(
            _require(tensors, f"gru{i}.w_hh", spath), (3 * hidden, hidden), f"gru{i}.w_hh", spath
        )
        b_ih = _check_shape(
            _require(tensors, f"gru{i}.b_ih", spath), (3 * hidden,), f"gru{i}.b_ih", spath
        )
        b_hh = _check_shape(
            _require(tensors, f"gru{i}.b_hh", spath), (3 * hidden,), f"gru{i}.b_hh", spath
        )
        layers.append(GruLayerWeights(w_ih=w_ih, w_hh=w_hh, b_ih=b_ih, b_hh=b_hh))
        in_dim = hidden

    output_dim = meta.clc_order * meta.n_bins * 2
    fc_out_w = _check_shape(
        _require(tensors, "fc_out.w", spath), (hidden, output_dim), "fc_out.w", spath
    )
    fc_out_b = _check_shape(_require(tensors, "fc_out.b", spath), (output_dim,), "fc_out.b", spath)

    weights = ModelWeights(
        fc_in_w=fc_in_w,
        fc_in_b=fc_in_b,
        bn_scale=bn_scale,
        bn_bias=bn_bias,
        gru=layers,
        fc_out_w=fc_out_w,
        fc_out_b=fc_out_b,
        meta=meta,
    )
    config = ModelConfig(
        n_bins=meta.n_bins, clc_order=meta.clc_order, hidden=hidden, gru_layers=n_layers
    )
    return config, weights
