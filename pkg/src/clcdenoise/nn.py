"""From-scratch forward pass of the coefficient-prediction network.

Architecture: fully connected input layer, a (pre-folded) batch-norm affine,
ReLU, a stack of GRU layers, and a fully connected output layer with tanh.
The output vector holds order * n_bins * 2 values laid out tap-major
(tap, bin, re/im) and is reinterpreted as an (order, n_bins) complex
coefficient array.  Everything is plain numpy; dtypes follow the weights, so
float32 production weights run in float32, and float64 test fixtures stay
exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .dsp import DEFAULT_ALPHA, PIPELINE_SAMPLE_RATE

BN_EPS = 1e-5


@dataclass
class ModelConfig:
    n_bins: int = 161
    clc_order: int = 5
    hidden: int = 256
    gru_layers: int = 2

    @property
    def input_dim(self) -> int:
        return 2 * self.n_bins

    @property
    def output_dim(self) -> int:
        return self.clc_order * self.n_bins * 2

    def param_count(self) -> int:
        """Total learnable parameters of the dense/affine/GRU stack."""
        fc_in = self.input_dim * self.hidden + self.hidden
        bn = 2 * self.hidden
        gru = 0
        in_dim = self.hidden
        for _ in range(self.gru_layers):
            gru += 3 * self.hidden * in_dim + 3 * self.hidden * self.hidden + 6 * self.hidden
            in_dim = self.hidden
        fc_out = self.hidden * self.output_dim + self.output_dim
        return fc_in + bn + gru + fc_out


@dataclass
class StreamMeta:
    """Stream geometry the weights were trained for; shipped inside the weight file."""

    sample_rate: int = PIPELINE_SAMPLE_RATE
    fft_size: int = 320
    hop: int = 80
    n_bins: int = 161
    clc_order: int = 5
    lookahead: int = 0
    alpha: float = DEFAULT_ALPHA


@dataclass
class GruLayerWeights:
    """One GRU layer; gate blocks stacked (reset, update, candidate) along axis 0."""

    w_ih: np.ndarray  # (3H, input)
    w_hh: np.ndarray  # (3H, H)
    b_ih: np.ndarray  # (3H,)
    b_hh: np.ndarray  # (3H,)

    @property
    def hidden(self) -> int:
        return self.w_hh.shape[1]

    @property
    def input_dim(self) -> int:
        return self.w_ih.shape[1]


@dataclass
class ModelWeights:
    fc_in_w: np.ndarray  # (input_dim, hidden)
    fc_in_b: np.ndarray  # (hidden,)
    bn_scale: np.ndarray  # (hidden,) folded batch-norm affine
    bn_bias: np.ndarray  # (hidden,)
    gru: list[GruLayerWeights]
    fc_out_w: np.ndarray  # (hidden, output_dim)
    fc_out_b: np.ndarray  # (output_dim,)
    meta: StreamMeta = field(default_factory=StreamMeta)

    @property
    def config(self) -> ModelConfig:
        return ModelConfig(
            n_bins=self.meta.n_bins,
            clc_order=self.meta.clc_order,
            hidden=self.fc_in_w.shape[1],
            gru_layers=len(self.gru),
        )


@dataclass
class GruState:
    """Per-layer hidden vectors, zero at stream start."""

    hidden: list[np.ndarray]

    @classmethod
    def zeros(cls, weights: ModelWeights, dtype=np.float32) -> "GruState":
        return cls([np.zeros(layer.hidden, dtype=dtype) for layer in weights.gru])

    def reset(self) -> None:
        for h in self.hidden:
            h[:] = 0


def fold_batchnorm(
    gamma: np.ndarray,
    beta: np.ndarray,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    eps: float = BN_EPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Collapse inference-mode batch norm into a per-feature affine (scale, bias)."""
    inv_std = 1.0 / np.sqrt(np.asarray(running_var) + eps)
    scale = np.asarray(gamma) * inv_std
    bias = np.asarray(beta) - np.asarray(gamma) * np.asarray(running_mean) * inv_std
    return scale, bias


def gru_cell(x: np.ndarray, h: np.ndarray, layer: GruLayerWeights) -> np.ndarray:
    """One GRU step.

    r = sigmoid(W_r x + b_r + U_r h + c_r)
    z = sigmoid(W_z x + b_z + U_z h + c_z)
    n = tanh(W_n x + b_n + r * (U_n h + c_n))
    h' = (1 - z) * n + z * h
    """
    hid = layer.hidden
    gi = layer.w_ih @ x + layer.b_ih
    gh = layer.w_hh @ h + layer.b_hh
    r = expit(gi[:hid] + gh[:hid])
    z = expit(gi[hid : 2 * hid] + gh[hid : 2 * hid])
    n = np.tanh(gi[2 * hid :] + r * gh[2 * hid :])
    return (1.0 - z) * n + z * h


def spectrum_features(spectrum: np.ndarray, dtype=np.float32) -> np.ndarray:
    """Stack real then imaginary parts of one spectrum into the input feature vector."""
    n_bins = spectrum.shape[0]
    feats = np.empty(2 * n_bins, dtype=dtype)
    feats[:n_bins] = spectrum.real
    feats[n_bins:] = spectrum.imag
    return feats


def forward(
    weights: ModelWeights, state: GruState, normalized_spectrum: np.ndarray
) -> tuple[np.ndarray, GruState]:
    """Predict one frame's coefficients from a unit-norm spectrum.

    Returns the (order, n_bins) complex coefficient array (components in
    (-1, 1) by the tanh output) and the advanced recurrent state.
    """
    x = spectrum_features(normalized_spectrum, dtype=weights.fc_in_w.dtype)
    x = x @ weights.fc_in_w + weights.fc_in_b
    x = weights.bn_scale * x + weights.bn_bias
    np.maximum(x, 0.0, out=x)
    new_hidden = []
    for layer, h in zip(weights.gru, state.hidden):
        x = gru_cell(x, h, layer)
        new_hidden.append(x)
    y = x @ weights.fc_out_w + weights.fc_out_b
    np.tanh(y, out=y)
    coeffs = coeffs_from_flat(y, weights.meta.clc_order, weights.meta.n_bins)
    return coeffs, GruState(new_hidden)


def coeffs_from_flat(flat: np.ndarray, order: int, n_bins: int) -> np.ndarray:
    """Reinterpret the tap-major flat output (i*n_bins*2 + f*2 + re/im) as complex taps."""
    pairs = np.ascontiguousarray(flat, dtype=np.float32).reshape(order, n_bins, 2)
    return pairs.view(np.complex64)[:, :, 0]


def flat_from_coeffs(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of coeffs_from_flat."""
    order, n_bins = coeffs.shape
    pairs = np.empty((order, n_bins, 2), dtype=np.float32)
    pairs[:, :, 0] = coeffs.real
    pairs[:, :, 1] = coeffs.imag
    return pairs.reshape(order * n_bins * 2)


def zero_weights(config: ModelConfig | None = None, meta: StreamMeta | None = None) -> ModelWeights:
    """All-zero weights: the network emits all-zero coefficients forever."""
    cfg = config or ModelConfig()
    meta = meta or StreamMeta(n_bins=cfg.n_bins, clc_order=cfg.clc_order)
    layers = []
    in_dim = cfg.hidden
    for _ in range(cfg.gru_layers):
        layers.append(
            GruLayerWeights(
                w_ih=np.zeros((3 * cfg.hidden, in_dim), dtype=np.float32),
                w_hh=np.zeros((3 * cfg.hidden, cfg.hidden), dtype=np.float32),
                b_ih=np.zeros(3 * cfg.hidden, dtype=np.float32),
                b_hh=np.zeros(3 * cfg.hidden, dtype=np.float32),
            )
        )
        in_dim = cfg.hidden
    return ModelWeights(
        fc_in_w=np.zeros((cfg.input_dim, cfg.hidden), dtype=np.float32),
        fc_in_b=np.zeros(cfg.hidden, dtype=np.float32),
        bn_scale=np.zeros(cfg.hidden, dtype=np.float32),
        bn_bias=np.zeros(cfg.hidden, dtype=np.float32),
        gru=layers,
        fc_out_w=np.zeros((cfg.hidden, cfg.output_dim), dtype=np.float32),
        fc_out_b=np.zeros(cfg.output_dim, dtype=np.float32),
        meta=meta,
    )


def random_weights(
    config: ModelConfig | None = None,
    seed: int = 0,
    meta: StreamMeta | None = None,
    scale: float = 1.0,
) -> ModelWeights:
    """Seeded uniform fan-in-scaled weights; handy for benchmarks and tests."""
    cfg = config or ModelConfig()
    meta = meta or StreamMeta(n_bins=cfg.n_bins, clc_order=cfg.clc_order)
    rng = np.random.default_rng(seed)

    def uniform(shape, fan_in):
        bound = scale / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape).astype(np.float32)

    layers = []
    in_dim = cfg.hidden
    for _ in range(cfg.gru_layers):
        layers.append(
            GruLayerWeights(
                w_ih=uniform((3 * cfg.hidden, in_dim), in_dim),
                w_hh=uniform((3 * cfg.hidden, cfg.hidden), cfg.hidden),
                b_ih=uniform(3 * cfg.hidden, cfg.hidden),
                b_hh=uniform(3 * cfg.hidden, cfg.hidden),
            )
        )
        in_dim = cfg.hidden
    bn_scale, bn_bias = fold_batchnorm(
        gamma=np.ones(cfg.hidden, dtype=np.float32),
        beta=np.zeros(cfg.hidden, dtype=np.float32),
        running_mean=rng.uniform(-0.1, 0.1, cfg.hidden).astype(np.float32),
        running_var=rng.uniform(0.5, 1.5, cfg.hidden).astype(np.float32),
    )
    return ModelWeights(
        fc_in_w=uniform((cfg.input_dim, cfg.hidden), cfg.input_dim),
        fc_in_b=uniform(cfg.hidden, cfg.input_dim),
        bn_scale=bn_scale.astype(np.float32),
        bn_bias=bn_bias.astype(np.float32),
        gru=layers,
        fc_out_w=uniform((cfg.hidden, cfg.output_dim), cfg.hidden),
        fc_out_b=uniform(cfg.output_dim, cfg.hidden),
        meta=meta,
    )
