"""Differentiable replica of the streaming enhancement pipeline.

Everything here mirrors the inference engine's semantics exactly: same
window, same frame alignment (including the engine's leading zero padding),
same online magnitude normalization, same tap indexing.  The network is a
torch module whose tensors map one-to-one onto the CLCW weight layout; gate
packing is reset/update/candidate, which is also torch's native GRU order.
"""

from dataclasses import dataclass

import torch
from torch import nn

from .errors import ConfigError

MU_FLOOR = 1e-10


@dataclass(frozen=True)
class NetDims:
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


@dataclass(frozen=True)
class PipelineSettings:
    sample_rate: int = 16000
    fft_size: int = 320
    hop: int = 80
    n_bins: int = 161
    clc_order: int = 5
    lookahead: int = 0
    alpha: float = 0.99

    def __post_init__(self):
        if self.n_bins != self.fft_size // 2 + 1:
            raise ConfigError(f"n_bins {self.n_bins} != fft_size/2+1 for fft {self.fft_size}")
        if not 0 <= self.lookahead < self.clc_order:
            raise ConfigError(f"lookahead {self.lookahead} outside [0, {self.clc_order})")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha {self.alpha} outside (0, 1)")

    @property
    def pad(self) -> int:
        # the streaming engine pre-feeds this many zeros so the first real
        # sample already has full window coverage
        return self.fft_size - self.hop


def analysis_window(settings: PipelineSettings, dtype=torch.float32) -> torch.Tensor:
    return torch.hamming_window(settings.fft_size, periodic=True, dtype=dtype)


class FrameAffine(nn.Module):
    """Per-feature scale and shift, the folded form of batch norm."""

    def __init__(self, scale: torch.Tensor, bias: torch.Tensor):
        super().__init__()
        self.register_buffer("scale", scale.detach().clone())
        self.register_buffer("bias", bias.detach().clone())

    def forward(self, x):
        return x * self.scale + self.bias


class CoeffNet(nn.Module):
    """Coefficient predictor: FC, feature norm, ReLU, GRU stack, FC, tanh.

    norm is BatchNorm1d while training and a FrameAffine once folded; both
    act per feature on (batch, time, hidden) activations.
    """

    def __init__(self, dims: NetDims, norm: nn.Module | None = None):
        super().__init__()
        self.dims = dims
        self.fc_in = nn.Linear(dims.input_dim, dims.hidden)
        self.norm = nn.BatchNorm1d(dims.hidden) if norm is None else norm
        self.gru = nn.GRU(
            dims.hidden, dims.hidden, num_layers=dims.gru_layers, batch_first=True
        )
        self.fc_out = nn.Linear(dims.hidden, dims.output_dim)

    @property
    def folded(self) -> bool:
        return isinstance(self.norm, FrameAffine)

    def _normalize_features(self, x):
        if self.folded:
            return self.norm(x)
        b, t, h = x.shape
        return self.norm(x.reshape(b * t, h)).reshape(b, t, h)

    def forward(self, features, state=None):
        """features (batch, time, 2*n_bins) -> complex coeffs (batch, time, order, n_bins)."""
        x = self._normalize_features(self.fc_in(features))
        x = torch.relu(x)
        x, state = self.gru(x, state)
        flat = torch.tanh(self.fc_out(x))
        b, t, _ = flat.shape
        pairs = flat.reshape(b, t, self.dims.clc_order, self.dims.n_bins, 2)
        return torch.view_as_complex(pairs.contiguous()), state

    def fold(self) -> "CoeffNet":
        """Return an inference copy with batch norm folded to an affine."""
        if self.folded:
            raise ConfigError("model is already folded")
        bn = self.norm
        inv = torch.rsqrt(bn.running_var + bn.eps)
        scale = bn.weight * inv
        bias = bn.bias - bn.running_mean * scale
        out = CoeffNet(self.dims, norm=FrameAffine(scale, bias))
        out.fc_in.load_state_dict(self.fc_in.state_dict())
        out.gru.load_state_dict(self.gru.state_dict())
        out.fc_out.load_state_dict(self.fc_out.state_dict())
        return out


def spectrum_features(spec: torch.Tensor) -> torch.Tensor:
    """(..., n_bins) complex -> (..., 2*n_bins) real, real parts then imaginary."""
    return torch.cat([spec.real, spec.imag], dim=-1)


def stft_frames(x: torch.Tensor, settings: PipelineSettings, window: torch.Tensor) -> torch.Tensor:
    """(batch, samples) -> (batch, time, n_bins) complex, no centering."""
    spec = torch.stft(
        x,
        n_fft=settings.fft_size,
        hop_length=settings.hop,
        win_length=settings.fft_size,
        window=window,
        center=False,
        return_complex=True,
    )
    return spec.transpose(1, 2)


def istft_frames(
    spec: torch.Tensor, settings: PipelineSettings, window: torch.Tensor, length: int
) -> torch.Tensor:
    """(batch, time, n_bins) complex -> (batch, length) real."""
    return torch.istft(
        spec.transpose(1, 2),
        n_fft=settings.fft_size,
        hop_length=settings.hop,
        win_length=settings.fft_size,
        window=window,
        center=False,
        length=length,
    )


def online_normalize(spec: torch.Tensor, alpha: float) -> torch.Tensor:
    """Divide each bin by its running mean magnitude, phase untouched.

    First frame uses its own magnitude (unit output); afterwards the
    estimate is updated before dividing.  Matches the streaming normalizer.
    """
    mags = torch.abs(spec)
    out = []
    mu = torch.clamp(mags[:, 0], min=MU_FLOOR)
    out.append(spec[:, 0] / mu)
    for t in range(1, spec.shape[1]):
        mu = torch.clamp(alpha * mu + (1.0 - alpha) * mags[:, t], min=MU_FLOOR)
        out.append(spec[:, t] / mu)
    return torch.stack(out, dim=1)


def apply_taps(coeffs: torch.Tensor, spec: torch.Tensor, lookahead: int) -> torch.Tensor:
    """Combine raw spectra across taps: out(t) = sum_i coeffs(t,i) * spec(t+l-i).

    coeffs (batch, time, order, n_bins) complex, spec (batch, time, n_bins)
    complex.  Frames outside the clip contribute zero.
    """
    order = coeffs.shape[2]
    shifted = []
    for i in range(order):
        s = lookahead - i
        if s == 0:
            shifted.append(spec)
        elif s > 0:
            zeros = torch.zeros_like(spec[:, :s])
            shifted.append(torch.cat([spec[:, s:], zeros], dim=1))
        else:
            zeros = torch.zeros_like(spec[:, :(-s)])
            shifted.append(torch.cat([zeros, spec[:, :s]], dim=1))
    stack = torch.stack(shifted, dim=2)
    return (coeffs * stack).sum(dim=2)


def enhance_offline(
    model: CoeffNet,
    noisy: torch.Tensor,
    settings: PipelineSettings,
    window: torch.Tensor | None = None,
) -> torch.Tensor:
    """Run the whole pipeline on (batch, samples), returning (batch, samples).

    The input is left-padded with the engine's priming zeros so frame
    timelines (and therefore GRU and normalizer state) match streaming
    inference exactly; the padding is cut from the output again.
    """
    if model.dims.n_bins != settings.n_bins or model.dims.clc_order != settings.clc_order:
        raise ConfigError(
            f"model dims {model.dims} inconsistent with pipeline settings {settings}"
        )
    if window is None:
        window = analysis_window(settings, dtype=noisy.dtype)
    pad = torch.zeros(noisy.shape[0], settings.pad, dtype=noisy.dtype, device=noisy.device)
    spec = stft_frames(torch.cat([pad, noisy], dim=1), settings, window)
    normalized = online_normalize(spec, settings.alpha)
    coeffs, _ = model(spectrum_features(normalized))
    enhanced = apply_taps(coeffs, spec, settings.lookahead)
    y = istft_frames(enhanced, settings, window, length=settings.pad + noisy.shape[1])
    return y[:, settings.pad :]


def forward_with_intermediates(model: CoeffNet, features: torch.Tensor) -> dict[str, torch.Tensor]:
    """Single-sequence forward returning every stage, for golden vectors.

    features (time, 2*n_bins).  Returns post_fc, post_affine, post_relu,
    per-layer GRU state sequences, pre_tanh, post_tanh, coeffs.
    """
    if not model.folded:
        raise ConfigError("golden vectors require a folded model")
    x = features.unsqueeze(0)
    stages: dict[str, torch.Tensor] = {}
    x = model.fc_in(x)
    stages["post_fc"] = x.squeeze(0)
    x = model.norm(x)
    stages["post_affine"] = x.squeeze(0)
    x = torch.relu(x)
    stages["post_relu"] = x.squeeze(0)
    for i in range(model.dims.gru_layers):
        layer = nn.GRU(model.dims.hidden, model.dims.hidden, batch_first=True)
        layer = layer.to(dtype=features.dtype)
        with torch.no_grad():
            layer.weight_ih_l0.copy_(getattr(model.gru, f"weight_ih_l{i}"))
            layer.weight_hh_l0.copy_(getattr(model.gru, f"weight_hh_l{i}"))
            layer.bias_ih_l0.copy_(getattr(model.gru, f"bias_ih_l{i}"))
            layer.bias_hh_l0.copy_(getattr(model.gru, f"bias_hh_l{i}"))
        x, _ = layer(x)
        stages[f"gru{i + 1}"] = x.squeeze(0)
    x = model.fc_out(x)
    stages["pre_tanh"] = x.squeeze(0)
    x = torch.tanh(x)
    stages["post_tanh"] = x.squeeze(0)
    t = x.shape[1]
    pairs = x.reshape(1, t, model.dims.clc_order, model.dims.n_bins, 2)
    stages["coeffs"] = torch.view_as_complex(pairs.contiguous()).squeeze(0)
    return stages
