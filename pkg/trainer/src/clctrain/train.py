"""End-to-end training of the coefficient network on paired clips.

The loss is mean squared error on the time-domain output of the full
differentiable pipeline.  Optimization follows the fixed recipe: decoupled
weight decay, global-norm gradient clipping, constant learning rate (no
schedule).
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .data import load_pairs, segment_pairs
from .errors import ConfigError, TrainError
from .replica import CoeffNet, NetDims, PipelineSettings, enhance_offline
from .weights_io import export_model

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    lr: float = 1e-3
    batch_size: int = 32
    epochs: int = 50
    weight_decay: float = 1e-7
    grad_clip: float = 0.25
    segment_seconds: float = 5.0
    seed: int = 0
    identity_start: bool = True
    dims: NetDims = field(default_factory=NetDims)
    settings: PipelineSettings = field(default_factory=PipelineSettings)

    def __post_init__(self):
        positive = {
            "lr": self.lr,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "weight_decay": self.weight_decay,
            "grad_clip": self.grad_clip,
            "segment_seconds": self.segment_seconds,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.epochs > 200:
            raise ConfigError(f"epochs capped at 200, got {self.epochs}")
        if self.dims.n_bins != self.settings.n_bins or self.dims.clc_order != self.settings.clc_order:
            raise ConfigError("network dims and pipeline settings disagree")


def time_domain_mse(estimate: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    return torch.mean((estimate - target) ** 2)


def init_identity_start(model: CoeffNet, settings: PipelineSettings, value: float = 0.9) -> None:
    """Zero the output layer except a bias passing the current frame through.

    Training then starts from (a scaled copy of) the noisy input instead of
    silence, which is a much better-conditioned starting point for the
    time-domain loss.
    """
    dims = model.dims
    with torch.no_grad():
        model.fc_out.weight.zero_()
        model.fc_out.bias.zero_()
        tap = settings.lookahead
        for f in range(dims.n_bins):
            model.fc_out.bias[tap * dims.n_bins * 2 + f * 2] = math.atanh(value)


def _batches(n_rows: int, batch_size: int, generator: torch.Generator):
    order = torch.randperm(n_rows, generator=generator)
    for start in range(0, n_rows, batch_size):
        yield order[start : start + batch_size]


def train(
    config: TrainConfig,
    dataset_dir: str | Path,
    out_path: str | Path,
    init_model: CoeffNet | None = None,
) -> list[float]:
    """Train on a dataset directory and export CLCW weights to out_path.

    Returns per-epoch mean losses, with the pre-training evaluation loss
    prepended, so history[0] is the starting point.
    """
    torch.manual_seed(config.seed)
    model = CoeffNet(config.dims) if init_model is None else init_model
    if init_model is None and config.identity_start:
        init_identity_start(model, config.settings)

    pairs = load_pairs(dataset_dir, sample_rate=config.settings.sample_rate)
    segment = int(config.segment_seconds * config.settings.sample_rate)
    noisy_np, clean_np = segment_pairs(pairs, segment)
    noisy = torch.from_numpy(noisy_np)
    clean = torch.from_numpy(clean_np)
    log.info(
        "training on %d segments of %d samples from %d pairs",
        noisy.shape[0], noisy.shape[1], len(pairs),
    )

    optimizer = torch.optim.AdamW(
        model.parameters(), lr=config.lr, weight_decay=config.weight_decay
    )
    generator = torch.Generator().manual_seed(config.seed)

    model.eval()
    with torch.no_grad():
        start_loss = float(time_domain_mse(
            enhance_offline(model, noisy, config.settings), clean
        ))
    history = [start_loss]
    log.info("epoch 0 (untrained) loss %.6g", start_loss)

    for epoch in range(1, config.epochs + 1):
        model.train()
        total = 0.0
        count = 0
        for step, idx in enumerate(_batches(noisy.shape[0], config.batch_size, generator), start=1):
            optimizer.zero_grad()
            estimate = enhance_offline(model, noisy[idx], config.settings)
            loss = time_domain_mse(estimate, clean[idx])
            if not torch.isfinite(loss):
                raise TrainError(f"loss became non-finite at epoch {epoch} step {step}")
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip)
            optimizer.step()
            total += float(loss.detach()) * len(idx)
            count += len(idx)
        history.append(total / count)
        log.info("epoch %d loss %.6g", epoch, history[-1])

    model.eval()
    export_model(out_path, model, config.settings)
    log.info("exported weights to %s", out_path)
    return history


def evaluate_si_sdr_gain(
    model: CoeffNet, dataset_dir: str | Path, settings: PipelineSettings
) -> float:
    """Mean SI-SDR improvement of the replica's output over the noisy input."""
    pairs = load_pairs(dataset_dir, sample_rate=settings.sample_rate)
    model.eval()
    gains = []
    for p in pairs:
        noisy = torch.from_numpy(p.noisy).unsqueeze(0)
        with torch.no_grad():
            est = enhance_offline(model, noisy, settings).squeeze(0).numpy()
        gains.append(_si_sdr(est, p.clean) - _si_sdr(p.noisy, p.clean))
    return float(np.mean(gains))


def _si_sdr(estimate: np.ndarray, reference: np.ndarray) -> float:
    e = estimate - np.mean(estimate)
    r = reference - np.mean(reference)
    target = (np.dot(e, r) / np.dot(r, r)) * r
    noise = e - target
    return 10.0 * np.log10(np.dot(target, target) / max(np.dot(noise, noise), 1e-30))
