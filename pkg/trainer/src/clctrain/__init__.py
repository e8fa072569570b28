"""Toy-scale trainer for the streaming CLC denoiser.

Differentiable replica of the inference pipeline, CLCW weight export and
import, and golden activation vector generation.
"""

from .data import ClipPair, load_pairs, segment_pairs
from .errors import ConfigError, DataError, TrainError, TrainerError
from .golden import export_golden
from .replica import (
    CoeffNet,
    FrameAffine,
    NetDims,
    PipelineSettings,
    analysis_window,
    apply_taps,
    enhance_offline,
    forward_with_intermediates,
    istft_frames,
    online_normalize,
    spectrum_features,
    stft_frames,
)
from .train import TrainConfig, evaluate_si_sdr_gain, init_identity_start, time_domain_mse, train
from .weights_io import export_model, import_model, read_clcw, write_clcw

__version__ = "0.1.0"

__all__ = [
    "ClipPair",
    "CoeffNet",
    "ConfigError",
    "DataError",
    "FrameAffine",
    "NetDims",
    "PipelineSettings",
    "TrainConfig",
    "TrainError",
    "TrainerError",
    "analysis_window",
    "apply_taps",
    "enhance_offline",
    "evaluate_si_sdr_gain",
    "export_golden",
    "export_model",
    "forward_with_intermediates",
    "import_model",
    "init_identity_start",
    "istft_frames",
    "load_pairs",
    "online_normalize",
    "read_clcw",
    "segment_pairs",
    "spectrum_features",
    "stft_frames",
    "time_domain_mse",
    "train",
    "write_clcw",
]
