"""Streaming single-channel speech enhancement with per-bin complex linear coding."""

from .clc import (
    ClcConfig,
    SpectrumHistory,
    apply_coeffs,
    history_matrix,
    identity_coeffs,
    ls_optimal,
    ls_residual,
)
from .dsp import (
    DEFAULT_ALPHA,
    PIPELINE_SAMPLE_RATE,
    AudioChunk,
    OnlineNormalizer,
    StftAnalyzer,
    StftConfig,
    StftSynthesizer,
)
from .engine import Enhancer, LatencyReport, benchmark
from .errors import ClcError, ConfigError, DataError, FormatError
from .metrics import EvalResult, align_and_eval, rmse, si_sdr
from .mixer import MixResult, MixSpec, build_testset, measure_snr, mix
from .nn import (
    GruState,
    ModelConfig,
    ModelWeights,
    StreamMeta,
    fold_batchnorm,
    forward,
    random_weights,
    zero_weights,
)
from .weights_io import load_weights, save_weights

__version__ = "0.1.0"

__all__ = [
    "AudioChunk",
    "ClcConfig",
    "ClcError",
    "ConfigError",
    "DataError",
    "DEFAULT_ALPHA",
    "Enhancer",
    "EvalResult",
    "FormatError",
    "GruState",
    "LatencyReport",
    "MixResult",
    "MixSpec",
    "ModelConfig",
    "ModelWeights",
    "OnlineNormalizer",
    "PIPELINE_SAMPLE_RATE",
    "SpectrumHistory",
    "StftAnalyzer",
    "StftConfig",
    "StftSynthesizer",
    "StreamMeta",
    "align_and_eval",
    "apply_coeffs",
    "benchmark",
    "build_testset",
    "fold_batchnorm",
    "forward",
    "history_matrix",
    "identity_coeffs",
    "load_weights",
    "ls_optimal",
    "ls_residual",
    "measure_snr",
    "mix",
    "random_weights",
    "rmse",
    "save_weights",
    "si_sdr",
    "zero_weights",
]
