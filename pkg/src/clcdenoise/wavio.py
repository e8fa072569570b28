"""Mono WAV read/write limited to what the pipeline accepts."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import FormatError


def read_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a mono PCM16 or float32 WAV; returns (float64 samples in [-1, 1], rate)."""
    try:
        rate, data = wavfile.read(str(path))
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise FormatError(f"{path}: not a readable WAV file ({exc})") from exc
    if data.ndim != 1:
        raise FormatError(f"{path}: expected mono audio, got {data.shape[1]} channels")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise FormatError(f"{path}: unsupported sample format {data.dtype}, need int16 or float32")
    return samples, int(rate)


def write_wav_pcm16(path: str | Path, samples: np.ndarray, sample_rate: int) -> None:
    """Write float samples as PCM16, clipping anything outside [-1, 1]."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("write_wav_pcm16 expects a 1-D signal")
    if not np.all(np.isfinite(x)):
        raise ValueError("write_wav_pcm16 samples must be finite")
    ints = np.clip(np.rint(x * 32768.0), -32768, 32767).astype("<i2")
    wavfile.write(str(path), sample_rate, ints)


def write_wav_float32(path: str | Path, samples: np.ndarray, sample_rate: int) -> None:
    x = np.asarray(samples, dtype=np.float32)
    if x.ndim != 1:
        raise ValueError("write_wav_float32 expects a 1-D signal")
    wavfile.write(str(path), sample_rate, x)
