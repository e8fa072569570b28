"""Streaming STFT analysis, online unit-norm normalization, and WOLA synthesis.

The front end frames 16 kHz mono audio with a 20 ms periodic Hamming window
at 75 % overlap (320-sample window, 80-sample hop), producing 161-bin
one-sided spectra.  Synthesis windows the inverse FFT again and overlap-adds,
dividing by the steady-state sum-of-squared-windows envelope, so that
analyze -> synthesize reconstructs the input exactly on the fully overlapped
interior.  All three stages are single-stream stateful objects: feed them any
chunking of a signal and the emitted frames/samples are identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import get_window

from .errors import ConfigError, DataError

PIPELINE_SAMPLE_RATE = 16000

# Floor on the running mean-magnitude estimate; keeps division well-defined
# on digital silence.
MU_FLOOR = 1e-10

DEFAULT_ALPHA = 0.99


@dataclass
class AudioChunk:
    """Mono float PCM in [-1, 1] plus its sample rate."""

    samples: np.ndarray
    sample_rate: int = PIPELINE_SAMPLE_RATE

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"expected mono 1-D samples, got shape {self.samples.shape}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def check_pipeline_input(chunk: AudioChunk) -> None:
    """Validate a chunk at a pipeline entry point."""
    if chunk.sample_rate != PIPELINE_SAMPLE_RATE:
        raise ConfigError(
            f"pipeline runs at {PIPELINE_SAMPLE_RATE} Hz, got {chunk.sample_rate} Hz"
        )
    if not np.all(np.isfinite(chunk.samples)):
        raise DataError("input samples contain non-finite values")


@dataclass
class StftConfig:
    """Analysis/synthesis geometry. Defaults: 20 ms window, 75 % overlap, 161 bins."""

    window_len: int = 320
    hop: int = 80
    fft_size: int = 320
    window: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.fft_size != self.window_len:
            raise ConfigError("fft_size must equal window_len (no zero padding)")
        if self.hop <= 0 or self.window_len != 4 * self.hop:
            raise ConfigError("hop must be window_len / 4 (75 % overlap)")
        # Periodic (DFT-even) Hamming; strictly positive everywhere, which the
        # WOLA envelope division relies on.
        self.window = get_window("hamming", self.window_len, fftbins=True)
        assert np.all(self.window > 0)

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    @property
    def overlap(self) -> int:
        return self.window_len // self.hop


class StftAnalyzer:
    """Streaming analysis: buffers input, emits one spectrum per completed hop.

    The first frame covers input samples [0, window_len); each later frame
    advances by one hop. Whatever tail does not yet complete a frame is
    retained for the next call.
    """

    def __init__(self, config: StftConfig | None = None):
        self.config = config or StftConfig()
        self._carry = np.zeros(0, dtype=np.float64)

    def reset(self) -> None:
        self._carry = np.zeros(0, dtype=np.float64)

    @property
    def buffered(self) -> int:
        return len(self._carry)

    def process(self, samples: AudioChunk | np.ndarray) -> np.ndarray:
        """Consume samples, return an (n_frames, n_bins) complex array (possibly empty)."""
        if isinstance(samples, AudioChunk):
            check_pipeline_input(samples)
            samples = samples.samples
        else:
            samples = np.asarray(samples, dtype=np.float64)
            if not np.all(np.isfinite(samples)):
                raise DataError("input samples contain non-finite values")
        cfg = self.config
        buf = np.concatenate([self._carry, samples]) if len(self._carry) else samples
        n = len(buf)
        if n < cfg.window_len:
            self._carry = buf.copy() if buf is samples else buf
            return np.zeros((0, cfg.n_bins), dtype=np.complex128)
        n_frames = (n - cfg.window_len) // cfg.hop + 1
        frames = np.empty((n_frames, cfg.window_len), dtype=np.float64)
        for t in range(n_frames):
            start = t * cfg.hop
            np.multiply(buf[start : start + cfg.window_len], cfg.window, out=frames[t])
        spectra = np.fft.rfft(frames, n=cfg.fft_size, axis=1)
        self._carry = buf[n_frames * cfg.hop :].copy()
        return spectra


class StftSynthesizer:
    """Streaming WOLA synthesis with perfect reconstruction on the interior.

    Each spectrum is inverse-transformed, windowed again, and overlap-added.
    The completed hop-length segment is divided by the steady-state envelope
    (the sum of squared windows across the overlapping hops), so once a
    sample has received all of its window contributions it reproduces the
    analyzed signal exactly.  The first window_len - hop output samples are a
    partial-overlap transient by construction.
    """

    def __init__(self, config: StftConfig | None = None):
        self.config = config or StftConfig()
        cfg = self.config
        w2 = cfg.window * cfg.window
        # envelope[m] = sum_j w^2[m + j*hop], constant for this window/overlap
        self._envelope = w2.reshape(cfg.overlap, cfg.hop).sum(axis=0)
        assert np.all(self._envelope > 0)
        self._acc = np.zeros(cfg.window_len, dtype=np.float64)

    def reset(self) -> None:
        self._acc[:] = 0.0

    def process(self, spectra: np.ndarray) -> np.ndarray:
        """Overlap-add one spectrum (n_bins,) or a batch (T, n_bins); return hop-sized output."""
        cfg = self.config
        spectra = np.atleast_2d(np.asarray(spectra))
        if spectra.shape[1] != cfg.n_bins:
            raise ValueError(f"expected {cfg.n_bins} bins, got {spectra.shape[1]}")
        out = np.empty(spectra.shape[0] * cfg.hop, dtype=np.float64)
        for t in range(spectra.shape[0]):
            frame = np.fft.irfft(spectra[t], n=cfg.fft_size)
            self._acc += frame * cfg.window
            np.divide(self._acc[: cfg.hop], self._envelope, out=out[t * cfg.hop : (t + 1) * cfg.hop])
            self._acc[: cfg.window_len - cfg.hop] = self._acc[cfg.hop :]
            self._acc[cfg.window_len - cfg.hop :] = 0.0
        return out


class OnlineNormalizer:
    """Per-bin unit-norm scaling by an exponentially smoothed mean magnitude.

    The running estimate is seeded from the first frame's magnitude (floored
    at MU_FLOOR) and thereafter updated with the current frame *before*
    dividing, so a constant-magnitude input is unit scale from frame zero.
    Phase is never altered: the divisor is positive real.
    """

    def __init__(self, n_bins: int = 161, alpha: float = DEFAULT_ALPHA):
        if not 0.0 < alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
        self.n_bins = n_bins
        self.alpha = alpha
        self._mu = np.full(n_bins, MU_FLOOR, dtype=np.float64)
        self._initialized = False

    def reset(self) -> None:
        self._mu[:] = MU_FLOOR
        self._initialized = False

    @property
    def mean_magnitude(self) -> np.ndarray:
        """Current running estimate (read-only view)."""
        return self._mu

    def process_frame(self, spectrum: np.ndarray) -> np.ndarray:
        if spectrum.shape != (self.n_bins,):
            raise ValueError(f"expected ({self.n_bins},) spectrum, got {spectrum.shape}")
        mag = np.abs(spectrum)
        if not self._initialized:
            np.maximum(mag, MU_FLOOR, out=self._mu)
            self._initialized = True
        else:
            self._mu *= self.alpha
            self._mu += (1.0 - self.alpha) * mag
            np.maximum(self._mu, MU_FLOOR, out=self._mu)
        return spectrum / self._mu

    def process(self, spectra: np.ndarray) -> np.ndarray:
        """Normalize a (T, n_bins) batch frame by frame."""
        spectra = np.atleast_2d(np.asarray(spectra))
        out = np.empty_like(spectra)
        for t in range(spectra.shape[0]):
            out[t] = self.process_frame(spectra[t])
        return out
