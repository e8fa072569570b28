"""Causal streaming enhancement engine.

Pipeline per arriving frame: analyze -> normalize -> predict coefficients ->
combine the raw spectrum history -> synthesize -> clamp.  The analyzer is
pre-loaded with window_len - hop zeros and the output queue with
hop * (1 + lookahead) zeros, which together pin the end-to-end latency to
exactly window_len + lookahead * hop samples while keeping a strict
one-sample-out-per-sample-in contract for any chunking of the input.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .clc import SpectrumHistory, apply_coeffs
from .dsp import (
    PIPELINE_SAMPLE_RATE,
    AudioChunk,
    OnlineNormalizer,
    StftAnalyzer,
    StftConfig,
    StftSynthesizer,
    check_pipeline_input,
)
from .errors import ConfigError
from .nn import GruState, ModelWeights, forward

_FIFO_CAPACITY = 1024
BENCH_WARMUP_FRAMES = 25

CoeffHook = Callable[[np.ndarray], np.ndarray]


class _SampleFifo:
    """Fixed-capacity ring of float64 samples; no allocation after construction."""

    def __init__(self, capacity: int):
        self._buf = np.zeros(capacity, dtype=np.float64)
        self._head = 0
        self._count = 0

    def __len__(self) -> int:
        return self._count

    def clear(self) -> None:
        self._head = 0
        self._count = 0

    def push(self, block: np.ndarray) -> None:
        n = len(block)
        cap = len(self._buf)
        if self._count + n > cap:
            raise ValueError("sample fifo overflow")
        tail = (self._head + self._count) % cap
        first = min(n, cap - tail)
        self._buf[tail : tail + first] = block[:first]
        if first < n:
            self._buf[: n - first] = block[first:]
        self._count += n

    def push_zeros(self, n: int) -> None:
        cap = len(self._buf)
        tail = (self._head + self._count) % cap
        first = min(n, cap - tail)
        self._buf[tail : tail + first] = 0.0
        if first < n:
            self._buf[: n - first] = 0.0
        self._count += n

    def pop_into(self, out: np.ndarray) -> None:
        n = len(out)
        if n > self._count:
            raise ValueError("sample fifo underflow")
        cap = len(self._buf)
        first = min(n, cap - self._head)
        out[:first] = self._buf[self._head : self._head + first]
        if first < n:
            out[first:] = self._buf[: n - first]
        self._head = (self._head + n) % cap
        self._count -= n


class Enhancer:
    """One streaming enhancement channel.

    Single-threaded per instance; several Enhancers may share one immutable
    ModelWeights.  When coeff_hook is given it replaces the network: it is
    called with each normalized spectrum and must return an
    (order, n_bins) complex coefficient array.
    """

    def __init__(self, weights: ModelWeights, coeff_hook: CoeffHook | None = None):
        meta = weights.meta
        if meta.sample_rate != PIPELINE_SAMPLE_RATE:
            raise ConfigError(
                f"engine runs at {PIPELINE_SAMPLE_RATE} Hz, weights expect {meta.sample_rate}"
            )
        if meta.lookahead < 0:
            raise ConfigError("negative lookahead (prediction mode) is not supported")
        if meta.lookahead >= meta.clc_order:
            raise ConfigError(
                f"lookahead {meta.lookahead} must be < clc_order {meta.clc_order}"
            )
        self.weights = weights
        self.coeff_hook = coeff_hook
        self.stft = StftConfig(window_len=meta.fft_size, hop=meta.hop, fft_size=meta.fft_size)
        if self.stft.n_bins != meta.n_bins:
            raise ConfigError(
                f"meta.n_bins {meta.n_bins} inconsistent with fft_size {meta.fft_size}"
            )
        self.lookahead = meta.lookahead
        self._analyzer = StftAnalyzer(self.stft)
        self._synthesizer = StftSynthesizer(self.stft)
        self._normalizer = OnlineNormalizer(meta.n_bins, meta.alpha)
        self._history = SpectrumHistory(meta.clc_order, meta.n_bins)
        self._gru_state = GruState.zeros(weights)
        self._pending: deque[np.ndarray] = deque()
        self._fifo = _SampleFifo(_FIFO_CAPACITY)
        self._prime_samples = np.zeros(self.stft.window_len - self.stft.hop, dtype=np.float64)
        self.clipped_samples = 0
        self._prime()

    @property
    def delay_samples(self) -> int:
        """Algorithmic latency: output lags input by exactly this many samples."""
        return self.stft.window_len + self.lookahead * self.stft.hop

    def _prime(self) -> None:
        self._analyzer.process(self._prime_samples)
        self._fifo.push_zeros(self.stft.hop * (1 + self.lookahead))

    def reset(self) -> None:
        """Drop all stream state; the next process() behaves like a fresh instance."""
        self._analyzer.reset()
        self._synthesizer.reset()
        self._normalizer.reset()
        self._history.reset()
        self._gru_state.reset()
        self._pending.clear()
        self._fifo.clear()
        self.clipped_samples = 0
        self._prime()

    def _step_frame(self, spectrum: np.ndarray) -> None:
        normalized = self._normalizer.process_frame(spectrum)
        if self.coeff_hook is not None:
            coeffs = self.coeff_hook(normalized)
            if coeffs.shape != (self._history.order, self._history.n_bins):
                raise ValueError(
                    f"coeff_hook returned shape {coeffs.shape}, "
                    f"expected {(self._history.order, self._history.n_bins)}"
                )
        else:
            coeffs, self._gru_state = forward(self.weights, self._gru_state, normalized)
        self._pending.append(coeffs)
        self._history.push(spectrum)
        if len(self._pending) > self.lookahead:
            enhanced = apply_coeffs(self._pending.popleft(), self._history)
            block = self._synthesizer.process(enhanced[np.newaxis, :])
            clipped = np.count_nonzero((block < -1.0) | (block > 1.0))
            if clipped:
                self.clipped_samples += int(clipped)
                np.clip(block, -1.0, 1.0, out=block)
            self._fifo.push(block)

    def process(self, chunk: AudioChunk) -> AudioChunk:
        """Enhance a chunk of any length; returns exactly len(chunk) samples."""
        check_pipeline_input(chunk)
        x = chunk.samples
        out = np.empty(len(x), dtype=np.float64)
        hop = self.stft.hop
        pos = 0
        while pos < len(x):
            n = min(hop, len(x) - pos)
            for spectrum in self._analyzer.process(x[pos : pos + n]):
                self._step_frame(spectrum)
            self._fifo.pop_into(out[pos : pos + n])
            pos += n
        return AudioChunk(out, PIPELINE_SAMPLE_RATE)


@dataclass
class LatencyReport:
    mean_us: float
    p95_us: float
    max_us: float
    rtf: float
    frames: int
    clipped_samples: int


def benchmark(
    enhancer: Enhancer, seconds: float, seed: int = 0, warmup_frames: int = BENCH_WARMUP_FRAMES
) -> LatencyReport:
    """Stream seeded noise through the enhancer, timing every hop.

    The first warmup_frames hops are excluded from the statistics.  RTF is the
    mean per-hop wall time divided by the hop duration (5 ms), so RTF < 1
    means faster than real time.
    """
    if seconds < 1:
        raise ValueError("benchmark needs at least 1 second of audio")
    hop = enhancer.stft.hop
    rate = PIPELINE_SAMPLE_RATE
    n_hops = int(round(seconds * rate / hop))
    if n_hops <= warmup_frames:
        raise ValueError("benchmark run shorter than the warm-up period")
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-0.5, 0.5, size=n_hops * hop)
    enhancer.reset()
    times_ns = np.empty(n_hops, dtype=np.int64)
    for i in range(n_hops):
        chunk = AudioChunk(noise[i * hop : (i + 1) * hop], rate)
        t0 = time.perf_counter_ns()
        enhancer.process(chunk)
        times_ns[i] = time.perf_counter_ns() - t0
    timed_us = times_ns[warmup_frames:] / 1000.0
    hop_us = hop / rate * 1e6
    mean_us = float(timed_us.mean())
    return LatencyReport(
        mean_us=mean_us,
        p95_us=float(np.percentile(timed_us, 95)),
        max_us=float(timed_us.max()),
        rtf=mean_us / hop_us,
        frames=len(timed_us),
        clipped_samples=enhancer.clipped_samples,
    )
