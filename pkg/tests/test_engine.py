"""Streaming engine: latency, equivalence, clamping, benchmarking."""

import gc
import tracemalloc

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clcdenoise import (
    AudioChunk,
    ConfigError,
    DataError,
    Enhancer,
    StreamMeta,
    benchmark,
    identity_coeffs,
    random_weights,
    zero_weights,
)


def identity_enhancer(lookahead=0):
    meta = StreamMeta(lookahead=lookahead)
    w = zero_weights(meta=meta)
    hook = lambda _: identity_coeffs(5, 161, tap=lookahead)
    return Enhancer(w, coeff_hook=hook)


def run_stream(enhancer, x, chunk_size):
    out = np.empty(len(x))
    for i in range(0, len(x), chunk_size):
        part = enhancer.process(AudioChunk(x[i : i + chunk_size], 16000))
        out[i : i + len(part)] = part.samples
    return out


def measured_delay(x, y):
    n = len(x) + len(y)
    xc = np.fft.irfft(np.fft.rfft(y, n) * np.conj(np.fft.rfft(x, n)), n)
    return int(np.argmax(xc))


class TestIdentityPassthrough:
    def test_exact_delay_and_content(self, rng):
        x = rng.uniform(-0.5, 0.5, 16000)
        e = identity_enhancer()
        y = e.process(AudioChunk(x, 16000)).samples
        assert len(y) == len(x)
        assert np.max(np.abs(y[320:] - x[:-320])) <= 1e-6
        # leading samples are the delay gap: primed zeros plus FFT round-off
        assert np.max(np.abs(y[:320])) <= 1e-12
        assert measured_delay(x, y) == 320
        assert e.delay_samples == 320

    def test_lookahead_adds_hop_latency(self, rng):
        x = rng.uniform(-0.5, 0.5, 8000)
        for lookahead in (1, 2, 4):
            e = identity_enhancer(lookahead)
            d = 320 + 80 * lookahead
            assert e.delay_samples == d
            y = e.process(AudioChunk(x, 16000)).samples
            assert np.max(np.abs(y[d:] - x[:-d])) <= 1e-6
            assert measured_delay(x, y) == d


class TestSilence:
    def test_zero_model_silence_to_silence(self):
        e = Enhancer(zero_weights())
        y = e.process(AudioChunk(np.zeros(4000), 16000)).samples
        np.testing.assert_array_equal(y, 0.0)

    def test_zero_model_any_input_to_silence(self, rng):
        # zero coefficients null the combination regardless of input
        e = Enhancer(zero_weights())
        y = e.process(AudioChunk(rng.uniform(-1, 1, 4000), 16000)).samples
        np.testing.assert_array_equal(y, 0.0)


class TestStreamingEquivalence:
    def test_standard_chunk_sizes(self, rng):
        x = rng.uniform(-0.5, 0.5, 5 * 16000)
        w = random_weights(seed=9)
        whole = Enhancer(w).process(AudioChunk(x, 16000)).samples
        for cs in (1, 80, 160, 1000):
            out = run_stream(Enhancer(w), x, cs)
            assert np.max(np.abs(out - whole)) <= 1e-6, f"chunk size {cs}"

    @given(seed=st.integers(0, 2**31), chunk=st.integers(1, 500))
    @settings(max_examples=12, deadline=None)
    def test_random_chunkings(self, seed, chunk):
        rng = np.random.default_rng(seed)
        x = rng.uniform(-0.5, 0.5, 6000)
        e = identity_enhancer()
        whole = identity_enhancer().process(AudioChunk(x, 16000)).samples
        np.testing.assert_allclose(run_stream(e, x, chunk), whole, atol=1e-9)

    def test_empty_chunk(self):
        e = identity_enhancer()
        out = e.process(AudioChunk(np.zeros(0), 16000))
        assert len(out) == 0


class TestReset:
    def test_repeatable_runs(self, rng):
        x = rng.uniform(-0.5, 0.5, 4000)
        e = Enhancer(random_weights(seed=2))
        first = e.process(AudioChunk(x, 16000)).samples.copy()
        e.reset()
        second = e.process(AudioChunk(x, 16000)).samples
        np.testing.assert_array_equal(first, second)

    def test_reset_on_fresh_is_noop(self, rng):
        x = rng.uniform(-0.5, 0.5, 2000)
        w = random_weights(seed=2)
        a = Enhancer(w)
        b = Enhancer(w)
        b.reset()
        np.testing.assert_array_equal(
            a.process(AudioChunk(x, 16000)).samples, b.process(AudioChunk(x, 16000)).samples
        )

    def test_reset_clears_clip_counter(self):
        e = Enhancer(zero_weights(), coeff_hook=lambda _: 3.0 * identity_coeffs(5, 161))
        t = np.arange(8000) / 16000.0
        e.process(AudioChunk(0.9 * np.sin(2 * np.pi * 200 * t), 16000))
        assert e.clipped_samples > 0
        e.reset()
        assert e.clipped_samples == 0


class TestClamp:
    def test_output_clamped_and_counted(self):
        # a 3x identity gain drives the signal well past full scale
        e = Enhancer(zero_weights(), coeff_hook=lambda _: 3.0 * identity_coeffs(5, 161))
        t = np.arange(8000) / 16000.0
        y = e.process(AudioChunk(0.9 * np.sin(2 * np.pi * 200 * t), 16000)).samples
        assert e.clipped_samples > 0
        assert np.max(y) <= 1.0
        assert np.min(y) >= -1.0

    def test_no_clipping_on_quiet_signal(self, rng):
        e = identity_enhancer()
        e.process(AudioChunk(rng.uniform(-0.5, 0.5, 4000), 16000))
        assert e.clipped_samples == 0


class TestValidation:
    def test_wrong_sample_rate(self):
        e = Enhancer(zero_weights())
        with pytest.raises(ConfigError):
            e.process(AudioChunk(np.zeros(100), 48000))

    def test_non_finite_input(self):
        e = Enhancer(zero_weights())
        with pytest.raises(DataError):
            e.process(AudioChunk(np.array([0.0, np.inf]), 16000))

    def test_weights_rate_checked(self):
        meta = StreamMeta(sample_rate=8000, fft_size=320, hop=80, n_bins=161)
        with pytest.raises(ConfigError):
            Enhancer(zero_weights(meta=meta))

    def test_lookahead_bounds_checked(self):
        with pytest.raises(ConfigError):
            Enhancer(zero_weights(meta=StreamMeta(lookahead=5)))
        with pytest.raises(ConfigError):
            Enhancer(zero_weights(meta=StreamMeta(lookahead=-1)))

    def test_hook_shape_checked(self):
        e = Enhancer(zero_weights(), coeff_hook=lambda _: np.zeros((2, 161), dtype=complex))
        with pytest.raises(ValueError):
            e.process(AudioChunk(np.zeros(400), 16000))


class TestBenchmark:
    def test_report_fields(self):
        e = Enhancer(random_weights(seed=0))
        rep = benchmark(e, seconds=1)
        assert rep.frames == 200 - 25
        assert rep.mean_us > 0
        assert rep.max_us >= rep.p95_us
        assert rep.rtf == pytest.approx(rep.mean_us / 5000.0, rel=1e-12)
        assert rep.clipped_samples >= 0

    def test_minimum_duration_enforced(self):
        with pytest.raises(ValueError):
            benchmark(Enhancer(zero_weights()), seconds=0.5)

    def test_faster_than_real_time(self):
        rep = benchmark(Enhancer(random_weights(seed=0)), seconds=2)
        assert rep.rtf < 1.0


class TestAllocationStability:
    def test_steady_state_no_growth(self):
        # net traced allocations over a 1000-frame block settle to zero once
        # caches and freelists are warm
        e = Enhancer(random_weights(seed=0))
        rng = np.random.default_rng(0)
        chunk = AudioChunk(rng.uniform(-0.5, 0.5, 80), 16000)

        def run_block(n=1000):
            for _ in range(n):
                e.process(chunk)

        run_block()
        tracemalloc.start()
        deltas = []
        gc.collect()
        prev = tracemalloc.get_traced_memory()[0]
        for _ in range(4):
            run_block()
            gc.collect()
            now = tracemalloc.get_traced_memory()[0]
            deltas.append(now - prev)
            prev = now
        tracemalloc.stop()
        assert deltas[-1] == 0, f"per-block allocation deltas: {deltas}"
