import numpy as np
import pytest
import torch

from clctrain import (
    CoeffNet,
    ConfigError,
    NetDims,
    PipelineSettings,
    analysis_window,
    apply_taps,
    enhance_offline,
    istft_frames,
    online_normalize,
    spectrum_features,
    stft_frames,
    time_domain_mse,
)
from conftest import TINY_DIMS, make_folded

TINY_SETTINGS = PipelineSettings(fft_size=14, hop=3, n_bins=8, clc_order=2)


def test_window_matches_closed_form():
    w = analysis_window(PipelineSettings(), dtype=torch.float64).numpy()
    k = np.arange(320)
    np.testing.assert_allclose(w, 0.54 - 0.46 * np.cos(2 * np.pi * k / 320), atol=1e-12)


def test_stft_matches_direct_rfft():
    settings = PipelineSettings()
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, 8000)
    window = analysis_window(settings, dtype=torch.float64)
    spec = stft_frames(torch.tensor(x).unsqueeze(0), settings, window).squeeze(0).numpy()
    w = window.numpy()
    for t in (0, 5, spec.shape[0] - 1):
        frame = x[t * settings.hop : t * settings.hop + settings.fft_size] * w
        np.testing.assert_allclose(spec[t], np.fft.rfft(frame), atol=1e-12)


def test_istft_reconstructs_everywhere():
    settings = PipelineSettings()
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, 16000)
    window = analysis_window(settings, dtype=torch.float64)
    xt = torch.tensor(x).unsqueeze(0)
    spec = stft_frames(xt, settings, window)
    y = istft_frames(spec, settings, window, length=len(x)).squeeze(0).numpy()
    np.testing.assert_allclose(y, x, atol=1e-12)


class TestOnlineNormalize:
    def test_first_frame_unit_magnitude(self):
        rng = np.random.default_rng(2)
        spec = torch.tensor(
            rng.standard_normal((1, 4, 8)) + 1j * rng.standard_normal((1, 4, 8))
        )
        out = online_normalize(spec, alpha=0.99)
        np.testing.assert_allclose(torch.abs(out[0, 0]).numpy(), 1.0, atol=1e-12)

    def test_phase_untouched(self):
        rng = np.random.default_rng(3)
        spec = torch.tensor(
            rng.standard_normal((1, 6, 5)) + 1j * rng.standard_normal((1, 6, 5))
        )
        out = online_normalize(spec, alpha=0.9)
        np.testing.assert_allclose(
            torch.angle(out).numpy(), torch.angle(spec).numpy(), atol=1e-12
        )

    def test_matches_hand_recursion(self):
        # one bin, magnitudes 2, 4, 1 at alpha 0.5:
        # mu0 = 2 -> out 1; mu1 = 0.5*2+0.5*4 = 3 -> 4/3; mu2 = 0.5*3+0.5*1 = 2 -> 0.5
        spec = torch.tensor([[[2.0 + 0j], [4.0 + 0j], [1.0 + 0j]]])
        out = online_normalize(spec, alpha=0.5).squeeze().numpy()
        np.testing.assert_allclose(out.real, [1.0, 4.0 / 3.0, 0.5], atol=1e-12)

    def test_zero_frames_hit_floor(self):
        spec = torch.zeros((1, 3, 4), dtype=torch.complex128)
        out = online_normalize(spec, alpha=0.99)
        assert torch.all(torch.isfinite(torch.view_as_real(out)))
        np.testing.assert_allclose(torch.abs(out).numpy(), 0.0)


class TestApplyTaps:
    def _spec(self, t=6, f=3, seed=4):
        rng = np.random.default_rng(seed)
        return torch.tensor(
            rng.standard_normal((1, t, f)) + 1j * rng.standard_normal((1, t, f))
        )

    def test_identity_tap_no_lookahead(self):
        spec = self._spec()
        coeffs = torch.zeros((1, 6, 2, 3), dtype=spec.dtype)
        coeffs[:, :, 0, :] = 1.0
        np.testing.assert_allclose(
            apply_taps(coeffs, spec, lookahead=0).numpy(), spec.numpy(), atol=1e-12
        )

    def test_identity_tap_with_lookahead(self):
        # with lookahead 1 the tap at index 1 selects the current frame
        spec = self._spec()
        coeffs = torch.zeros((1, 6, 2, 3), dtype=spec.dtype)
        coeffs[:, :, 1, :] = 1.0
        np.testing.assert_allclose(
            apply_taps(coeffs, spec, lookahead=1).numpy(), spec.numpy(), atol=1e-12
        )

    def test_past_tap_shifts(self):
        spec = self._spec()
        coeffs = torch.zeros((1, 6, 2, 3), dtype=spec.dtype)
        coeffs[:, :, 1, :] = 1.0
        out = apply_taps(coeffs, spec, lookahead=0)
        np.testing.assert_allclose(out[:, 1:].numpy(), spec[:, :-1].numpy(), atol=1e-12)
        np.testing.assert_allclose(out[:, 0].numpy(), 0.0)

    def test_linear_combination(self):
        spec = self._spec()
        rng = np.random.default_rng(5)
        coeffs = torch.tensor(
            rng.standard_normal((1, 6, 2, 3)) + 1j * rng.standard_normal((1, 6, 2, 3))
        )
        out = apply_taps(coeffs, spec, lookahead=0)
        t = 3
        want = coeffs[0, t, 0] * spec[0, t] + coeffs[0, t, 1] * spec[0, t - 1]
        np.testing.assert_allclose(out[0, t].numpy(), want.numpy(), atol=1e-12)


def test_enhance_offline_zero_model_is_silence():
    model = CoeffNet(TINY_DIMS)
    with torch.no_grad():
        for p in model.parameters():
            p.zero_()
    model = model.fold()
    noisy = torch.rand(2, 600) - 0.5
    with torch.no_grad():
        out = enhance_offline(model, noisy, TINY_SETTINGS)
    assert out.shape == noisy.shape
    np.testing.assert_allclose(out.numpy(), 0.0, atol=1e-7)


def test_enhance_offline_rejects_dim_mismatch():
    model = CoeffNet(NetDims(n_bins=8, clc_order=3, hidden=4, gru_layers=1))
    with pytest.raises(ConfigError):
        enhance_offline(model.fold(), torch.zeros(1, 600), TINY_SETTINGS)


def test_enhance_matches_streaming_engine():
    """Replica output equals the primary engine's (delayed) streaming output."""
    clcdenoise = pytest.importorskip("clcdenoise")
    from clctrain import export_model

    model = make_folded(NetDims(), seed=3)
    settings = PipelineSettings()
    path = "/tmp/replica_vs_engine.clcw"
    export_model(path, model, settings)

    rng = np.random.default_rng(6)
    x = rng.uniform(-0.5, 0.5, 16000).astype(np.float32)
    with torch.no_grad():
        rep = enhance_offline(model, torch.from_numpy(x).unsqueeze(0), settings)
    rep = rep.squeeze(0).numpy()

    _, w = clcdenoise.load_weights(path)
    eng = clcdenoise.Enhancer(w)
    out = eng.process(clcdenoise.AudioChunk(x.astype(np.float64), 16000)).samples
    d = eng.delay_samples
    assert np.max(np.abs(out[d:] - rep[: len(out) - d])) <= 1e-4


def test_time_domain_mse():
    a = torch.tensor([1.0, 2.0, 3.0])
    b = torch.tensor([1.0, 1.0, 1.0])
    assert float(time_domain_mse(a, b)) == pytest.approx(5.0 / 3.0)
