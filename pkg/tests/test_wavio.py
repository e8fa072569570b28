"""WAV reading and writing restricted to the pipeline's formats."""

import numpy as np
import pytest
from scipy.io import wavfile

from clcdenoise import FormatError
from clcdenoise.wavio import read_wav, write_wav_float32, write_wav_pcm16


class TestPcm16:
    def test_round_trip_within_quantization(self, tmp_path, rng):
        x = rng.uniform(-0.9, 0.9, 4000)
        p = tmp_path / "x.wav"
        write_wav_pcm16(p, x, 16000)
        back, rate = read_wav(p)
        assert rate == 16000
        assert back.dtype == np.float64
        assert np.max(np.abs(back - x)) <= 1.0 / 32768

    def test_write_is_deterministic(self, tmp_path, rng):
        x = rng.uniform(-1, 1, 1000)
        write_wav_pcm16(tmp_path / "a.wav", x, 16000)
        write_wav_pcm16(tmp_path / "b.wav", x, 16000)
        assert (tmp_path / "a.wav").read_bytes() == (tmp_path / "b.wav").read_bytes()

    def test_clipping_on_write(self, tmp_path):
        write_wav_pcm16(tmp_path / "c.wav", np.array([1.5, -1.5, 0.0]), 16000)
        _, data = wavfile.read(str(tmp_path / "c.wav"))
        assert list(data) == [32767, -32768, 0]

    def test_quantization_rule(self, tmp_path):
        # round-to-nearest of x*32768
        write_wav_pcm16(tmp_path / "q.wav", np.array([0.5, -0.25]), 16000)
        _, data = wavfile.read(str(tmp_path / "q.wav"))
        assert list(data) == [16384, -8192]

    def test_non_finite_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_wav_pcm16(tmp_path / "x.wav", np.array([np.nan]), 16000)


class TestFloat32:
    def test_round_trip_exact(self, tmp_path, rng):
        x = rng.uniform(-1, 1, 1000).astype(np.float32)
        p = tmp_path / "f.wav"
        write_wav_float32(p, x, 16000)
        back, rate = read_wav(p)
        np.testing.assert_array_equal(back, x.astype(np.float64))


class TestRejections:
    def test_stereo_rejected(self, tmp_path):
        p = tmp_path / "st.wav"
        wavfile.write(str(p), 16000, np.zeros((100, 2), dtype=np.int16))
        with pytest.raises(FormatError, match="mono"):
            read_wav(p)

    def test_unsupported_dtype_rejected(self, tmp_path):
        p = tmp_path / "i32.wav"
        wavfile.write(str(p), 16000, np.zeros(100, dtype=np.int32))
        with pytest.raises(FormatError, match="int16 or float32"):
            read_wav(p)

    def test_not_a_wav(self, tmp_path):
        p = tmp_path / "junk.wav"
        p.write_bytes(b"this is not audio")
        with pytest.raises(FormatError):
            read_wav(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_wav(tmp_path / "nope.wav")
