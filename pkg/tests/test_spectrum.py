import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from formantrack.lpc import make_window
from formantrack.signal_io import Signal, gen_sinusoid
from formantrack.spectrum import SpectrogramConfig, fft, stft_spectrogram


def dft(x):
    """O(n^2) reference transform."""
    n = len(x)
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


@pytest.mark.parametrize("n", [1, 2, 4, 8, 64, 256])
def test_fft_matches_dft(rng, n):
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    np.testing.assert_allclose(fft(x), dft(x), rtol=0, atol=1e-9)


def test_fft_batched(rng):
    x = rng.normal(size=(5, 32))
    np.testing.assert_allclose(fft(x), np.stack([dft(r) for r in x]), atol=1e-10)


def test_fft_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        fft(np.ones(12))


def test_blackman_formula():
    n = np.arange(64)
    ref = 0.42 - 0.5 * np.cos(2 * np.pi * n / 63) + 0.08 * np.cos(4 * np.pi * n / 63)
    np.testing.assert_allclose(make_window("blackman", 64), ref, atol=1e-15)


def test_presets():
    bb = SpectrogramConfig.preset("broadband")
    nb = SpectrogramConfig.preset("narrowband")
    assert (bb.nfft, len(bb.window), bb.hop) == (1024, 64, 16)
    assert (nb.nfft, len(nb.window), nb.hop) == (1024, 256, 64)
    with pytest.raises(ValueError):
        SpectrogramConfig.preset("wide")


def test_config_validation():
    with pytest.raises(ValueError):
        SpectrogramConfig(1000, np.ones(64), 16)
    with pytest.raises(ValueError):
        SpectrogramConfig(32, np.ones(64), 16)


def test_dc_in_bin_zero():
    cfg = SpectrogramConfig(64, np.ones(64), 64)
    spec = stft_spectrogram(Signal(np.full(256, 3.0)), cfg)
    np.testing.assert_allclose(spec.magnitudes[0], 3.0 * 64)
    np.testing.assert_allclose(spec.magnitudes[1:], 0, atol=1e-9)


def test_tone_ridge():
    x = gen_sinusoid(1.0, 2 * np.pi * 1000 / 8000, 4000, sample_rate_hz=8000)
    spec = stft_spectrogram(x, SpectrogramConfig.preset("broadband"))
    peaks = np.argmax(spec.magnitudes, axis=0)
    assert np.all(np.abs(peaks - 128) <= 1)
    assert spec.freqs_hz[128] == 1000.0


def test_times_and_shape():
    spec = stft_spectrogram(Signal(np.ones(200), 8000), SpectrogramConfig.preset("broadband"))
    assert spec.magnitudes.shape == (513, 1 + (200 - 64) // 16)
    np.testing.assert_allclose(spec.times_s[:2], [32 / 8000, 48 / 8000])


@given(st.floats(0.01, 1000))
def test_linear_scaling(c):
    x = Signal(np.random.default_rng(3).normal(size=300))
    cfg = SpectrogramConfig.preset("broadband")
    a = stft_spectrogram(x, cfg).magnitudes
    b = stft_spectrogram(x.scaled(c), cfg).magnitudes
    np.testing.assert_allclose(b, c * a, rtol=1e-12, atol=1e-12 * c)


def test_short_signal():
    with pytest.raises(ValueError):
        stft_spectrogram(Signal(np.ones(10)), SpectrogramConfig.preset("broadband"))


def test_csv_and_db():
    spec = stft_spectrogram(Signal(np.ones(128)), SpectrogramConfig(64, np.ones(64), 64))
    buf = io.StringIO()
    spec.write_csv(buf, db=True)
    rows = buf.getvalue().splitlines()
    assert rows[0].startswith("freq_hz,")
    assert len(rows) == 1 + 33
    assert float(rows[2].split(",")[1]) == -120.0
