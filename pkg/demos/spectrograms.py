"""
Broadband and narrowband spectrograms
=====================================

A short window resolves individual glottal pulses (vertical striations),
a long window resolves the pitch harmonics (horizontal strips). Both are
computed for the same synthetic vowel and summarized in text.
"""

import numpy as np

from formantrack.signal_io import SynthVowelSpec, gen_vowel
from formantrack.spectrum import SpectrogramConfig, stft_spectrogram

x = gen_vowel(SynthVowelSpec(100.0, [(500.0, 60.0), (1500.0, 90.0), (2500.0, 120.0)], 0.5), 8000.0)

for preset in ("broadband", "narrowband"):
    cfg = SpectrogramConfig.preset(preset)
    spec = stft_spectrogram(x, cfg)
    mean_db = spec.to_db().mean(axis=1)
    print(f"{preset}: window {cfg.window.size}, hop {cfg.hop}, {spec.magnitudes.shape[1]} frames, "
          f"bin spacing {spec.freqs_hz[1]:.2f} Hz")

    # local maxima of the time-averaged spectrum below 1 kHz: harmonics
    # at multiples of 100 Hz only show up with the long window
    low = spec.freqs_hz < 1000
    m = mean_db[low]
    peaks = np.flatnonzero((m[1:-1] > m[:-2]) & (m[1:-1] > m[2:])) + 1
    strong = peaks[m[peaks] > m.max() - 30]
    print("  spectral peaks below 1 kHz (Hz):", np.round(spec.freqs_hz[low][strong]))
