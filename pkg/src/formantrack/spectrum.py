"""Radix-2 FFT and STFT magnitude spectrograms."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .lpc import make_window
from .signal_io import Signal


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def fft(x) -> np.ndarray:
    """Iterative decimation-in-time radix-2 FFT along the last axis.

    Length must be a power of two. Leading axes are transformed in parallel.
    """
    a = np.asarray(x, dtype=np.complex128)
    n = a.shape[-1]
    if not _is_pow2(n):
        raise ValueError(f"FFT length {n} is not a power of two")
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    a = a[..., rev].copy()

    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = a.reshape(a.shape[:-1] + (n // size, size))
        even = blocks[..., :half].copy()
        odd = blocks[..., half:] * tw
        blocks[..., :half] = even + odd
        blocks[..., half:] = even - odd
        a = blocks.reshape(a.shape)
        size *= 2
    return a


@dataclass(frozen=True)
class SpectrogramConfig:
    nfft: int
    window: np.ndarray
    hop: int

    def __post_init__(self):
        if not _is_pow2(self.nfft):
            raise ValueError(f"nfft {self.nfft} is not a power of two")
        if len(self.window) > self.nfft:
            raise ValueError("window longer than nfft")
        if self.hop < 1:
            raise ValueError("hop must be at least 1")

    @classmethod
    def preset(cls, name: str) -> "SpectrogramConfig":
        """``broadband`` (64-point Blackman) or ``narrowband`` (256-point), both
        1024-point FFT with 3/4 overlap."""
        lengths = {"broadband": 64, "narrowband": 256}
        if name not in lengths:
            raise ValueError(f"unknown preset {name!r}; choose broadband or narrowband")
        L = lengths[name]
        return cls.with_overlap(1024, make_window("blackman", L), round(3 / 4 * L))

    @classmethod
    def with_overlap(cls, nfft: int, window, overlap: int) -> "SpectrogramConfig":
        return cls(nfft, np.asarray(window, dtype=np.float64), len(window) - overlap)


@dataclass(frozen=True)
class Spectrogram:
    magnitudes: np.ndarray  # (nfft // 2 + 1, n_frames)
    freqs_hz: np.ndarray
    times_s: np.ndarray

    def to_db(self, floor_db: float = -120.0) -> np.ndarray:
        with np.errstate(divide="ignore"):
            db = 20 * np.log10(self.magnitudes)
        return np.maximum(db, floor_db)

    def write_csv(self, fh: TextIO, db: bool = False) -> None:
        """First row: frame times; first column: bin frequencies."""
        body = self.to_db() if db else self.magnitudes
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["freq_hz"] + [repr(float(t)) for t in self.times_s])
        for f, row in zip(self.freqs_hz, body):
            writer.writerow([repr(float(f))] + [repr(float(v)) for v in row])


def stft_spectrogram(signal: Signal, config: SpectrogramConfig) -> Spectrogram:
    """Magnitude STFT: windowed frames, zero-padded to ``nfft``, bins ``0 .. nfft/2``.

    Frame times are window centres. Partial frames at the end are dropped.
    """
    x = signal.samples
    w = config.window
    L = w.shape[0]
    if len(x) < L:
        raise ValueError(f"signal of {len(x)} samples shorter than the {L}-sample window")
    n_frames = 1 + (len(x) - L) // config.hop
    idx = np.arange(n_frames)[:, None] * config.hop + np.arange(L)[None, :]
    frames = np.zeros((n_frames, config.nfft))
    frames[:, :L] = x[idx] * w[None, :]
    spec = fft(frames)[:, :config.nfft // 2 + 1]
    fs = signal.sample_rate_hz
    freqs = np.arange(config.nfft // 2 + 1) * fs / config.nfft
    times = (np.arange(n_frames) * config.hop + L / 2) / fs
    return Spectrogram(np.abs(spec).T, freqs, times)
