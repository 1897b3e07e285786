"""Waveform container, PCM16 WAV I/O and synthetic test signals."""

from __future__ import annotations

import struct
import wave
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

DEFAULT_SAMPLE_RATE = 8000.0


class WavFormatError(ValueError):
    """The file is not a well-formed RIFF/WAVE container."""


class UnsupportedEncodingError(ValueError):
    """The WAVE file is valid but not 16-bit mono PCM."""


@dataclass(frozen=True)
class Signal:
    """Real-valued sampled waveform.

    Samples are stored as a read-only float64 array so a ``Signal`` can be
    shared between threads without copying.
    """

    samples: np.ndarray
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64).reshape(-1)
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def scaled(self, gain: float) -> "Signal":
        return Signal(self.samples * gain, self.sample_rate_hz)


@dataclass(frozen=True)
class SynthVowelSpec:
    """Parameters of an impulse-train-excited formant synthesizer.

    ``formants`` is a list of ``(freq_hz, bandwidth_hz)`` pairs, one
    second-order resonator each. ``amplitude`` is the output peak.
    """

    pitch_hz: float
    formants: Sequence[tuple[float, float]]
    duration_s: float
    amplitude: float = 1.0
    formants_end: Sequence[tuple[float, float]] | None = field(default=None)


# ---------------------------------------------------------------------------
# WAV


def _read_chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack("<4sI", data[pos:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise WavFormatError(f"chunk {cid!r} truncated: {len(body)} of {size} bytes")
        yield cid, body
        pos += 8 + size + (size & 1)


def read_wav(path) -> Signal:
    """Read a 16-bit mono PCM WAV file without rescaling the samples.

    Raises
    ------
    WavFormatError
        Missing or malformed RIFF/WAVE header, fmt or data chunk.
    UnsupportedEncodingError
        Non-PCM data, sample width other than 16 bits, or more than one channel.
    """
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise WavFormatError("file too short for a RIFF header")
    riff, _, wave_id = struct.unpack("<4sI4s", data[:12])
    if riff != b"RIFF" or wave_id != b"WAVE":
        raise WavFormatError("missing RIFF/WAVE signature")

    fmt = None
    payload = None
    for cid, body in _read_chunks(data):
        if cid == b"fmt ":
            if len(body) < 16:
                raise WavFormatError("fmt chunk shorter than 16 bytes")
            fmt = struct.unpack("<HHIIHH", body[:16])
        elif cid == b"data":
            payload = body
            break
    if fmt is None:
        raise WavFormatError("no fmt chunk")
    if payload is None:
        raise WavFormatError("no data chunk")

    audio_format, channels, rate, _, _, bits = fmt
    if audio_format != 1:
        raise UnsupportedEncodingError(f"audio format {audio_format} is not PCM (1)")
    if bits != 16:
        raise UnsupportedEncodingError(f"{bits}-bit samples; only 16-bit PCM is supported")
    if channels != 1:
        raise UnsupportedEncodingError(f"{channels} channels; only mono is supported")
    if rate == 0:
        raise WavFormatError("sample rate is zero")
    if len(payload) % 2:
        raise WavFormatError("odd-length data chunk for 16-bit samples")

    samples = np.frombuffer(payload, dtype="<i2").astype(np.float64)
    return Signal(samples, float(rate))


def write_wav(signal: Signal, path) -> None:
    """Write ``signal`` as canonical 44-byte-header PCM16 mono WAV.

    Samples are rounded to the nearest integer; anything outside the
    int16 range after rounding raises ``ValueError``.
    """
    rate = signal.sample_rate_hz
    if rate != round(rate):
        raise ValueError(f"WAV needs an integer sample rate, got {rate}")
    pcm = np.rint(signal.samples)
    if pcm.size and (pcm.max() > 32767 or pcm.min() < -32768):
        raise ValueError(
            f"sample range [{signal.samples.min()}, {signal.samples.max()}] does not fit int16"
        )
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(rate))
        w.writeframes(pcm.astype("<i2").tobytes())


# ---------------------------------------------------------------------------
# preprocessing


def remove_dc(signal: Signal) -> Signal:
    """Subtract the sample mean."""
    if len(signal) == 0:
        raise ValueError("cannot remove DC from an empty signal")
    x = signal.samples
    y = x - x.mean()
    # second pass mops up rounding left by the first
    y -= y.mean()
    return Signal(y, signal.sample_rate_hz)


# ---------------------------------------------------------------------------
# generators


def gen_sinusoid(amplitude: float, omega: float, n_samples: int, phase: float = 0.0,
                 sample_rate_hz: float = 1.0) -> Signal:
    """``amplitude * cos(omega * n + phase)`` for ``n = 0 .. n_samples - 1``."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    n = np.arange(n_samples)
    return Signal(amplitude * np.cos(omega * n + phase), sample_rate_hz)


def resonator_coeffs(freq_hz: float, bandwidth_hz: float, sample_rate_hz: float):
    """Denominator ``[1, -2 r cos(theta), r**2]`` of a two-pole resonator.

    Pole radius is ``exp(-pi * bw / fs)`` and pole angle ``2 pi f / fs``.
    """
    if not 0 < freq_hz < sample_rate_hz / 2:
        raise ValueError(f"formant {freq_hz} Hz outside (0, {sample_rate_hz / 2}) Hz")
    if bandwidth_hz <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth_hz}")
    r = np.exp(-np.pi * bandwidth_hz / sample_rate_hz)
    theta = 2 * np.pi * freq_hz / sample_rate_hz
    return np.array([1.0, -2 * r * np.cos(theta), r * r])


def impulse_train(period: int, n_samples: int) -> np.ndarray:
    x = np.zeros(n_samples)
    x[::period] = 1.0
    return x


def gen_formant_sweep(pitch_hz: float, freq_tracks: np.ndarray, bandwidths_hz: Sequence[float],
                      sample_rate_hz: float = DEFAULT_SAMPLE_RATE, amplitude: float = 1.0) -> Signal:
    """Impulse-excited resonator cascade with per-sample formant frequencies.

    ``freq_tracks`` has shape ``(n_formants, n_samples)``; row ``k`` gives
    the centre frequency of resonator ``k`` at every sample.
    """
    tracks = np.atleast_2d(np.asarray(freq_tracks, dtype=np.float64))
    n_formants, n_samples = tracks.shape
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if len(bandwidths_hz) != n_formants:
        raise ValueError("one bandwidth per formant track required")
    if pitch_hz <= 0:
        raise ValueError("pitch must be positive")
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    period = max(1, int(round(sample_rate_hz / pitch_hz)))
    y = impulse_train(period, n_samples)

    for k in range(n_formants):
        f = tracks[k]
        if np.any(f <= 0) or np.any(f >= sample_rate_hz / 2):
            raise ValueError(f"formant {k + 1} leaves (0, {sample_rate_hz / 2}) Hz")
        resonator_coeffs(f[0], bandwidths_hz[k], sample_rate_hz)  # validates bandwidth
        r = np.exp(-np.pi * bandwidths_hz[k] / sample_rate_hz)
        c1 = 2 * r * np.cos(2 * np.pi * f / sample_rate_hz)
        c2 = r * r
        out = np.empty(n_samples)
        y1 = y2 = 0.0
        for n in range(n_samples):
            v = y[n] + c1[n] * y1 - c2 * y2
            out[n] = v
            y2, y1 = y1, v
        y = out

    peak = np.abs(y).max()
    if peak > 0:
        y = y * (amplitude / peak)
    return Signal(y, sample_rate_hz)


def gen_vowel(spec: SynthVowelSpec, sample_rate_hz: float = DEFAULT_SAMPLE_RATE) -> Signal:
    """Synthesize a vowel from ``spec``.

    With ``spec.formants_end`` set, each formant frequency moves linearly
    from its start to its end value over the duration (bandwidths are taken
    from ``spec.formants``).
    """
    if spec.duration_s <= 0:
        raise ValueError("duration must be positive")
    n = int(round(spec.duration_s * sample_rate_hz))
    if n < 1:
        raise ValueError("duration shorter than one sample")
    start = np.array([f for f, _ in spec.formants], dtype=np.float64)
    if spec.formants_end is None:
        end = start
    else:
        if len(spec.formants_end) != len(spec.formants):
            raise ValueError("formants_end must match formants in length")
        end = np.array([f for f, _ in spec.formants_end], dtype=np.float64)
    for f in np.concatenate([start, end]):
        if not 0 < f < sample_rate_hz / 2:
            raise ValueError(f"formant {f} Hz at or above Nyquist ({sample_rate_hz / 2} Hz)")
    ramp = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
    tracks = start[:, None] + (end - start)[:, None] * ramp[None, :]
    bws = [bw for _, bw in spec.formants]
    return gen_formant_sweep(spec.pitch_hz, tracks, bws, sample_rate_hz, spec.amplitude)
