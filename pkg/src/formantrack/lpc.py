"""Frame-based LPC: autocorrelation method + Levinson-Durbin recursion."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .opcount import OpCount
from .signal_io import Signal

log = logging.getLogger(__name__)


class DegenerateAutocorrelationError(ValueError):
    """r(0) <= 0 or a nonpositive prediction error power during the recursion."""


@dataclass(frozen=True)
class FrameConfig:
    """Analysis frame layout. Defaults are 20 ms Hamming frames, 10 ms hop at 8 kHz."""

    window_len_samples: int = 160
    hop_samples: int = 80
    window_kind: str = "hamming"
    method = "lpc"

    def __post_init__(self):
        if self.window_len_samples < 2:
            raise ValueError("window must be at least 2 samples")
        if not 1 <= self.hop_samples <= self.window_len_samples:
            raise ValueError("hop must lie in [1, window_len]")
        if self.window_kind not in WINDOWS:
            raise ValueError(f"unknown window {self.window_kind!r}; choose from {sorted(WINDOWS)}")

    @classmethod
    def from_ms(cls, sample_rate_hz: float, window_ms: float = 20.0, hop_ms: float = 10.0,
                window_kind: str = "hamming") -> "FrameConfig":
        return cls(int(round(window_ms * 1e-3 * sample_rate_hz)),
                   int(round(hop_ms * 1e-3 * sample_rate_hz)), window_kind)


@dataclass(frozen=True)
class LpcModel:
    """All-pole model ``sigma / (1 - A(z))`` with ``A(z) = sum_j a_j z**-j``."""

    coeffs: np.ndarray
    reflection: np.ndarray
    error_power: float
    stage_errors: np.ndarray | None = None

    @property
    def order(self) -> int:
        return self.coeffs.shape[0]


@dataclass(frozen=True)
class LpcFrame:
    """One analysis frame; ``model`` is None when the frame was degenerate."""

    time_s: float
    center_sample: int
    model: LpcModel | None


def _hamming(n):
    k = np.arange(n)
    return 0.54 - 0.46 * np.cos(2 * np.pi * k / (n - 1))


def _rectangular(n):
    return np.ones(n)


def _blackman(n):
    k = np.arange(n)
    return 0.42 - 0.5 * np.cos(2 * np.pi * k / (n - 1)) + 0.08 * np.cos(4 * np.pi * k / (n - 1))


WINDOWS = {"hamming": _hamming, "rectangular": _rectangular, "blackman": _blackman}


def make_window(kind: str, length: int) -> np.ndarray:
    """Symmetric window (``L - 1`` denominator, as in Matlab's ``hamming``)."""
    if length < 2:
        raise ValueError("window length must be at least 2")
    try:
        w = WINDOWS[kind](length)
    except KeyError:
        raise ValueError(f"unknown window {kind!r}") from None
    # force exact symmetry; cos() is not bit-symmetric around the centre
    half = length // 2
    w[length - half:] = w[:half][::-1]
    return w


def frame_signal(signal: Signal, config: FrameConfig) -> np.ndarray:
    """Windowed frames, shape ``(n_frames, window_len)``; partial tail frames are dropped."""
    x = signal.samples
    L, hop = config.window_len_samples, config.hop_samples
    if len(x) < L:
        raise ValueError(f"signal of {len(x)} samples shorter than one {L}-sample window")
    n_frames = 1 + (len(x) - L) // hop
    idx = np.arange(n_frames)[:, None] * hop + np.arange(L)[None, :]
    return x[idx] * make_window(config.window_kind, L)[None, :]


def autocorrelation(frame, max_lag: int, normalize: bool = False,
                    ops: OpCount | None = None) -> np.ndarray:
    """Biased autocorrelation ``r(i) = sum_n x(n) x(n+i)``, ``i = 0..max_lag``.

    With ``normalize=True`` the sums are divided by the frame length.
    """
    x = np.asarray(frame, dtype=np.float64)
    L = x.shape[0]
    if not 0 <= max_lag < L:
        raise ValueError(f"max_lag {max_lag} must be in [0, {L})")
    r = np.array([x[:L - i] @ x[i:] for i in range(max_lag + 1)])
    if ops is not None:
        lags = np.arange(max_lag + 1)
        ops.add(mults=int(np.sum(L - lags)), adds=int(np.sum(L - lags - 1)))
    if normalize:
        r = r / L
        if ops is not None:
            ops.add(divs=max_lag + 1)
    return r


def levinson_durbin(r, order: int, ops: OpCount | None = None) -> LpcModel:
    """Solve the order-``P`` Toeplitz normal equations by the Levinson-Durbin recursion.

    Parameters
    ----------
    r : array_like
        Autocorrelation ``r(0) .. r(P)`` (extra lags are ignored).
    order : int
        Predictor order ``P >= 1``.

    Returns
    -------
    LpcModel
        Coefficients such that ``x_hat(n) = sum_j a_j x(n-j)``, reflection
        coefficients ``k_1 .. k_P`` and final error power ``E_P``.

    Raises
    ------
    DegenerateAutocorrelationError
        If ``r(0) <= 0`` or some intermediate error power is nonpositive.
    """
    r = np.asarray(r, dtype=np.float64)
    if order < 1:
        raise ValueError("order must be at least 1")
    if r.shape[0] < order + 1:
        raise ValueError(f"need {order + 1} autocorrelation lags, got {r.shape[0]}")
    if not r[0] > 0:
        raise DegenerateAutocorrelationError(f"r(0) = {r[0]} is not positive")

    a = np.zeros(order)
    k = np.zeros(order)
    E = np.empty(order + 1)
    E[0] = r[0]
    for i in range(1, order + 1):
        if not E[i - 1] > 0:
            raise DegenerateAutocorrelationError(f"error power E_{i - 1} = {E[i - 1]} is not positive")
        acc = r[i] - a[:i - 1] @ r[i - 1:0:-1]
        ki = acc / E[i - 1]
        prev = a[:i - 1].copy()
        a[:i - 1] = prev - ki * prev[::-1]
        a[i - 1] = ki
        k[i - 1] = ki
        E[i] = (1.0 - ki * ki) * E[i - 1]
        if ops is not None:
            m = i - 1
            # dot + subtract, divide, coefficient update, error update
            ops.add(mults=m + m + 2, adds=m + m + 1, divs=1)
    if E[order] < -1e-12 * r[0]:
        raise DegenerateAutocorrelationError(f"final error power {E[order]} is negative")
    # a perfectly predictable input ends at E_P = 0 up to rounding
    E[order] = max(E[order], 0.0)
    return LpcModel(a, k, float(E[order]), E)


def lpc_analyze(signal: Signal, frame_config: FrameConfig | None = None, order: int = 8,
                ops: OpCount | None = None) -> list[LpcFrame]:
    """Per-frame LPC: window, autocorrelation to lag ``order``, Levinson-Durbin.

    Degenerate frames (silence) yield an ``LpcFrame`` with ``model=None``
    and a logged warning, so callers see the gap.
    """
    cfg = frame_config or FrameConfig()
    frames = frame_signal(signal, cfg)
    L, hop = cfg.window_len_samples, cfg.hop_samples
    fs = signal.sample_rate_hz
    out = []
    n_bad = 0
    for j, frame in enumerate(frames):
        if ops is not None:
            ops.add(mults=L)  # windowing
        start = j * hop
        center = start + L / 2
        try:
            model = levinson_durbin(autocorrelation(frame, order, ops=ops), order, ops=ops)
        except DegenerateAutocorrelationError as exc:
            log.debug("frame %d at %.4f s skipped: %s", j, center / fs, exc)
            n_bad += 1
            model = None
        out.append(LpcFrame(center / fs, start + L // 2, model))
    if n_bad:
        log.warning("%d of %d frames were degenerate and have no LPC model", n_bad, len(out))
    return out


def write_models_csv(frames: Iterable[LpcFrame], order: int, fh: TextIO) -> None:
    """CSV ``frame_time_s, sigma2, a_1 .. a_P``; degenerate frames have empty cells."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["frame_time_s", "sigma2"] + [f"a_{j}" for j in range(1, order + 1)])
    for fr in frames:
        if fr.model is None:
            writer.writerow([repr(fr.time_s)] + [""] * (order + 1))
        else:
            writer.writerow([repr(fr.time_s), repr(fr.model.error_power)]
                            + [repr(float(v)) for v in fr.model.coeffs])
