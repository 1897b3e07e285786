"""Root-based formant extraction shared by the LMS, RLS and LPC estimators."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .adaptive import LmsConfig, RlsConfig, run_predictor, weights_to_poly
from .lpc import FrameConfig, lpc_analyze
from .opcount import OpCount
from .signal_io import Signal, remove_dc


class RootFindingError(ArithmeticError):
    """Roots could not be refined to the requested residual."""


@dataclass(frozen=True)
class FormantRanges:
    """Per-formant plausible ``(min_hz, max_hz)`` rows, F1 first."""

    rows: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for lo, hi in self.rows:
            if not lo < hi:
                raise ValueError(f"range ({lo}, {hi}) is empty")


# adult-speaker ranges for F1..F3
TYPICAL_FORMANT_RANGES = FormantRanges(((270.0, 730.0), (840.0, 2290.0), (1690.0, 3010.0)))


@dataclass(frozen=True)
class FormantTrack:
    """Formant estimates over time; NaN marks a missing estimate."""

    sample_indices: np.ndarray
    times_s: np.ndarray
    freqs_hz: np.ndarray  # (n_entries, n_formants)

    @property
    def n_formants(self) -> int:
        return self.freqs_hz.shape[1]

    def __len__(self):
        return self.times_s.shape[0]

    def entries(self):
        """Yield ``(time_s, sample_index, [f1, ..., fN])`` with None for gaps."""
        for n, t, row in zip(self.sample_indices, self.times_s, self.freqs_hz):
            yield float(t), int(n), [None if np.isnan(f) else float(f) for f in row]

    def write_csv(self, fh: TextIO) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_index", "time_s"] + [f"f{k}_hz" for k in range(1, self.n_formants + 1)])
        for t, n, freqs in self.entries():
            writer.writerow([n, repr(t)] + ["" if f is None else repr(f) for f in freqs])

    def to_json(self) -> str:
        rows = [{"sample_index": n, "time_s": t, "formants_hz": freqs} for t, n, freqs in self.entries()]
        return json.dumps({"n_formants": self.n_formants, "entries": rows}, indent=1)


def _horner(c, z):
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for coef in c:
        dp = dp * z + p
        p = p * z + coef
    return p, dp


def _residual_scale(c, r):
    # sum_k |c_k| r^k: the natural scale for a backward-error residual test
    return np.polyval(np.abs(c), r)


def poly_roots(coeffs, tolerance: float = 1e-8, newton_iters: int = 3) -> np.ndarray:
    """All complex roots of a real polynomial, highest power first.

    The variable is rescaled to ``z = s y`` with ``s = max_k |c_k|**(1/k)``
    (``c`` normalized to a monic polynomial), roots come from the
    eigenvalues of the companion matrix and a few Newton steps polish them.
    Every root must pass the normwise backward-error test
    ``|q(y)| <= tolerance * sum_k |d_k| max(|y|, 1)**k`` on the scaled
    polynomial ``q`` with coefficients ``d``.

    Raises
    ------
    ValueError
        Zero polynomial, zero leading coefficient or degree below 1.
    RootFindingError
        A root fails the residual test.
    """
    c = np.asarray(coeffs, dtype=np.float64).reshape(-1)
    if c.size == 0 or not np.any(c):
        raise ValueError("zero polynomial has no defined roots")
    if c[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    if c.size < 2:
        raise ValueError("polynomial degree must be at least 1")
    c = c / c[0]
    deg = c.size - 1

    # substitute z = s y with s bounding the root moduli so the companion
    # matrix is balanced even when every root is tiny or huge
    k = np.arange(1, deg + 1)
    nz = c[1:] != 0
    if not np.any(nz):
        return np.zeros(deg, dtype=np.complex128)
    log_mag = np.full(deg, -np.inf)
    log_mag[nz] = np.log(np.abs(c[1:][nz]))
    log_s = float(np.max(log_mag[nz] / k[nz]))
    s = float(np.exp(log_s))
    # |d_k| = |c_k| / s**k <= 1, formed in logs so s**k cannot overflow
    d = np.sign(c[1:]) * np.exp(log_mag - k * log_s)
    companion = np.zeros((deg, deg))
    companion[0, :] = -d
    companion[np.arange(1, deg), np.arange(deg - 1)] = 1.0
    z = s * np.linalg.eigvals(companion).astype(np.complex128)

    for _ in range(newton_iters):
        p, dp = _horner(c, z)
        ok = dp != 0
        # a near-zero derivative can throw a candidate out to overflow;
        # such candidates compare as not better and are discarded
        with np.errstate(over="ignore", invalid="ignore"):
            step = np.zeros_like(z)
            step[ok] = p[ok] / dp[ok]
            cand = z - step
            better = np.abs(_horner(c, cand)[0]) < np.abs(p)
        z = np.where(better, cand, z)

    # Newton may leave a rounding-level imaginary part on real roots
    z = np.where(np.abs(z.imag) <= 1e-14 * np.abs(z), z.real + 0j, z)

    q = np.concatenate([[1.0], d])
    y = z / s
    resid = np.abs(_horner(q, y)[0])
    bound = tolerance * _residual_scale(q, np.maximum(np.abs(y), 1.0))
    bad = resid > bound
    if np.any(bad):
        raise RootFindingError(
            f"{int(bad.sum())} root(s) exceed residual bound; worst |p(z)| = {resid.max():.3g}"
        )
    return z


def roots_to_formants(roots, fs_hz: float, n_formants: int, min_freq_hz: float = 5.0) -> np.ndarray:
    """Lowest ``n_formants`` root frequencies in ``(min_freq_hz, fs/2)``.

    Root frequency is ``fs / (2 pi) * angle(root)``, so only the
    positive-angle member of each conjugate pair can qualify and real roots
    never do. Unfilled slots are NaN.
    """
    if fs_hz <= 0:
        raise ValueError("sample rate must be positive")
    if n_formants < 1:
        raise ValueError("need at least one formant slot")
    z = np.asarray(roots, dtype=np.complex128).reshape(-1)
    f = fs_hz / (2 * np.pi) * np.arctan2(z.imag, z.real)
    f = np.sort(f[(f > min_freq_hz) & (f < fs_hz / 2)])
    out = np.full(n_formants, np.nan)
    m = min(n_formants, f.size)
    out[:m] = f[:m]
    return out


def apply_range_filter(freqs, ranges: FormantRanges = TYPICAL_FORMANT_RANGES) -> np.ndarray:
    """Blank out (NaN) any formant outside its row of ``ranges``."""
    f = np.array(freqs, dtype=np.float64)
    if f.shape[-1] > len(ranges.rows):
        raise ValueError(f"{f.shape[-1]} formants but only {len(ranges.rows)} range rows")
    lo = np.array([r[0] for r in ranges.rows[:f.shape[-1]]])
    hi = np.array([r[1] for r in ranges.rows[:f.shape[-1]]])
    return np.where((f >= lo) & (f <= hi), f, np.nan)


def formants_from_coeffs(coeffs, fs_hz: float, n_formants: int, min_freq_hz: float = 5.0) -> np.ndarray:
    """Formant estimate from predictor coefficients ``a_1 .. a_P``."""
    return roots_to_formants(poly_roots(weights_to_poly(coeffs)), fs_hz, n_formants, min_freq_hz)


def track_formants(signal: Signal, config, order: int = 8, n_formants: int = 3, decimate: int = 64,
                   min_freq_hz: float = 5.0, ranges: FormantRanges | None = None,
                   ops: OpCount | None = None) -> FormantTrack:
    """Full pipeline: DC removal, model estimation, root-based formant picking.

    ``config`` selects the estimator: :class:`LmsConfig`, :class:`RlsConfig`
    or :class:`FrameConfig` (block LPC). Adaptive tracks have one entry per
    ``decimate`` samples stamped ``n / fs``; LPC tracks one per frame,
    stamped at the frame centre. ``ranges`` enables the optional
    plausibility filter.
    """
    x = remove_dc(signal)
    fs = x.sample_rate_hz

    if isinstance(config, (LmsConfig, RlsConfig)):
        recs = [r for r in run_predictor(x, config, order, decimate, ops) if r.weights_snapshot is not None]
        idx = np.array([r.sample_index for r in recs], dtype=np.int64)
        times = idx / fs
        coeff_rows = [r.weights_snapshot for r in recs]
    elif isinstance(config, FrameConfig):
        frames = lpc_analyze(x, config, order, ops)
        idx = np.array([fr.center_sample for fr in frames], dtype=np.int64)
        times = np.array([fr.time_s for fr in frames])
        coeff_rows = [None if fr.model is None else fr.model.coeffs for fr in frames]
    else:
        raise TypeError(f"unsupported estimator config {config!r}")

    freqs = np.full((len(coeff_rows), n_formants), np.nan)
    for i, a in enumerate(coeff_rows):
        if a is not None:
            freqs[i] = formants_from_coeffs(a, fs, n_formants, min_freq_hz)
    if ranges is not None:
        freqs = apply_range_filter(freqs, ranges)
    return FormantTrack(idx, np.asarray(times, dtype=np.float64), freqs)
