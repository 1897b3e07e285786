"""Diagnostics: autocorrelation eigenvalue spread, Wiener solution and
error surface of a two-tap predictor, and operation-count comparison."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .adaptive import LmsConfig, RlsConfig, run_predictor
from .lpc import FrameConfig, lpc_analyze
from .opcount import OpCount
from .signal_io import Signal, SynthVowelSpec, gen_vowel, remove_dc


class ConvergenceError(ArithmeticError):
    pass


def toeplitz_from_autocorr(r) -> np.ndarray:
    """Symmetric Toeplitz matrix ``M[i, j] = r(|i - j|)``."""
    r = np.asarray(r, dtype=np.float64).reshape(-1)
    if r.size == 0:
        raise ValueError("need at least r(0)")
    i = np.arange(r.size)
    return r[np.abs(i[:, None] - i[None, :])]


def _off_norm(a):
    off = a - np.diag(np.diag(a))
    return np.sqrt(np.sum(off * off))


def sym_eigenvalues(matrix, tolerance: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.

    Sweeps stop once the off-diagonal Frobenius norm is at most
    ``tolerance`` times the full Frobenius norm.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0))):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    # work on a unit-max copy so squared entries cannot underflow or overflow
    peak = np.abs(a).max(initial=0.0)
    if peak == 0:
        return np.zeros(n)
    a = a / peak
    scale = np.linalg.norm(a)

    # entries this small cannot affect the stopping test
    negligible = 1e-3 * tolerance * scale / n
    for _ in range(max_sweeps):
        if _off_norm(a) <= tolerance * scale:
            return peak * np.sort(np.diag(a))[::-1]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= negligible or apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2 * apq)
                t = np.copysign(1.0, tau) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
    if _off_norm(a) <= tolerance * scale:
        return peak * np.sort(np.diag(a))[::-1]
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def eigenvalue_spread(eigenvalues) -> float:
    v = np.asarray(eigenvalues)
    return float(v.max() / v.min())


def autocorr_matrix_2tap(omega: float, power: float = 1.0):
    """Correlation matrix and one-step cross-correlation of a sinusoid.

    Returns ``R = power * [[1, cos w], [cos w, 1]]`` and
    ``p = power * [cos w, cos 2w]``.
    """
    if power <= 0:
        raise ValueError("power must be positive")
    c1, c2 = np.cos(omega), np.cos(2 * omega)
    R = power * np.array([[1.0, c1], [c1, 1.0]])
    p = power * np.array([c1, c2])
    return R, p


def wiener_solution(R, p) -> np.ndarray:
    """Solve ``R w = p`` for positive-definite ``R`` (Cholesky elimination)."""
    R = np.asarray(R, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    try:
        Lc = np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        raise ValueError("R is not positive definite") from None
    y = np.linalg.solve(Lc, p)
    w = np.linalg.solve(Lc.T, y)
    resid = np.linalg.norm(R @ w - p)
    if resid > 1e-10 * max(np.linalg.norm(p), np.linalg.norm(R) * np.linalg.norm(w), 1e-300):
        raise ValueError(f"R is too ill-conditioned (residual {resid:.3g})")
    return w


def mse_cost(w, r0: float, p, R) -> np.ndarray:
    """``J(w) = r0 - 2 w.p + w.R.w`` for ``w`` of shape ``(..., 2)``."""
    w = np.asarray(w, dtype=np.float64)
    return r0 - 2 * w @ p + np.einsum("...i,ij,...j->...", w, R, w)


@dataclass(frozen=True)
class ErrorSurface:
    w0: np.ndarray
    w1: np.ndarray
    J: np.ndarray  # J[i, j] at (w0[i], w1[j])

    def argmin(self):
        i, j = np.unravel_index(np.argmin(self.J), self.J.shape)
        return float(self.w0[i]), float(self.w1[j])

    def write_csv(self, fh: TextIO) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["w0", "w1", "J"])
        for i, a in enumerate(self.w0):
            for j, b in enumerate(self.w1):
                writer.writerow([repr(float(a)), repr(float(b)), repr(float(self.J[i, j]))])


def error_surface(r0: float, p, R, w0_range=(-1.0, 4.0), w1_range=(-3.0, 2.0),
                  step: float = 0.05) -> ErrorSurface:
    """Mean-squared error of a two-tap predictor on a rectangular grid."""
    if step <= 0:
        raise ValueError("step must be positive")
    w0 = np.arange(w0_range[0], w0_range[1] + step / 2, step)
    w1 = np.arange(w1_range[0], w1_range[1] + step / 2, step)
    if w0.size == 0 or w1.size == 0:
        raise ValueError("empty grid")
    W = np.stack(np.meshgrid(w0, w1, indexing="ij"), axis=-1)
    return ErrorSurface(w0, w1, mse_cost(W, r0, np.asarray(p), np.asarray(R)))


# ---------------------------------------------------------------------------
# complexity

# flops ratios originally measured with Matlab's flops() on a recorded utterance
REPORTED_FLOPS_RATIOS = {"LMS": 1, "Levinson-Durbin": 21, "RLS": 52}


@dataclass
class ComplexityReport:
    order: int
    n_samples: int
    counts: dict = field(default_factory=dict)

    def ratios(self) -> dict:
        base = self.counts["LMS"].total()
        return {k: v.total() / base for k, v in self.counts.items()}

    def per_sample(self) -> dict:
        return {k: v.total() / self.n_samples for k, v in self.counts.items()}

    def rows(self):
        ratios = self.ratios()
        for name, ops in self.counts.items():
            yield {"algorithm": name, **ops.as_dict(), "ratio_to_lms": ratios[name],
                   "reported_flops_ratio": REPORTED_FLOPS_RATIOS[name]}

    def format_table(self) -> str:
        names = list(self.counts)
        ratios = self.ratios()
        w = max(len(n) for n in names) + 2
        lines = [f"Operation counts, P={self.order}, {self.n_samples} samples",
                 "Algorithm".ljust(w) + "".join(n.rjust(w) for n in names),
                 "Complexity".ljust(w) + "".join(f"{ratios[n]:.1f}".rjust(w) for n in names),
                 "Total ops".ljust(w) + "".join(str(self.counts[n].total()).rjust(w) for n in names),
                 "",
                 "Originally reported (Matlab flops): "
                 + ", ".join(f"{k} {v}" for k, v in REPORTED_FLOPS_RATIOS.items())
                 + "; not comparable with these counts"]
        return "\n".join(lines)

    def write_csv(self, fh: TextIO) -> None:
        rows = list(self.rows())
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def complexity_report(order: int = 8, n_samples: int = 8000, signal: Signal | None = None,
                      alpha: float = 0.2, lam: float = 0.99,
                      frame_config: FrameConfig | None = None) -> ComplexityReport:
    """Count multiplies, adds and divides of the three model estimators on one signal.

    Only the model-estimation stage is counted; the root-finding stage is
    identical for all estimators. Without ``signal`` a default synthetic
    vowel of ``n_samples`` at 8 kHz is used.
    """
    if signal is None:
        spec = SynthVowelSpec(100.0, [(500.0, 60.0), (1500.0, 90.0), (2500.0, 120.0)],
                              n_samples / 8000.0, 1.0)
        signal = gen_vowel(spec, 8000.0)
    x = remove_dc(signal)
    report = ComplexityReport(order, len(x))
    for name, cfg in (("LMS", LmsConfig(alpha)), ("Levinson-Durbin", frame_config or FrameConfig()),
                      ("RLS", RlsConfig(lam))):
        ops = OpCount()
        if isinstance(cfg, FrameConfig):
            lpc_analyze(x, cfg, order, ops)
        else:
            run_predictor(x, cfg, order, decimate=len(x) + 1, ops=ops)
        report.counts[name] = ops
    return report
