"""Sample-recursive forward linear predictors (conventional LMS and RLS).

Both predictors estimate ``x(n)`` from ``u(n) = [x(n-1), ..., x(n-P)]`` and
share the sign convention of the block LPC code: ``x_hat(n) = w . u(n)``, so
the weight vector *is* the coefficient vector ``a_1 .. a_P`` of ``A(z)``.

The LMS update is ``w' = w + alpha * e * u`` (no factor of 2).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .opcount import OpCount
from .signal_io import Signal

DIVERGENCE_LIMIT = 1e12


class DivergenceError(ArithmeticError):
    """An adaptive run blew up (non-finite values or magnitudes above 1e12)."""

    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index


@dataclass(frozen=True)
class LmsState:
    weights: np.ndarray
    step_alpha: float

    @classmethod
    def zeros(cls, order: int, step_alpha: float) -> "LmsState":
        return cls(np.zeros(order), step_alpha)


@dataclass(frozen=True)
class RlsState:
    """RLS weights plus the inverse of the exponentially weighted
    input correlation matrix (starts at ``I / delta``)."""

    weights: np.ndarray
    inv_corr: np.ndarray
    lam: float
    delta: float

    @classmethod
    def initial(cls, order: int, lam: float, delta: float) -> "RlsState":
        if not 0 < lam <= 1:
            raise ValueError(f"forgetting factor must lie in (0, 1], got {lam}")
        if delta <= 0:
            raise ValueError(f"delta must be positive, got {delta}")
        return cls(np.zeros(order), np.eye(order) / delta, lam, delta)


@dataclass(frozen=True)
class LmsConfig:
    alpha: float = 0.2
    method = "lms"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("step size must be nonnegative")


@dataclass(frozen=True)
class RlsConfig:
    """``delta=None`` picks 0.01 x the power of the first 4P samples."""

    lam: float = 0.99
    delta: float | None = None
    method = "rls"

    def __post_init__(self):
        if not 0 < self.lam <= 1:
            raise ValueError(f"forgetting factor must lie in (0, 1], got {self.lam}")
        if self.delta is not None and self.delta <= 0:
            raise ValueError("delta must be positive")


@dataclass(frozen=True)
class PredictionRecord:
    sample_index: int
    apriori_error: float
    weights_snapshot: np.ndarray | None = None


def _check_dims(weights, input_vec):
    u = np.asarray(input_vec, dtype=np.float64)
    if u.shape != weights.shape:
        raise ValueError(f"input vector has shape {u.shape}, expected {weights.shape}")
    return u


def lms_step(state: LmsState, input_vec, desired: float, ops: OpCount | None = None):
    """One LMS iteration. Returns ``(a_priori_error, new_state)``."""
    w = state.weights
    u = _check_dims(w, input_vec)
    P = w.shape[0]
    e = desired - w @ u
    w_new = w + (state.step_alpha * e) * u
    if ops is not None:
        # w.u: P mults, P-1 adds; d - y: 1 add; alpha*e: 1 mult; (alpha e) u: P mults; w + .: P adds
        ops.add(mults=2 * P + 1, adds=2 * P)
    return float(e), LmsState(w_new, state.step_alpha)


def rls_step(state: RlsState, input_vec, desired: float, ops: OpCount | None = None):
    """One conventional RLS iteration. Returns ``(a_priori_error, new_state)``.

    The updated inverse correlation matrix is re-symmetrized each step.
    """
    w = state.weights
    u = _check_dims(w, input_vec)
    P = w.shape[0]
    M = state.inv_corr
    lam = state.lam

    pi = M @ u
    denom = lam + u @ pi
    k = pi / denom
    e = desired - w @ u
    w_new = w + k * e
    M_new = (M - np.outer(k, pi)) / lam
    M_new = 0.5 * (M_new + M_new.T)

    if ops is not None:
        ops.add(
            # M u, u.pi, w.u, k e, k pi^T, 0.5 (.)
            mults=P * P + P + P + P + P * P + P * P,
            # M u, u.pi, lam +, d - y, w +, M -, M + M^T
            adds=P * (P - 1) + (P - 1) + 1 + P + P + P * P + P * P,
            # pi / denom, (.) / lam
            divs=P + P * P,
        )
    if not (np.isfinite(e) and np.all(np.isfinite(w_new)) and np.all(np.isfinite(M_new))):
        raise DivergenceError("non-finite value in RLS recursion")
    return float(e), RlsState(w_new, M_new, lam, state.delta)


def weighted_sse(errors: Sequence[float], lam: float) -> float:
    """Exponentially weighted error energy ``sum_i lam**(n-i) e(i)**2``."""
    if not 0 < lam <= 1:
        raise ValueError(f"forgetting factor must lie in (0, 1], got {lam}")
    e = np.asarray(errors, dtype=np.float64)
    n = e.shape[0]
    weights = lam ** np.arange(n - 1, -1, -1, dtype=np.float64)
    return float(np.sum(weights * e * e))


def default_delta(samples: np.ndarray, order: int) -> float:
    head = np.asarray(samples[:4 * order], dtype=np.float64)
    power = float(np.mean(head * head)) if head.size else 0.0
    return 0.01 * max(power, 1e-6)


def regressor(x: np.ndarray, n: int, order: int) -> np.ndarray:
    """``[x(n-1), x(n-2), ..., x(n-P)]``."""
    return x[n - order:n][::-1]


def run_predictor(signal: Signal, config, order: int = 8, decimate: int = 64,
                  ops: OpCount | None = None) -> list[PredictionRecord]:
    """Run forward one-step prediction over the whole signal.

    Starts from zero weights at ``n = order`` and records the a-priori
    error for every sample. Post-update weights are attached to records
    whose ``sample_index`` is a multiple of ``decimate``.

    Raises
    ------
    DivergenceError
        When the error or a weight is non-finite or exceeds 1e12 in magnitude.
    """
    x = signal.samples
    if order < 1:
        raise ValueError("order must be at least 1")
    if len(x) <= order:
        raise ValueError(f"signal of length {len(x)} too short for order {order}")
    if decimate < 1:
        raise ValueError("decimate must be at least 1")

    if isinstance(config, LmsConfig):
        state = LmsState.zeros(order, config.alpha)
        step = lms_step
    elif isinstance(config, RlsConfig):
        delta = config.delta if config.delta is not None else default_delta(x, order)
        state = RlsState.initial(order, config.lam, delta)
        step = rls_step
    else:
        raise TypeError(f"unsupported predictor config {config!r}")

    records = []
    for n in range(order, len(x)):
        try:
            e, state = step(state, regressor(x, n, order), x[n], ops)
        except DivergenceError as exc:
            raise DivergenceError(f"{config.method.upper()} at sample {n}: {exc}", sample_index=n) from exc
        w = state.weights
        if not np.isfinite(e) or abs(e) > DIVERGENCE_LIMIT or not np.all(np.abs(w) <= DIVERGENCE_LIMIT):
            raise DivergenceError(
                f"{config.method.upper()} diverged at sample {n}: |e|={abs(e):.3g}, "
                f"max|w|={np.max(np.abs(w)):.3g}; reduce the step size or signal scale",
                sample_index=n,
            )
        snap = w.copy() if n % decimate == 0 else None
        records.append(PredictionRecord(n, e, snap))
    return records


def weights_to_poly(weights) -> np.ndarray:
    """Coefficients ``[1, -a_1, ..., -a_P]`` of ``1 - A(z)``.

    Read highest power first, this is also ``z**P - a_1 z**(P-1) - ... - a_P``,
    which is what :func:`formantrack.formants.poly_roots` expects.
    """
    a = np.asarray(weights, dtype=np.float64).reshape(-1)
    return np.concatenate([[1.0], -a])


def errors_of(records: Iterable[PredictionRecord]) -> np.ndarray:
    return np.array([r.apriori_error for r in records])


def write_records_csv(records: Iterable[PredictionRecord], fh: TextIO) -> None:
    """CSV with columns ``n, error, w_0 .. w_{P-1}``; snapshot rows only."""
    writer = csv.writer(fh, lineterminator="\n")
    header_done = False
    for rec in records:
        if rec.weights_snapshot is None:
            continue
        if not header_done:
            P = rec.weights_snapshot.shape[0]
            writer.writerow(["n", "error"] + [f"w_{i}" for i in range(P)])
            header_done = True
        writer.writerow([rec.sample_index, repr(rec.apriori_error)]
                        + [repr(float(v)) for v in rec.weights_snapshot])
    if not header_done:
        writer.writerow(["n", "error"])


def iterations_to_converge(errors, threshold: float = 1e-2, hold: int = 50) -> int | None:
    """First iteration from which ``|e|`` stays below ``threshold`` for ``hold`` samples.

    Returns None when the run never settles.
    """
    below = np.abs(np.asarray(errors, dtype=np.float64)) < threshold
    if below.size < hold:
        return None
    # windowed count of consecutive below-threshold samples
    run = np.convolve(below.astype(np.int64), np.ones(hold, dtype=np.int64), mode="valid")
    hits = np.flatnonzero(run == hold)
    return int(hits[0]) if hits.size else None
