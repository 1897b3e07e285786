import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formantrack.analysis import (ConvergenceError, autocorr_matrix_2tap, complexity_report,
                                  eigenvalue_spread, error_surface, mse_cost, sym_eigenvalues,
                                  toeplitz_from_autocorr, wiener_solution)
from formantrack.lpc import autocorrelation
from formantrack.opcount import OpCount

TABLE_R = [360.54, 268.05, 137.39, 68.63, 11.05, -57.60, -78.29, -89.97, -146.76, -177.18, -149.36]
TABLE_V = [1428.2, 1136.3, 433.6, 380.3, 187.6, 152.8, 152.1, 55.7, 14.1, 12.8, 12.4]


class TestToeplitz:
    def test_examples(self):
        np.testing.assert_array_equal(toeplitz_from_autocorr([1]), [[1]])
        np.testing.assert_array_equal(toeplitz_from_autocorr([2, 1]), [[2, 1], [1, 2]])
        M = toeplitz_from_autocorr(TABLE_R)
        assert M.shape == (11, 11)
        assert np.trace(M) == pytest.approx(3965.94, rel=1e-12)
        np.testing.assert_array_equal(M, M.T)

    def test_empty(self):
        with pytest.raises(ValueError):
            toeplitz_from_autocorr([])


class TestEigen:
    def test_trivial(self):
        np.testing.assert_array_equal(sym_eigenvalues(np.eye(3)), [1, 1, 1])
        np.testing.assert_allclose(sym_eigenvalues(np.diag([2.0, 5.0])), [5, 2])

    def test_table_matrix(self):
        v = sym_eigenvalues(toeplitz_from_autocorr(TABLE_R))
        np.testing.assert_allclose(v, TABLE_V, atol=0.1)

    def test_against_lapack(self, rng):
        for n in range(1, 15):
            a = rng.normal(size=(n, n))
            a = a + a.T
            np.testing.assert_allclose(sym_eigenvalues(a), np.sort(np.linalg.eigvalsh(a))[::-1],
                                       atol=1e-10 * np.linalg.norm(a))

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_characteristic_polynomial(self, rng, n):
        a = rng.normal(size=(n, n))
        a = a + a.T
        # Faddeev-LeVerrier characteristic polynomial, then its roots
        c = [1.0]
        M = np.zeros_like(a)
        for k in range(1, n + 1):
            M = a @ M + c[-1] * np.eye(n)
            c.append(-np.trace(a @ M) / k)
        roots = np.sort(np.roots(c).real)[::-1]
        np.testing.assert_allclose(sym_eigenvalues(a), roots, atol=1e-8)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-50, 50), min_size=2, max_size=40))
    def test_psd_toeplitz_trace_and_sign(self, x):
        x = np.asarray(x)
        if not np.any(x):
            return
        r = autocorrelation(x, min(len(x) - 1, 8))
        v = sym_eigenvalues(toeplitz_from_autocorr(r))
        assert v.sum() == pytest.approx(r[0] * r.size, rel=1e-9, abs=1e-9 * r[0])
        assert v.min() >= -1e-9 * r[0]

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            sym_eigenvalues([[1.0, 2.0], [0.0, 1.0]])

    def test_sweep_cap(self, rng):
        a = rng.normal(size=(6, 6))
        with pytest.raises(ConvergenceError):
            sym_eigenvalues(a + a.T, tolerance=0.0, max_sweeps=1)


class TestTwoTap:
    def test_pi_over_9(self):
        R, p = autocorr_matrix_2tap(np.pi / 9, 1.0)
        v = sym_eigenvalues(R)
        np.testing.assert_allclose(v, [1.9397, 0.0603], atol=1e-4)
        spread = eigenvalue_spread(v)
        c = np.cos(np.pi / 9)
        assert spread == pytest.approx((1 + c) / (1 - c), rel=1e-12)
        assert spread == pytest.approx(32.16, abs=0.01)

    def test_quarter_turn_is_identity(self):
        R, _ = autocorr_matrix_2tap(np.pi / 2)
        np.testing.assert_allclose(R, np.eye(2), atol=1e-15)

    def test_wiener(self):
        R, p = autocorr_matrix_2tap(np.pi / 9)
        np.testing.assert_allclose(wiener_solution(R, p), [2 * np.cos(np.pi / 9), -1.0], rtol=1e-12)
        np.testing.assert_allclose(wiener_solution(np.eye(2), [3.0, -4.0]), [3, -4])
        np.testing.assert_allclose(wiener_solution(2 * np.eye(2), [2.0, 4.0]), [1, 2])

    def test_wiener_rejects_indefinite(self):
        with pytest.raises(ValueError):
            wiener_solution([[1.0, 2.0], [2.0, 1.0]], [1.0, 1.0])


class TestSurface:
    def test_minimum_at_wiener(self):
        R, p = autocorr_matrix_2tap(np.pi / 9)
        w = wiener_solution(R, p)
        J_min = 1.0 - p @ np.linalg.solve(R, p)
        assert mse_cost(w, 1.0, p, R) == pytest.approx(J_min, abs=1e-12)
        surf = error_surface(1.0, p, R, step=0.05)
        assert surf.J.min() >= J_min - 1e-12
        g0 = surf.w0[np.argmin(np.abs(surf.w0 - w[0]))]
        g1 = surf.w1[np.argmin(np.abs(surf.w1 - w[1]))]
        assert surf.argmin() == pytest.approx((g0, g1))

    def test_isotropic(self):
        surf = error_surface(2.0, np.zeros(2), np.eye(2), (-1, 1), (-1, 1), 0.5)
        W0, W1 = np.meshgrid(surf.w0, surf.w1, indexing="ij")
        np.testing.assert_allclose(surf.J, 2.0 + W0 ** 2 + W1 ** 2)

    def test_gradient_finite_difference(self):
        R, p = autocorr_matrix_2tap(np.pi / 9)
        h = 0.01
        surf = error_surface(1.0, p, R, (0.0, 2.0), (-1.5, 0.5), h)
        dJ0 = (surf.J[2:, 1:-1] - surf.J[:-2, 1:-1]) / (2 * h)
        dJ1 = (surf.J[1:-1, 2:] - surf.J[1:-1, :-2]) / (2 * h)
        W0, W1 = np.meshgrid(surf.w0[1:-1], surf.w1[1:-1], indexing="ij")
        W = np.stack([W0, W1], -1)
        grad = 2 * (W @ R - p)
        # quadratic surface: central differences are exact up to rounding
        np.testing.assert_allclose(dJ0, grad[..., 0], atol=1e-9)
        np.testing.assert_allclose(dJ1, grad[..., 1], atol=1e-9)

    def test_csv(self):
        buf = io.StringIO()
        error_surface(1.0, np.zeros(2), np.eye(2), (0, 0.5), (0, 0.5), 0.5).write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "w0,w1,J" and len(lines) == 5


class TestComplexity:
    def test_structure(self):
        rep = complexity_report(order=8, n_samples=2000)
        lms = rep.counts["LMS"]
        steps = 2000 - 8
        assert (lms.mults, lms.adds) == ((2 * 8 + 1) * steps, 2 * 8 * steps)
        rls_per_step = rep.counts["RLS"].total() / steps
        assert 2 * 64 <= rls_per_step <= 8 * 64 + 64
        assert rep.ratios()["RLS"] >= 10
        table = rep.format_table()
        assert "LMS 1, Levinson-Durbin 21, RLS 52" in table

    def test_deterministic(self):
        a = complexity_report(4, 1000)
        b = complexity_report(4, 1000)
        assert {k: v.as_dict() for k, v in a.counts.items()} == {k: v.as_dict() for k, v in b.counts.items()}

    def test_csv(self):
        buf = io.StringIO()
        complexity_report(4, 1000).write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "algorithm,mults,adds,divs,total,ratio_to_lms,reported_flops_ratio"
        assert [line.split(",")[0] for line in lines[1:]] == ["LMS", "Levinson-Durbin", "RLS"]


def test_opcount_monotone():
    ops = OpCount()
    ops.add(mults=3, adds=2)
    ops += OpCount(1, 1, 1)
    assert ops.total() == 8
    with pytest.raises(ValueError):
        ops.add(mults=-1)
