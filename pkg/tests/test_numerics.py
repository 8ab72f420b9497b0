import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparseopt.numerics import (
    ConvergenceError,
    as_vector,
    cubic_roots_batch,
    lambda_max_sym,
    mat_vec,
    real_cubic_roots,
    sym2x2_lambda_max,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


class TestMatVec:
    def test_matches_matmul(self, rng):
        A = rng.normal(size=(4, 6))
        x = rng.normal(size=6)
        np.testing.assert_array_equal(mat_vec(A, x), A @ x)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            mat_vec(np.ones((2, 3)), np.ones(2))

    @pytest.mark.parametrize("bad", [np.nan, np.inf])
    def test_rejects_nonfinite(self, bad):
        with pytest.raises(ValueError, match="non-finite"):
            mat_vec(np.array([[1.0, bad]]), np.ones(2))

    def test_vector_must_be_1d(self):
        with pytest.raises(ValueError):
            as_vector(np.ones((2, 2)))


class TestLambdaMax:
    def test_identity_plus_ones(self):
        assert lambda_max_sym(np.eye(5) + np.ones((5, 5))) == pytest.approx(6.0, abs=1e-12)

    def test_diagonal(self):
        assert lambda_max_sym(np.diag([1.0, 3.0, 2.0])) == pytest.approx(3.0, abs=1e-12)

    def test_start_orthogonal_to_top_eigenvector(self):
        # all-ones start lies in the eigenspace of 1; the top eigenvalue is 3
        M = np.array([[2.0, -1.0], [-1.0, 2.0]])
        assert lambda_max_sym(M) == pytest.approx(3.0, abs=1e-10)

    def test_indefinite(self):
        M = np.array([[-5.0, 0.0], [0.0, 1.0]])
        assert lambda_max_sym(M) == pytest.approx(1.0, abs=1e-10)

    def test_zero_matrix(self):
        assert lambda_max_sym(np.zeros((3, 3))) == 0.0

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            lambda_max_sym(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_iteration_cap(self):
        # two nearly equal top eigenvalues converge slowly
        M = np.diag([1.0, 1.0 - 1e-9, 0.0]) + 1e-3 * np.eye(3)
        M[0, 2] = M[2, 0] = 0.3
        with pytest.raises(ConvergenceError):
            lambda_max_sym(M, max_iter=3, rtol=1e-16)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 2**32 - 1))
    def test_against_eigvalsh(self, n, seed):
        B = np.random.default_rng(seed).normal(size=(n, n))
        M = B @ B.T
        expected = np.linalg.eigvalsh(M)[-1]
        assert lambda_max_sym(M) == pytest.approx(expected, rel=1e-8, abs=1e-10)

    @given(finite, finite, finite)
    def test_2x2_closed_form(self, a, b, d):
        expected = np.linalg.eigvalsh(np.array([[a, b], [b, d]]))[-1]
        assert sym2x2_lambda_max(a, b, d) == pytest.approx(expected, abs=1e-9)


class TestCubicRoots:
    @pytest.mark.parametrize(
        "coeffs, roots",
        [
            ((1, 0, -1, 0), [-1, 0, 1]),
            ((1, -6, 11, -6), [1, 2, 3]),
            ((1, -3, 3, -1), [1]),
            ((0, 1, -2, 1), [1]),
            ((0, 0, 2, 2), [-1]),
            ((1, 0, 0, -125), [5]),
            ((0, 1, 0, 1), []),
            ((0, 0, 0, 3), []),
        ],
    )
    def test_known(self, coeffs, roots):
        np.testing.assert_allclose(real_cubic_roots(*coeffs), roots, atol=1e-9)

    def test_zero_polynomial(self):
        with pytest.raises(ValueError):
            real_cubic_roots(0, 0, 0, 0)

    @pytest.mark.parametrize("roots", [(3.0, 3.0, 3.638423471152093), (0.0, 3.28125, 3.28125)])
    def test_double_root_not_lost(self, roots):
        got = real_cubic_roots(*np.poly(roots))
        for r in roots:
            assert min(abs(r - g) for g in got) <= 1e-6

    def test_double_root_reported_once(self):
        # (t - 1)^2 (t + 2)
        np.testing.assert_allclose(real_cubic_roots(1, 0, -3, 2), [-2, 1], atol=1e-7)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.floats(0.1, 10))
    def test_planted_roots(self, r, lead):
        r = np.sort(r)
        c = lead * np.poly(r)
        got = real_cubic_roots(*c)
        # every true root is close to a reported one
        for root in r:
            assert min(abs(root - g) for g in got) <= 1e-4 * (1 + abs(root))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(finite, min_size=4, max_size=4).filter(lambda c: abs(c[0]) > 1e-3))
    def test_roots_are_roots(self, c):
        scale = max(abs(v) for v in c)
        for t in real_cubic_roots(*c):
            resid = np.polyval(c, t)
            deriv_scale = sum(abs(v) * max(1.0, abs(t)) ** (3 - k) for k, v in enumerate(c))
            assert abs(resid) <= 1e-9 * deriv_scale + 1e-12 * scale

    def test_against_companion_eigenvalues(self, rng):
        C = rng.normal(size=(500, 4))
        batch = cubic_roots_batch(*C.T)
        for c, got in zip(C, batch):
            ref = np.roots(c)
            real = np.sort(ref[np.abs(ref.imag) < 1e-7].real)
            got = got[~np.isnan(got)]
            assert len(got) == len(real)
            np.testing.assert_allclose(got, real, rtol=1e-6, atol=1e-8)
