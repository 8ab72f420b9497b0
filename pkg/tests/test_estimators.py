import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from sparseopt import generate_gaussian_ls, generate_quartic
from sparseopt.estimators import SparseLeastSquares, SparseQuadraticEquations


@pytest.fixture(scope="module")
def planted():
    inst = generate_gaussian_ls(21, 40, 60, 4)
    return inst.matrix, inst.vector, inst.x_true


class TestSparseLeastSquares:
    @pytest.mark.parametrize("algorithm", ["gss", "pss", "omp", "iht"])
    def test_recovers_support(self, planted, algorithm):
        X, y, w = planted
        est = SparseLeastSquares(s=4, algorithm=algorithm, n_starts=5).fit(X, y)
        if algorithm == "omp":
            np.testing.assert_allclose(est.coef_, w, atol=1e-8)
        assert np.count_nonzero(est.coef_) <= 4
        assert est.n_features_in_ == 60
        assert est.predict(X).shape == (40,)

    def test_gss_exact(self, planted):
        X, y, w = planted
        est = SparseLeastSquares(s=4, n_starts=10).fit(X, y)
        np.testing.assert_array_equal(est.support_, np.flatnonzero(w))
        assert est.score(X, y) == pytest.approx(1.0)
        assert est.certificate_.is_cw_minimum

    def test_clone_and_params(self):
        est = SparseLeastSquares(s=3, algorithm="pss", L=2.0)
        twin = clone(est)
        assert twin.get_params() == est.get_params()
        assert twin.set_params(s=5).s == 5

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            SparseLeastSquares().predict(np.ones((2, 3)))

    def test_validation(self, planted):
        X, y, _ = planted
        with pytest.raises(ValueError):
            SparseLeastSquares(s=60).fit(X, y)
        with pytest.raises(ValueError):
            SparseLeastSquares(algorithm="lasso").fit(X, y)
        with pytest.raises(ValueError):
            SparseLeastSquares(n_starts=0).fit(X, y)
        est = SparseLeastSquares(s=2, algorithm="mp").fit(X, y)
        with pytest.raises(ValueError):
            est.predict(X[:, :5])


class TestSparseQuadraticEquations:
    def test_fit(self):
        inst = generate_quartic(100, 20, 30, 3)
        est = SparseQuadraticEquations(s=3, n_starts=20).fit(inst.matrix, inst.vector)
        err = min(np.linalg.norm(est.coef_ - inst.x_true), np.linalg.norm(est.coef_ + inst.x_true))
        assert err < 1e-3
        np.testing.assert_allclose(est.predict(inst.matrix), inst.vector, atol=1e-4)

    def test_rejects_pursuit(self):
        with pytest.raises(ValueError):
            SparseQuadraticEquations(algorithm="omp").fit(np.ones((3, 4)), np.ones(3))
