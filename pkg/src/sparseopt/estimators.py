"""scikit-learn style wrappers around the solvers."""
import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .models import LeastSquaresModel, QuarticModel
from .rng import CounterRNG
from .solvers import SolverConfig, solve

__all__ = ["SparseLeastSquares", "SparseQuadraticEquations"]


def _best_of_starts(model, s, config, n_starts, random_state):
    """Run from zero and from ``n_starts - 1`` random sparse starts; keep the
    lowest objective (earliest run on ties)."""
    best = solve(model, s, config, np.zeros(model.n))
    for run in range(1, n_starts):
        x0 = CounterRNG(random_state, run).sparse_normal(model.n, s)
        trace = solve(model, s, config, x0)
        if trace.value < best.value:
            best = trace
    return best


class _SparseBase(BaseEstimator):
    _algorithms = ()

    def _config(self, L=None):
        if self.algorithm not in self._algorithms:
            raise ValueError(f"algorithm must be one of {self._algorithms}, got {self.algorithm!r}")
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")
        return SolverConfig(algorithm=self.algorithm, L=L, max_iter=self.max_iter)

    def _check_s(self, n):
        if not 0 < self.s < n:
            raise ValueError(f"need 0 < s < n_features, got s={self.s}, n_features={n}")

    def _store(self, trace, n):
        self.coef_ = trace.x.entries.copy()
        self.support_ = trace.x.support.copy()
        self.trace_ = trace
        self.certificate_ = trace.certificate
        self.n_iter_ = trace.n_iter
        self.n_features_in_ = n
        return self

    def _check_predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X


class SparseLeastSquares(RegressorMixin, _SparseBase):
    """Least squares with at most ``s`` nonzero coefficients.

    Minimizes ``|X w - y|^2`` subject to ``|w|_0 <= s``, with no intercept.
    ``n_starts > 1`` adds random sparse starts for the start-dependent
    algorithms and keeps the best limit.
    """

    _algorithms = ("iht", "gss", "pss", "mp", "omp")

    def __init__(self, s=1, algorithm="gss", L=None, max_iter=10_000, n_starts=1, random_state=0):
        self.s = s
        self.algorithm = algorithm
        self.L = L
        self.max_iter = max_iter
        self.n_starts = n_starts
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self._check_s(X.shape[1])
        model = LeastSquaresModel(X, y)
        L = self.L
        if self.algorithm == "iht" and L is None:
            L = 1.1 * model.lipschitz_constants()[0]
        config = self._config(L)
        starts = 1 if self.algorithm in ("mp", "omp") else self.n_starts
        return self._store(_best_of_starts(model, self.s, config, starts, self.random_state), X.shape[1])

    def predict(self, X):
        return self._check_predict(X) @ self.coef_


class SparseQuadraticEquations(_SparseBase):
    """Sparse solution of ``(x_i^T w)^2 = y_i`` by least-squares fitting.

    Minimizes ``sum_i ((x_i^T w)^2 - y_i)^2`` subject to ``|w|_0 <= s``.
    The sign of ``w`` is not identifiable.
    """

    _algorithms = ("gss", "pss")

    def __init__(self, s=1, algorithm="gss", max_iter=10_000, n_starts=10, random_state=0):
        self.s = s
        self.algorithm = algorithm
        self.max_iter = max_iter
        self.n_starts = n_starts
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self._check_s(X.shape[1])
        config = self._config()
        model = QuarticModel(factors=X, c=y)
        return self._store(_best_of_starts(model, self.s, config, self.n_starts, self.random_state),
                           X.shape[1])

    def predict(self, X):
        return (self._check_predict(X) @ self.coef_) ** 2
