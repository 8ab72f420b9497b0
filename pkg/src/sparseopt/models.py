"""Objective functions with exact coordinate-wise minimization oracles.

Each model exposes ``value``, ``grad`` and a batched oracle
``coordinate_minima_batch(X)`` that, for every row ``x`` of ``X`` and every
coordinate ``j``, returns the global minimizer ``t`` of ``f(x + t e_j)`` and
the minimum value. The single-coordinate and swap oracles are thin views on
the batched one.
"""
from abc import ABC, abstractmethod
from functools import cached_property
from itertools import combinations

import numpy as np

from .numerics import as_matrix, as_vector, cubic_roots_batch, lambda_max_sym, sym2x2_lambda_max
from .sparsity import SparseVector

__all__ = [
    "UnboundedDirectionError",
    "ObjectiveModel",
    "LeastSquaresModel",
    "QuadraticModel",
    "QuarticModel",
]

_DEGENERATE_RTOL = 1e-14
_TIE_RTOL = 1e-13


class UnboundedDirectionError(ValueError):
    """The objective has no minimum along a coordinate direction."""


def _vec(x, n):
    if isinstance(x, SparseVector):
        x = x.entries
    x = as_vector(x, "x")
    if x.shape[0] != n:
        raise ValueError(f"dimension mismatch: model has n={n}, x has {x.shape[0]} entries")
    return x


class ObjectiveModel(ABC):
    """A lower-bounded smooth objective on R^n."""

    n: int
    lower_bound = None

    @abstractmethod
    def value(self, x):
        """Objective value at ``x``."""

    @abstractmethod
    def grad(self, x):
        """Gradient at ``x``."""

    @abstractmethod
    def coordinate_minima_batch(self, X):
        """Coordinate minimizers for every row of ``X``.

        Returns ``(T, F)`` of shape ``(k, n)``. Unbounded directions are
        marked with ``T = nan`` and ``F = -inf``.
        """

    @abstractmethod
    def coordinate_curvature(self, x):
        """Diagonal of the Hessian at ``x``."""

    @abstractmethod
    def _lipschitz(self):
        ...

    def __call__(self, x):
        return self.value(x)

    def coordinate_minima(self, x):
        x = _vec(x, self.n)
        T, F = self.coordinate_minima_batch(x[None, :])
        return T[0], F[0]

    def minimize_1d(self, x, i):
        """Global minimizer and minimum of ``t -> f(x + t e_i)``."""
        if not 0 <= i < self.n:
            raise IndexError(f"coordinate {i} out of range for n={self.n}")
        T, F = self.coordinate_minima(x)
        if np.isnan(T[i]):
            raise UnboundedDirectionError(f"objective is unbounded below along coordinate {i}")
        return float(T[i]), float(F[i])

    def swap_minima(self, x, rows):
        """Coordinate minima after zeroing each coordinate in ``rows``.

        Row ``r`` of the result corresponds to the point ``x - x_i e_i`` with
        ``i = rows[r]``.
        """
        x = _vec(x, self.n)
        rows = np.asarray(rows, dtype=int)
        Y = np.repeat(x[None, :], rows.shape[0], axis=0)
        Y[np.arange(rows.shape[0]), rows] = 0.0
        return self.coordinate_minima_batch(Y)

    def minimize_swap(self, x, i, j):
        """Minimize over coordinate ``j`` after zeroing coordinate ``i``."""
        x = _vec(x, self.n)
        y = x.copy()
        y[i] = 0.0
        return self.minimize_1d(y, j)

    def lipschitz_constants(self):
        """``(L, L2)``: global and two-coordinate gradient Lipschitz constants.

        Either may be ``None`` when the gradient is not globally Lipschitz.
        """
        return self._lipschitz_cached

    @cached_property
    def _lipschitz_cached(self):
        return self._lipschitz()

    def surrogate_value(self, x, y, L):
        """Quadratic upper model ``f(y) + <grad f(y), x - y> + L/2 |x - y|^2``."""
        x = _vec(x, self.n)
        y = _vec(y, self.n)
        d = x - y
        return float(self.value(y) + self.grad(y) @ d + 0.5 * L * d @ d)


def _pair_extremes(G):
    """Largest |eigenvalue| over all 2x2 principal submatrices of ``G``."""
    n = G.shape[0]
    if n < 2:
        return None
    i, j = np.array(list(combinations(range(n), 2))).T
    a, b, d = G[i, i], G[i, j], G[j, j]
    hi = sym2x2_lambda_max(a, b, d)
    lo = 0.5 * (a + d) - np.hypot(0.5 * (a - d), b)
    return float(np.max(np.maximum(np.abs(hi), np.abs(lo))))


class LeastSquaresModel(ObjectiveModel):
    """``f(x) = |A x - b|^2``."""

    lower_bound = 0.0

    def __init__(self, A, b):
        A = as_matrix(A, "A")
        b = as_vector(b, "b")
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        col_sq = np.einsum("ij,ij->j", A, A)
        if np.any(col_sq == 0.0):
            raise ValueError(f"A has zero columns: {np.flatnonzero(col_sq == 0.0).tolist()}")
        self.A, self.b, self.col_sq = A, b, col_sq
        self.m, self.n = A.shape

    def residual(self, x):
        return self.A @ _vec(x, self.n) - self.b

    def value(self, x):
        r = self.residual(x)
        return float(r @ r)

    def grad(self, x):
        return 2.0 * self.A.T @ self.residual(x)

    def coordinate_minima_batch(self, X):
        R = X @ self.A.T - self.b
        G = R @ self.A
        T = -G / self.col_sq
        F = np.einsum("ij,ij->i", R, R)[:, None] - G * G / self.col_sq
        return T, np.maximum(F, 0.0)

    def coordinate_curvature(self, x):
        return 2.0 * self.col_sq

    @cached_property
    def gram(self):
        return self.A.T @ self.A

    def _lipschitz(self):
        G = self.gram
        return 2.0 * lambda_max_sym(G), 2.0 * _pair_extremes(G)


class QuadraticModel(ObjectiveModel):
    """``f(x) = x^T Q x + 2 b^T x`` with symmetric ``Q``."""

    def __init__(self, Q, b):
        Q = as_matrix(Q, "Q")
        b = as_vector(b, "b")
        n = b.shape[0]
        if Q.shape != (n, n):
            raise ValueError(f"Q must be {n}x{n}, got {Q.shape}")
        if np.max(np.abs(Q - Q.T)) > 1e-12 * max(1.0, float(np.max(np.abs(Q)))):
            raise ValueError("Q is not symmetric")
        self.Q, self.b, self.n = Q, b, n
        self.diag = np.diag(Q).copy()

    def value(self, x):
        x = _vec(x, self.n)
        return float(x @ self.Q @ x + 2.0 * self.b @ x)

    def grad(self, x):
        x = _vec(x, self.n)
        return 2.0 * (self.Q @ x + self.b)

    def coordinate_minima_batch(self, X):
        QX = X @ self.Q
        fX = np.einsum("ij,ij->i", QX, X) + 2.0 * X @ self.b
        G = 2.0 * (QX + self.b)
        d = np.broadcast_to(self.diag, G.shape)
        pos = d > 0.0
        flat = (d == 0.0) & (G == 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            T = np.where(pos, -G / (2.0 * d), np.where(flat, 0.0, np.nan))
            F = np.where(pos, fX[:, None] - G * G / (4.0 * d),
                         np.where(flat, fX[:, None], -np.inf))
        return T, F

    def coordinate_curvature(self, x):
        return 2.0 * self.diag

    def _lipschitz(self):
        Q = self.Q
        rho = max(lambda_max_sym(Q), -lambda_max_sym(-Q))
        return 2.0 * rho, 2.0 * _pair_extremes(Q)


class QuarticModel(ObjectiveModel):
    """``f(x) = sum_m (x^T A_m x - c_m)^2``.

    Pass ``factors`` (rows ``a_m``) for the rank-one case ``A_m = a_m a_m^T``;
    the matrices are then formed lazily and never needed by the oracles.
    """

    lower_bound = 0.0

    def __init__(self, mats=None, c=None, factors=None):
        if c is None:
            raise ValueError("targets c are required")
        c = as_vector(c, "c")
        if factors is not None:
            factors = as_matrix(factors, "factors")
            if factors.shape[0] != c.shape[0]:
                raise ValueError("need one factor row per target")
            self.factors = factors
            self.n = factors.shape[1]
            self._mats = None
        else:
            if mats is None:
                raise ValueError("either mats or factors is required")
            mats = np.asarray(mats, dtype=np.float64)
            if mats.ndim != 3 or mats.shape[1] != mats.shape[2] or mats.shape[0] != c.shape[0]:
                raise ValueError(f"mats must have shape (m, n, n) matching c, got {mats.shape}")
            if not np.all(np.isfinite(mats)):
                raise ValueError("mats has non-finite entries")
            if np.max(np.abs(mats - mats.transpose(0, 2, 1))) > 1e-12 * max(1.0, float(np.max(np.abs(mats)))):
                raise ValueError("every A_m must be symmetric")
            self.factors = None
            self.n = mats.shape[1]
            self._mats = mats
        self.c = c
        self.m = c.shape[0]

    @property
    def mats(self):
        if self._mats is None:
            F = self.factors
            self._mats = np.einsum("mi,mj->mij", F, F)
        return self._mats

    def _forms(self, X):
        """Per row: ``P[k, m, :] = A_m x_k`` and ``gamma[k, m] = x_k^T A_m x_k - c_m``."""
        if self.factors is not None:
            U = X @ self.factors.T                       # (k, m)
            P = U[:, :, None] * self.factors[None, :, :]
            gamma = U * U - self.c
        else:
            P = np.einsum("mij,kj->kmi", self.mats, X)
            gamma = np.einsum("kmi,ki->km", P, X) - self.c
        return P, gamma

    def _alpha(self):
        if self.factors is not None:
            return self.factors ** 2                     # (m, n)
        return np.einsum("mii->mi", self.mats)

    def value(self, x):
        x = _vec(x, self.n)
        _, gamma = self._forms(x[None, :])
        return float(gamma[0] @ gamma[0])

    def grad(self, x):
        x = _vec(x, self.n)
        P, gamma = self._forms(x[None, :])
        return 4.0 * gamma[0] @ P[0]

    def coordinate_curvature(self, x):
        x = _vec(x, self.n)
        P, gamma = self._forms(x[None, :])
        alpha = self._alpha()
        beta = 2.0 * P[0]
        return 2.0 * np.sum(beta * beta + 2.0 * alpha * gamma[0][:, None], axis=0)

    def _restriction_coeffs(self, X):
        """Coefficients of ``t -> f(x_k + t e_i)`` as ``(k, n)`` arrays, high to low,
        plus a function evaluating the sum of squares at candidate steps."""
        k = X.shape[0]
        if self.factors is not None:
            # rank one: A_m x = u_m a_m with u = a_m^T x, so every sum over m
            # is a matrix product against a power of the factor matrix
            F = self.factors
            if not hasattr(self, "_powers"):
                self._powers = (F * F, F ** 3, np.sum(F ** 4, axis=0))
            F2, F3, F4sum = self._powers
            U = X @ F.T
            gamma = U * U - self.c
            c4 = np.broadcast_to(F4sum, (k, self.n))
            c3 = 4.0 * U @ F3
            c2 = (4.0 * U * U + 2.0 * gamma) @ F2
            c1 = 4.0 * (U * gamma) @ F
            c0 = np.broadcast_to(np.sum(gamma * gamma, axis=1)[:, None], (k, self.n))

            def evaluate(tt):                            # tt: (k, n, p)
                q = (U[:, :, None, None] + F[None, :, :, None] * tt[:, None]) ** 2
                q -= self.c[None, :, None, None]
                return np.einsum("kmnp,kmnp->knp", q, q)
            return (c4, c3, c2, c1, c0), evaluate

        P, gamma = self._forms(X)
        alpha = self._alpha()[None, :, :]                # (1, m, n)
        beta = 2.0 * P                                   # (k, m, n)
        g = gamma[:, :, None]                            # (k, m, 1)
        # restriction t -> sum_m (alpha t^2 + beta t + gamma)^2
        c4 = np.sum(alpha * alpha, axis=1) * np.ones(k)[:, None]
        c3 = 2.0 * np.sum(alpha * beta, axis=1)
        c2 = np.sum(beta * beta + 2.0 * alpha * g, axis=1)
        c1 = 2.0 * np.sum(beta * g, axis=1)
        c0 = np.sum(g * g, axis=1) * np.ones(X.shape[1])[None, :]

        def evaluate(tt):
            q = (alpha[..., None] * tt[:, None] ** 2 + beta[..., None] * tt[:, None]
                 + gamma[:, :, None, None])              # (k, m, n, p)
            return np.sum(q * q, axis=1)
        return (c4, c3, c2, c1, c0), evaluate

    def coordinate_minima_batch(self, X):
        (c4, c3, c2, c1, c0), evaluate = self._restriction_coeffs(X)
        scale = np.maximum.reduce([np.abs(c4), np.abs(c3), np.abs(c2), np.abs(c1), np.abs(c0)])
        thr = _DEGENERATE_RTOL * scale

        k, n = c4.shape
        cand = np.full((k, n, 4), np.nan)
        cand[..., 3] = 0.0
        quartic = np.abs(c4) > thr
        if np.any(quartic):
            cand[quartic, :3] = cubic_roots_batch(
                4.0 * c4[quartic], 3.0 * c3[quartic], 2.0 * c2[quartic], c1[quartic])
        unbounded = quartic & (c4 < 0.0)
        # c4 ~ 0 forces alpha ~ 0, hence c3 ~ 0: at most quadratic
        quad = ~quartic & (np.abs(c2) > thr)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand[..., 0] = np.where(quad, -c1 / (2.0 * c2), cand[..., 0])
        unbounded |= quad & (c2 < 0.0)
        unbounded |= ~quartic & ~quad & (np.abs(c1) > thr)

        # exact evaluation of the sum of squares at each candidate
        tt = np.nan_to_num(cand, nan=0.0)                # (k, n, 4)
        vals = evaluate(tt)
        vals = np.where(np.isnan(cand), np.inf, vals)

        fmin = np.min(vals, axis=-1, keepdims=True)
        tied = vals <= fmin + _TIE_RTOL * (1.0 + np.abs(fmin))
        absmin = np.min(np.where(tied, np.abs(tt), np.inf), axis=-1, keepdims=True)
        tied &= np.abs(tt) == absmin
        T = np.min(np.where(tied, tt, np.inf), axis=-1)
        pick = np.argmax(tied & (tt == T[..., None]), axis=-1)[..., None]
        F = np.take_along_axis(vals, pick, axis=-1)[..., 0]
        T = np.where(unbounded, np.nan, T)
        F = np.where(unbounded, -np.inf, F)
        return T, F

    def _lipschitz(self):
        return None, None
