"""Algorithms for sparsity-constrained minimization.

* :func:`iht` -- iterative hard thresholding with constant step ``1/L``.
* :func:`greedy_sparse_simplex` -- best single-coordinate or swap move.
* :func:`partial_sparse_simplex` -- cheap two-option variant of the above.
* :func:`matching_pursuit`, :func:`orthogonal_matching_pursuit` -- the
  classical greedy baselines for least squares.

Every solver returns a :class:`SolverTrace`. All argmin/argmax ties go to
the lowest index (then the lowest second index for pairs).
"""
import csv
import enum
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .models import LeastSquaresModel, UnboundedDirectionError, _vec
from .optimality import certify, default_grad_tol
from .sparsity import SparseVector, project_cs, project_dense, snap, support_sets

__all__ = [
    "ALGORITHMS",
    "Termination",
    "Move",
    "SolverConfig",
    "SolverTrace",
    "SingularSupportError",
    "iht",
    "greedy_sparse_simplex",
    "partial_sparse_simplex",
    "matching_pursuit",
    "orthogonal_matching_pursuit",
    "surrogate_argmin_check",
    "solve",
]

ALGORITHMS = ("iht", "gss", "pss", "mp", "omp")


class Termination(str, enum.Enum):
    STATIONARY_STOP = "StationaryStop"
    NO_IMPROVING_MOVE = "NoImprovingMove"
    MAX_ITER = "MaxIter"
    STEP_TOL = "StepTol"
    SUPPORT_FULL = "SupportFull"


class SingularSupportError(ValueError):
    """A least-squares refit hit a rank-deficient support."""


@dataclass(frozen=True)
class Move:
    kind: str            # "coordinate", "swap", "threshold" or "refit"
    i: object = None     # coordinate removed (swap) or moved (coordinate)
    j: object = None     # coordinate inserted (swap)
    t: object = None     # step taken along the moved coordinate

    def describe(self):
        if self.kind == "swap":
            return f"swap {self.i}->{self.j} t={self.t!r}"
        if self.kind == "coordinate":
            return f"coordinate {self.i} t={self.t!r}"
        if self.kind == "refit":
            return f"refit +{self.i}"
        return self.kind


@dataclass(frozen=True)
class SolverConfig:
    algorithm: str = "gss"
    L: object = None
    max_iter: int = 10_000
    step_tol: float = 1e-10
    decrease_tol: float = 1e-12
    record_trace: bool = True

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.algorithm == "iht" and (self.L is None or not self.L > 0):
            raise ValueError("IHT needs a positive L")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")


@dataclass
class SolverTrace:
    algorithm: str
    s: int
    iterates: list = field(default_factory=list)
    values: list = field(default_factory=list)
    supports: list = field(default_factory=list)
    moves: list = field(default_factory=list)
    termination: object = None
    n_iter: int = 0
    certificate: object = None
    metadata: dict = field(default_factory=dict)

    @property
    def x(self):
        return self.iterates[-1]

    @property
    def value(self):
        return self.values[-1]

    def to_dict(self):
        return {
            "algorithm": self.algorithm,
            "s": self.s,
            "termination": self.termination.value if self.termination else None,
            "n_iter": self.n_iter,
            "iterates": [v.entries.tolist() for v in self.iterates],
            "values": list(self.values),
            "supports": [list(S) for S in self.supports],
            "moves": [vars(m) for m in self.moves],
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "metadata": self.metadata,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, default=_json_default)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "f", "support", "move"])
        first = self.n_iter - len(self.moves)
        for k, (val, S) in enumerate(zip(self.values, self.supports)):
            move = self.moves[k - 1].describe() if k >= 1 else "start"
            w.writerow([first + k, repr(val), " ".join(map(str, S)), move])
        return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if hasattr(obj, "__dict__"):
        return vars(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


class _Recorder:
    """Collects iterates; without ``keep`` only the latest one is retained
    and its objective value is computed once, at :meth:`finish`."""

    def __init__(self, algorithm, s, keep, model):
        self.trace = SolverTrace(algorithm, s)
        self.keep = keep
        self.model = model
        self.last = None

    def push(self, x, value=None, move=None):
        if move is not None:
            self.trace.n_iter += 1
        if not self.keep:
            self.last = (x, value)
            return
        t = self.trace
        t.iterates.append(SparseVector(x))
        t.values.append(float(self.model.value(x) if value is None else value))
        t.supports.append(tuple(int(i) for i in np.flatnonzero(x)))
        if move is not None:
            t.moves.append(move)

    def finish(self, termination):
        t = self.trace
        if not self.keep and self.last is not None:
            x, value = self.last
            t.iterates = [SparseVector(x)]
            t.values = [float(self.model.value(x) if value is None else value)]
            t.supports = [tuple(int(i) for i in np.flatnonzero(x))]
        t.termination = termination
        return t


def _start(model, x0, s):
    x = snap(_vec(x0, model.n))
    if np.count_nonzero(x) > s:
        raise ValueError(f"starting point has {np.count_nonzero(x)} nonzeros, budget is s={s}")
    return x


def _threshold(config, f):
    return config.decrease_tol * (1.0 + abs(f))


def _simplex_grad_tol(model, x, config, f):
    """Gradient resolution implied by stopping on a decrease below ``delta``.

    A coordinate with curvature ``c`` and slope ``g`` offers a decrease of
    about ``g^2 / (2c)``, so stopping bounds ``|g|`` by ``sqrt(2 c delta)``.
    """
    g = model.grad(x)
    c = float(np.max(np.abs(model.coordinate_curvature(x))))
    _, I0 = support_sets(x)
    return default_grad_tol(g, I0) + 2.0 * math.sqrt(2.0 * c * _threshold(config, f))


def iht(model, x0, s, config):
    """Iterative hard thresholding: ``x <- P_s(x - grad f(x) / L)``.

    Stops once the infinity-norm change of an iterate is at most
    ``config.step_tol``. When ``L`` does not exceed the model's ``L(f)`` the
    trace metadata carries a warning, since descent is then not guaranteed.
    """
    L = config.L
    if L is None or not L > 0:
        raise ValueError("IHT needs a positive L")
    Lf, L2 = model.lipschitz_constants()
    rec = _Recorder("iht", s, config.record_trace, model)
    if Lf is not None and L <= Lf:
        msg = f"L={L!r} does not exceed L(f)={Lf!r}; descent is not guaranteed"
        rec.trace.metadata["warning"] = msg
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    x = _start(model, x0, s)
    rec.push(x)
    termination = Termination.MAX_ITER
    for _ in range(config.max_iter):
        y = snap(project_dense(x - model.grad(x) / L, s))
        step = float(np.max(np.abs(y - x)))
        rec.push(y, None, Move("threshold", t=step))
        x = y
        if step <= config.step_tol:
            termination = Termination.STEP_TOL
            break
    g = model.grad(x)
    _, I0 = support_sets(x)
    grad_tol = default_grad_tol(g, I0) + 4.0 * max(L, Lf or 0.0) * math.sqrt(model.n) * config.step_tol
    rec.trace.certificate = certify(model, x, s, L=L, grad_tol=grad_tol)
    return rec.finish(termination)


def _coordinate_step(model, x):
    T, F = model.coordinate_minima(x)
    if np.any(np.isneginf(F)):
        raise UnboundedDirectionError("objective is unbounded below along a coordinate")
    i = int(np.argmin(F))
    y = x.copy()
    y[i] += T[i]
    return y, Move("coordinate", i=i, t=float(T[i]))


def _certify_simplex(model, x, s, config, fx, L):
    return certify(model, x, s, L=L, grad_tol=_simplex_grad_tol(model, x, config, fx))


def greedy_sparse_simplex(model, x0, s, config=SolverConfig(), merge_moves=False):
    """Greedy sparse-simplex method.

    Under budget, the best single-coordinate minimization is taken. At full
    budget, every pair (zero ``i`` in the support, re-minimize over ``j``) is
    evaluated and the best one taken. A move is accepted only if it lowers
    ``f`` by more than ``decrease_tol * (1 + |f|)``.

    By default ``j`` ranges over the off-support indices and ``i`` itself,
    so a full-budget move is either a true swap or an in-support coordinate
    step. ``merge_moves=True`` also admits ``j`` elsewhere in the support,
    which shrinks the support by one. For convex objectives those moves
    cannot improve a point where the default rule stops.
    """
    x = _start(model, x0, s)
    fx = model.value(x)
    rec = _Recorder("gss", s, config.record_trace, model)
    rec.push(x, fx)
    termination = Termination.MAX_ITER
    for _ in range(config.max_iter):
        if np.count_nonzero(x) < s:
            y, move = _coordinate_step(model, x)
        else:
            I1, _ = support_sets(x)
            T, F = model.swap_minima(x, I1)
            if not merge_moves:
                blocked = np.zeros(F.shape, dtype=bool)
                blocked[:, I1] = True
                blocked[np.arange(len(I1)), I1] = False
                F = np.where(blocked, np.inf, F)
            if np.any(np.isneginf(F)):
                raise UnboundedDirectionError("objective is unbounded below along a coordinate")
            r, j = np.unravel_index(int(np.argmin(F)), F.shape)
            i = int(I1[r])
            y = x.copy()
            y[i] = 0.0
            y[j] += T[r, j]
            move = Move("swap", i=i, j=int(j), t=float(T[r, j]))
        y = snap(y)
        fy = model.value(y)
        if not fy < fx - _threshold(config, fx):
            termination = Termination.NO_IMPROVING_MOVE
            break
        x, fx = y, fy
        rec.push(x, fx, move)
    rec.trace.certificate = _certify_simplex(model, x, s, config, fx, model.lipschitz_constants()[1])
    return rec.finish(termination)


def partial_sparse_simplex(model, x0, s, config=SolverConfig()):
    """Partial sparse-simplex method.

    Identical to the greedy method under budget. At full budget only two
    candidates are compared: the best single-coordinate move inside the
    support, and replacing the smallest-magnitude support entry by the
    off-support coordinate with the largest partial derivative. The swap is
    taken unless the in-support move is strictly better.
    """
    x = _start(model, x0, s)
    fx = model.value(x)
    rec = _Recorder("pss", s, config.record_trace, model)
    rec.push(x, fx)
    termination = Termination.MAX_ITER
    for _ in range(config.max_iter):
        if np.count_nonzero(x) < s:
            y, move = _coordinate_step(model, x)
        else:
            I1, I0 = support_sets(x)
            g = model.grad(x)
            i2 = int(I0[np.argmax(np.abs(g[I0]))])
            mk = int(I1[np.argmin(np.abs(x[I1]))])
            # row 0: moves from x itself; row 1: moves after dropping x_mk
            Y = np.stack([x, x])
            Y[1, mk] = 0.0
            T, F = model.coordinate_minima_batch(Y)
            if np.any(np.isneginf(F[0, I1])) or np.isneginf(F[1, i2]):
                raise UnboundedDirectionError("objective is unbounded below along a coordinate")
            i1 = int(I1[np.argmin(F[0, I1])])
            if F[0, i1] < F[1, i2]:
                y = x.copy()
                y[i1] += T[0, i1]
                move = Move("coordinate", i=i1, t=float(T[0, i1]))
            else:
                y = Y[1].copy()
                y[i2] += T[1, i2]
                move = Move("swap", i=mk, j=i2, t=float(T[1, i2]))
        y = snap(y)
        fy = model.value(y)
        if not fy < fx - _threshold(config, fx):
            termination = Termination.NO_IMPROVING_MOVE
            break
        x, fx = y, fy
        rec.push(x, fx, move)
    rec.trace.certificate = _certify_simplex(model, x, s, config, fx, model.lipschitz_constants()[1])
    return rec.finish(termination)


def _require_ls(model):
    if not isinstance(model, LeastSquaresModel):
        raise TypeError("matching pursuit needs a LeastSquaresModel")
    return model.A, model.b, np.sqrt(model.col_sq)


def _select(A, r, norms, b_norm):
    corr = A.T @ r
    m = int(np.argmax(np.abs(corr) / norms))
    vanished = abs(corr[m]) <= 1e-14 * norms[m] * max(b_norm, np.finfo(float).tiny)
    return m, corr[m], vanished


def matching_pursuit(model, s, config=SolverConfig(algorithm="mp")):
    """Matching pursuit from ``x = 0`` until the support holds ``s`` indices.

    The residual ``r = b - A x`` is updated incrementally and re-synchronized
    with a fresh ``b - A x`` every 50 iterations; the largest drift seen is
    kept in ``metadata["max_residual_drift"]``.
    """
    A, b, norms = _require_ls(model)
    b_norm = float(np.linalg.norm(b))
    x = np.zeros(model.n)
    r = b.copy()
    rec = _Recorder("mp", s, config.record_trace, model)
    rec.push(x)
    drift = 0.0
    termination = Termination.MAX_ITER
    for k in range(config.max_iter):
        if np.count_nonzero(x) >= s:
            termination = Termination.SUPPORT_FULL
            break
        m, c, vanished = _select(A, r, norms, b_norm)
        if vanished:
            termination = Termination.STATIONARY_STOP
            break
        step = c / model.col_sq[m]
        x[m] += step
        r -= step * A[:, m]
        x = snap(x)
        if (k + 1) % 50 == 0:
            fresh = b - A @ x
            drift = max(drift, float(np.linalg.norm(fresh - r)))
            r = fresh
        rec.push(x, None, Move("coordinate", i=m, t=float(step)))
    else:
        if np.count_nonzero(x) >= s:
            termination = Termination.SUPPORT_FULL
    rec.trace.metadata["max_residual_drift"] = drift
    rec.trace.certificate = certify(model, x, s)
    return rec.finish(termination)


def orthogonal_matching_pursuit(model, s, config=SolverConfig(algorithm="omp"), cond_limit=1e12):
    """Orthogonal matching pursuit: MP selection, then a least-squares refit
    on the accumulated support after every selection."""
    A, b, norms = _require_ls(model)
    b_norm = float(np.linalg.norm(b))
    x = np.zeros(model.n)
    r = b.copy()
    S = []
    rec = _Recorder("omp", s, config.record_trace, model)
    rec.push(x)
    termination = Termination.SUPPORT_FULL
    for _ in range(min(s, config.max_iter)):
        m, _, vanished = _select(A, r, norms, b_norm)
        if vanished or m in S:
            termination = Termination.STATIONARY_STOP
            break
        S.append(m)
        A_S = A[:, S]
        if np.linalg.cond(A_S.T @ A_S) > cond_limit:
            raise SingularSupportError(f"support {sorted(S)} is numerically singular")
        coef, *_ = np.linalg.lstsq(A_S, b, rcond=None)
        x = np.zeros(model.n)
        x[S] = coef
        x = snap(x)
        r = b - A @ x
        rec.push(x, None, Move("refit", i=m))
    else:
        if len(S) < s:
            termination = Termination.MAX_ITER
    rec.trace.certificate = certify(model, x, s)
    return rec.finish(termination)


def surrogate_argmin_check(model, x, L, s, max_n=12, rtol=1e-12):
    """Check that one thresholded gradient step from ``x`` minimizes the
    quadratic surrogate ``h_L(., x)`` over all ``s``-sparse vectors.

    The minimum is found by brute force: on each support the surrogate is
    separable, so its minimizer is ``x - grad f(x) / L`` restricted there.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    if model.n > max_n:
        raise ValueError(f"exhaustive check limited to n <= {max_n}, got n={model.n}")
    x = _vec(x, model.n)
    y = x - model.grad(x) / L
    step = project_cs(y, s).entries
    h_step = model.surrogate_value(step, x, L)
    best, minimizers = math.inf, []
    for S in combinations(range(model.n), s):
        z = np.zeros(model.n)
        z[list(S)] = y[list(S)]
        h = model.surrogate_value(z, x, L)
        if h < best:
            best = h
        minimizers.append((h, z))
    tol = rtol * (1.0 + abs(best))
    if h_step > best + tol:
        return False
    scale = rtol * (1.0 + float(np.max(np.abs(y))))
    return any(h <= best + tol and np.max(np.abs(z - step)) <= scale for h, z in minimizers)


def solve(model, s, config, x0=None):
    """Dispatch on ``config.algorithm``; ``x0`` defaults to the zero vector."""
    if x0 is None:
        x0 = np.zeros(model.n)
    algo = config.algorithm
    if algo == "iht":
        return iht(model, x0, s, config)
    if algo == "gss":
        return greedy_sparse_simplex(model, x0, s, config)
    if algo == "pss":
        return partial_sparse_simplex(model, x0, s, config)
    if algo == "mp":
        return matching_pursuit(model, s, config)
    return orthogonal_matching_pursuit(model, s, config)
