"""Small dense linear algebra and polynomial root finding.

Everything here is a pure function of its arguments. Matrices are at most
a few hundred rows, so plain power iteration and closed-form cubic formulas
are adequate and keep results bit-reproducible.
"""
import math

import numpy as np

__all__ = [
    "ConvergenceError",
    "as_matrix",
    "as_vector",
    "mat_vec",
    "lambda_max_sym",
    "sym2x2_lambda_max",
    "real_cubic_roots",
    "cubic_roots_batch",
]

_DEGENERATE_RTOL = 1e-14


class ConvergenceError(RuntimeError):
    """An iterative scheme hit its iteration cap without converging."""


def as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def as_vector(x, name="vector"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


def mat_vec(A, x):
    """Return ``A @ x`` after checking shapes and finiteness."""
    A = as_matrix(A, "A")
    x = as_vector(x, "x")
    if A.shape[1] != x.shape[0]:
        raise ValueError(
            f"dimension mismatch: A has {A.shape[1]} columns, x has {x.shape[0]} entries"
        )
    return A @ x


def _check_symmetric(M, tol=1e-12):
    M = as_matrix(M, "M")
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if M.size and np.max(np.abs(M - M.T)) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return M


def _power(S, v, max_iter, rtol):
    """Power iteration on a PSD matrix ``S``; returns (rayleigh, converged)."""
    scale = float(np.max(np.abs(S)))
    v = v / np.linalg.norm(v)
    lam = float(v @ (S @ v))
    settled = 0
    for _ in range(max_iter):
        w = S @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector in the null space; caller restarts elsewhere
            return 0.0, False
        lam_new = float(v @ w)
        if np.linalg.norm(w - lam_new * v) <= rtol * scale:
            return lam_new, True
        settled = settled + 1 if abs(lam_new - lam) <= 1e-15 * scale else 0
        lam = lam_new
        if settled >= 50:
            return lam, True
        v = w / nw
    return lam, False


def lambda_max_sym(M, max_iter=200_000, rtol=1e-11):
    """Largest eigenvalue of a symmetric matrix by shifted power iteration.

    The iteration starts from the all-ones vector. A second, fixed
    non-symmetric start vector is always run as well, so a start that is
    orthogonal to the dominant eigenvector (or that stalls) cannot yield a
    smaller eigenvalue. The larger Rayleigh quotient wins; both are lower
    bounds on the true value.

    Raises
    ------
    ValueError
        If ``M`` is not square and symmetric to 1e-12.
    ConvergenceError
        If neither start converges within ``max_iter`` iterations.
    """
    M = _check_symmetric(M)
    n = M.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    if n == 1:
        return float(M[0, 0])
    off = np.sum(np.abs(M), axis=1) - np.abs(np.diag(M))
    shift = max(0.0, -float(np.min(np.diag(M) - off)))
    S = M + shift * np.eye(n)
    if not np.any(S):
        return -shift
    starts = (np.ones(n), np.cos(1.7 * np.arange(n) + 0.3) + 0.5)
    best, any_ok = -math.inf, False
    for v0 in starts:
        lam, ok = _power(S, v0, max_iter, rtol)
        if ok:
            any_ok = True
            best = max(best, lam)
    if not any_ok:
        raise ConvergenceError(
            f"power iteration did not converge in {max_iter} iterations"
        )
    return best - shift


def sym2x2_lambda_max(a, b, d):
    """Largest eigenvalue of [[a, b], [b, d]] (elementwise over arrays)."""
    a, b, d = np.asarray(a), np.asarray(b), np.asarray(d)
    return 0.5 * (a + d) + np.hypot(0.5 * (a - d), b)


def _horner(coeffs, t):
    out = np.zeros_like(t)
    for c in coeffs:
        out = out * t + c
    return out


def _polish(coeffs, t):
    """One guarded Newton step on each root estimate."""
    n = len(coeffs) - 1
    dcoeffs = [c * (n - k) for k, c in enumerate(coeffs[:-1])]
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        p = _horner(coeffs, t)
        dp = _horner(dcoeffs, t)
        t_new = np.where(dp != 0.0, t - p / dp, t)
        better = np.abs(_horner(coeffs, t_new)) < np.abs(p)
    # near a multiple root the step can leap to a different root; a polish
    # step is only a small correction
    local = np.abs(t_new - t) <= 1e-6 * (1.0 + np.abs(t))
    return np.where(better & local & np.isfinite(t_new), t_new, t)


def _quadratic_roots(c2, c1, c0):
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        if disc < -_DEGENERATE_RTOL * (c1 * c1 + abs(4.0 * c2 * c0)):
            return []
        disc = 0.0
    if disc == 0.0:
        return [-c1 / (2.0 * c2)]
    q = -0.5 * (c1 + math.copysign(math.sqrt(disc), c1))
    r1 = q / c2
    r2 = c0 / q if q != 0.0 else r1
    return [r1, r2]


def cubic_roots_batch(c3, c2, c1, c0):
    """Real roots of many genuine cubics at once.

    Coefficient arrays must have ``c3 != 0``. Returns an ``(k, 3)`` array
    sorted along the last axis, with NaN where a cubic has fewer than three
    distinct real roots.
    """
    c3, c2, c1, c0 = (np.asarray(c, dtype=np.float64) for c in (c3, c2, c1, c0))
    a, b, c = c2 / c3, c1 / c3, c0 / c3
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    disc = (0.5 * q) ** 2 + (p / 3.0) ** 3
    ref = np.maximum((0.5 * q) ** 2, np.abs(p / 3.0) ** 3)
    one = disc > 1e-12 * ref

    out = np.full(c3.shape + (3,), np.nan)
    # single real root, cancellation-free Cardano
    sq = np.sqrt(np.where(one, disc, 0.0))
    big = -np.copysign(np.cbrt(0.5 * np.abs(q) + sq), q)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        small = np.where(big != 0.0, -p / (3.0 * big), 0.0)
    out[..., 0] = big + small
    # A (near) double root can round onto this branch. Deflate by the real
    # root; a residual quadratic whose discriminant is not clearly negative
    # carries the remaining roots.
    r0 = out[..., 0] - a / 3.0
    B = a + r0
    C = b + B * r0
    D = B * B - 4.0 * C
    near = one & (D >= -1e-7 * (B * B + 4.0 * np.abs(C)))
    half = 0.5 * np.sqrt(np.maximum(D, 0.0))
    out[..., 1] = np.where(near, -0.5 * B - half + a / 3.0, np.nan)
    out[..., 2] = np.where(near, -0.5 * B + half + a / 3.0, np.nan)
    # three real roots (possibly repeated), trigonometric form
    three = ~one
    r = np.sqrt(np.maximum(-p / 3.0, 0.0))
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        r3 = r ** 3
        cos_arg = np.where(r3 > 0.0, -0.5 * q / r3, 0.0)
    theta = np.arccos(np.clip(cos_arg, -1.0, 1.0)) / 3.0
    for k in range(3):
        yk = 2.0 * r * np.cos(theta - 2.0 * math.pi * k / 3.0)
        out[..., k] = np.where(three, yk, out[..., k])
    out = out - (a / 3.0)[..., None]

    coeffs = [c3[..., None], c2[..., None], c1[..., None], c0[..., None]]
    out = _polish(coeffs, out)
    out = np.sort(out, axis=-1)
    # collapse repeated roots
    tol = 1e-10 * (1.0 + np.abs(out))
    dup = np.zeros_like(out, dtype=bool)
    dup[..., 1:] = np.abs(np.diff(out, axis=-1)) <= tol[..., 1:]
    out[dup] = np.nan
    return np.sort(out, axis=-1)


def real_cubic_roots(c3, c2, c1, c0):
    """All distinct real roots of ``c3 t^3 + c2 t^2 + c1 t + c0``, ascending.

    Leading coefficients below 1e-14 of the largest coefficient magnitude
    are treated as zero, so the routine falls back to the quadratic, linear
    or constant case. A nonzero constant has no roots.

    Raises
    ------
    ValueError
        If all coefficients are zero (every real number is a root).
    """
    coeffs = [float(c) for c in (c3, c2, c1, c0)]
    if not all(math.isfinite(c) for c in coeffs):
        raise ValueError("coefficients must be finite")
    scale = max(abs(c) for c in coeffs)
    if scale == 0.0:
        raise ValueError("identically zero polynomial has undetermined roots")
    thr = _DEGENERATE_RTOL * scale
    c3, c2, c1, c0 = coeffs
    if abs(c3) > thr:
        roots = cubic_roots_batch(np.array([c3]), np.array([c2]),
                                  np.array([c1]), np.array([c0]))[0]
        return [float(t) for t in roots if not math.isnan(t)]
    if abs(c2) > thr:
        roots = np.array(_quadratic_roots(c2, c1, c0))
        if roots.size:
            roots = np.unique(_polish([c2, c1, c0], roots))
        return [float(t) for t in roots]
    if abs(c1) > thr:
        return [-c0 / c1]
    return []
