"""Support bookkeeping, order statistics and hard thresholding."""
from dataclasses import dataclass

import numpy as np

from .numerics import as_vector

__all__ = [
    "SparseVector",
    "SparsityBudget",
    "snap",
    "support_sets",
    "m_stat",
    "project_cs",
    "project_dense",
    "projection_set_contains",
]

SNAP_RTOL = 1e-14


def snap(x, rtol=SNAP_RTOL):
    """Zero out entries below ``rtol * (1 + max|x|)``."""
    x = np.array(x, dtype=np.float64)
    if x.size:
        x[np.abs(x) <= rtol * (1.0 + np.max(np.abs(x)))] = 0.0
    return x


class SparseVector:
    """Dense coefficients with an exact-zero support cache.

    The entries are copied and made read-only; ``support`` holds the
    strictly increasing indices of the nonzero entries.
    """

    __slots__ = ("entries", "support")

    def __init__(self, entries):
        x = as_vector(entries, "entries").copy()
        x.setflags(write=False)
        self.entries = x
        self.support = np.flatnonzero(x)
        self.support.setflags(write=False)

    @classmethod
    def from_dense(cls, x, rtol=SNAP_RTOL):
        return cls(snap(x, rtol))

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def nnz(self):
        return int(self.support.shape[0])

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries.copy()
        return self.entries.astype(dtype)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if isinstance(other, SparseVector):
            return np.array_equal(self.entries, other.entries)
        return NotImplemented

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"SparseVector({self.entries.tolist()!r})"


@dataclass(frozen=True)
class SparsityBudget:
    s: int
    n: int

    def __post_init__(self):
        if not (0 < self.s < self.n):
            raise ValueError(f"need 0 < s < n, got s={self.s}, n={self.n}")


def _entries(x):
    if isinstance(x, SparseVector):
        return x.entries
    return as_vector(x, "x")


def support_sets(x):
    """Return ``(I1, I0)``: indices of nonzero and zero entries (0-based)."""
    x = _entries(x)
    nz = x != 0.0
    return np.flatnonzero(nz), np.flatnonzero(~nz)


def m_stat(x, k):
    """The ``k``-th largest absolute entry of ``x`` (``k`` counts from 1)."""
    x = _entries(x)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    return float(np.sort(np.abs(x))[::-1][k - 1])


def _keep_order(x):
    # stable descending sort on |x|: lower index wins ties
    return np.argsort(-np.abs(x), kind="stable")


def project_cs(x, s):
    """Keep the ``s`` largest-magnitude entries of ``x``, zero the rest.

    ``s`` may be an int or a :class:`SparsityBudget`. Ties at the cut are
    resolved in favour of the lower index, which makes this one fixed
    selection from the (generally set-valued) projection.
    """
    x = _entries(x)
    if isinstance(s, SparsityBudget):
        if s.n != x.shape[0]:
            raise ValueError(f"budget is for n={s.n}, x has {x.shape[0]} entries")
        s = s.s
    return SparseVector(project_dense(x, s))


def project_dense(x, s):
    """:func:`project_cs` on a plain array, returning a plain array."""
    out = np.zeros_like(x)
    keep = _keep_order(x)[:s]
    out[keep] = x[keep]
    return out


def projection_set_contains(y, x, s, atol=0.0):
    """True if ``x`` is one of the vectors in the full projection set of ``y``.

    Membership means: ``x`` agrees with ``y`` on its own support, ``x`` is
    zero elsewhere, and every entry ``y`` loses is no larger in magnitude than
    every entry it keeps (within ``atol``).
    """
    y = _entries(y)
    x = _entries(x)
    I1 = np.flatnonzero(x)
    if I1.shape[0] > s:
        return False
    if np.any(np.abs(x[I1] - y[I1]) > atol):
        return False
    dropped = np.setdiff1d(np.arange(y.shape[0]), I1)
    if dropped.size == 0:
        return True
    largest_dropped = float(np.max(np.abs(y[dropped])))
    if I1.shape[0] < s:
        # a short support only projects from vectors that are zero elsewhere
        return largest_dropped <= atol
    return largest_dropped <= float(np.min(np.abs(y[I1]))) + atol
