"""Certification of candidate points and enumeration of basic feasible vectors.

The checks form a hierarchy. A point is basic feasible (BF) when the
gradient vanishes on its support (everywhere, if the support is smaller than
``s``). A BF point is ``L``-stationary when its stationarity level,
``max_{i off support} |grad_i f| / M_s(x)``, is at most ``L``. A
coordinate-wise (CW) minimum cannot be improved by re-optimizing a single
coordinate, or by zeroing one support coordinate and re-optimizing any other.
"""
import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .models import LeastSquaresModel, QuadraticModel, UnboundedDirectionError, _vec
from .numerics import as_matrix
from .sparsity import SparseVector, m_stat, project_cs, projection_set_contains, snap, support_sets

__all__ = [
    "InfeasiblePointError",
    "NotBasicFeasibleError",
    "CWWitness",
    "OptimalityCertificate",
    "BFEntry",
    "BFCatalog",
    "default_grad_tol",
    "is_basic_feasible",
    "stationarity_level",
    "is_l_stationary",
    "l_stationary_by_projection",
    "is_cw_minimum",
    "certify",
    "enumerate_bf",
    "is_s_regular",
]


class InfeasiblePointError(ValueError):
    """The point has more than ``s`` nonzero entries."""


class NotBasicFeasibleError(ValueError):
    """An operation that requires a BF vector received something else."""


def _point(model, x, s):
    x = _vec(x, model.n)
    nnz = int(np.count_nonzero(x))
    if nnz > s:
        raise InfeasiblePointError(f"point has {nnz} nonzeros, budget is s={s}")
    return x, nnz


def default_grad_tol(g, I0):
    """``1e-8 * (1 + max |g_i|)`` over the zero set of the point."""
    off = float(np.max(np.abs(g[I0]))) if len(I0) else 0.0
    return 1e-8 * (1.0 + off)


def _bf(x, nnz, s, g, tol):
    I1, I0 = support_sets(x)
    if tol is None:
        tol = default_grad_tol(g, I0)
    if nnz < s:
        return bool(np.max(np.abs(g)) <= tol), tol
    return bool(np.max(np.abs(g[I1])) <= tol), tol


def is_basic_feasible(model, x, s, tol=None):
    x, nnz = _point(model, x, s)
    return _bf(x, nnz, s, model.grad(x), tol)[0]


def _level(x, nnz, s, g):
    if nnz < s:
        return 0.0
    _, I0 = support_sets(x)
    if len(I0) == 0:
        return 0.0
    ms = m_stat(x, s)
    if ms == 0.0:
        raise AssertionError("M_s(x) = 0 with |supp x| = s")
    return float(np.max(np.abs(g[I0])) / ms)


def stationarity_level(model, x, s, tol=None):
    """Smallest ``L`` for which the BF vector ``x`` is ``L``-stationary."""
    x, nnz = _point(model, x, s)
    g = model.grad(x)
    ok, _ = _bf(x, nnz, s, g, tol)
    if not ok:
        raise NotBasicFeasibleError("stationarity level is only defined for BF vectors")
    return _level(x, nnz, s, g)


def is_l_stationary(model, x, s, L, tol=1e-9, grad_tol=None):
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    x, nnz = _point(model, x, s)
    g = model.grad(x)
    ok, _ = _bf(x, nnz, s, g, grad_tol)
    if not ok:
        return False
    return _level(x, nnz, s, g) <= L + tol * max(1.0, L)


def l_stationary_by_projection(model, x, s, L, atol=1e-9):
    """Test ``x`` against the projection of ``x - grad f(x) / L`` directly.

    Returns ``(matches_tie_broken, in_full_set)``: whether ``x`` equals the
    lowest-index selection of the projection, and whether it belongs to the
    full set of projections.
    """
    x = _vec(x, model.n)
    y = x - model.grad(x) / L
    scale = atol * (1.0 + float(np.max(np.abs(x))))
    sel = project_cs(y, s).entries
    return bool(np.max(np.abs(sel - x)) <= scale), projection_set_contains(y, x, s, scale)


@dataclass(frozen=True)
class CWWitness:
    """An improving move: zero ``i`` (``None`` for a plain coordinate move),
    set coordinate ``j`` to ``t``, reaching value ``value``."""
    i: object
    j: int
    t: float
    value: float


def _cw(model, x, nnz, s, fx, tol):
    if tol is None:
        tol = 1e-9 * (1.0 + abs(fx))
    if nnz < s:
        T, F = model.coordinate_minima(x)
        if np.any(np.isneginf(F)):
            raise UnboundedDirectionError("objective unbounded along a coordinate")
        bad = np.flatnonzero(np.abs(fx - F) > tol)
        if bad.size:
            j = int(bad[0])
            return False, CWWitness(None, j, float(T[j]), float(F[j])), tol
        return True, None, tol
    I1, _ = support_sets(x)
    T, F = model.swap_minima(x, I1)
    if np.any(np.isneginf(F)):
        raise UnboundedDirectionError("objective unbounded along a coordinate")
    bad = np.argwhere(F < fx - tol)
    if bad.size:
        r, j = (int(v) for v in bad[0])
        return False, CWWitness(int(I1[r]), j, float(T[r, j]), float(F[r, j])), tol
    return True, None, tol


def is_cw_minimum(model, x, s, tol=None):
    """Return ``(verdict, witness)``; the witness is the first improving move
    found (support coordinates ascending, then target coordinates)."""
    x, nnz = _point(model, x, s)
    ok, witness, _ = _cw(model, x, nnz, s, model.value(x), tol)
    return ok, witness


@dataclass
class OptimalityCertificate:
    value: float
    nnz: int
    s: int
    is_feasible: bool
    is_bf: bool
    stationarity_level: float
    l_queried: object = None
    is_l_stationary: object = None
    is_cw_minimum: bool = False
    cw_witness: object = None
    tolerances: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        if math.isinf(d["stationarity_level"]):
            d["stationarity_level"] = "inf"
        return d


def certify(model, x, s, L=None, grad_tol=None, value_tol=None, level_rtol=1e-9):
    """Run every check on ``x`` and collect the verdicts.

    ``grad_tol`` is the absolute tolerance for vanishing gradient entries
    (default :func:`default_grad_tol`), ``value_tol`` the slack for the
    coordinate-wise comparison (default ``1e-9 (1 + |f(x)|)``).
    A point that fails the BF test gets ``stationarity_level = inf`` and is
    reported as neither ``L``-stationary nor a CW minimum.
    """
    x = _vec(x, model.n)
    nnz = int(np.count_nonzero(x))
    fx = model.value(x)
    if nnz > s:
        return OptimalityCertificate(fx, nnz, s, False, False, math.inf, L,
                                     False if L is not None else None)
    g = model.grad(x)
    is_bf, grad_tol = _bf(x, nnz, s, g, grad_tol)
    level = _level(x, nnz, s, g) if is_bf else math.inf
    l_ok = None
    if L is not None:
        l_ok = bool(is_bf and level <= L + level_rtol * max(1.0, L))
    cw, witness, value_tol = _cw(model, x, nnz, s, fx, value_tol)
    return OptimalityCertificate(
        value=fx, nnz=nnz, s=s, is_feasible=True, is_bf=is_bf,
        stationarity_level=level, l_queried=L, is_l_stationary=l_ok,
        is_cw_minimum=bool(cw and is_bf), cw_witness=witness,
        tolerances={"grad_tol": grad_tol, "value_tol": value_tol,
                    "level_rtol": level_rtol},
    )


@dataclass(frozen=True)
class BFEntry:
    index: int                 # 1-based position in the catalog
    support: tuple
    point: SparseVector
    value: float
    stationarity_level: float
    under_budget: bool = False


@dataclass
class BFCatalog:
    entries: list
    s: int
    singular_supports: list = field(default_factory=list)
    dropped_supports: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, index):
        """Entry by its 1-based catalog number."""
        return self.entries[index - 1]

    @property
    def points(self):
        return np.array([e.point.entries for e in self.entries])

    @property
    def values(self):
        return np.array([e.value for e in self.entries])

    @property
    def levels(self):
        return np.array([e.stationarity_level for e in self.entries])

    def best(self):
        return min(self.entries, key=lambda e: (e.value, e.index))

    def match(self, x, rtol=1e-4):
        """Catalog number of the entry within ``rtol * (1 + |p|)`` of ``x``."""
        x = np.asarray(x, dtype=float)
        dist = np.linalg.norm(self.points - x, axis=1)
        scale = rtol * (1.0 + np.linalg.norm(self.points, axis=1))
        hits = np.flatnonzero(dist <= scale)
        if hits.size == 0:
            return None
        return int(hits[np.argmin(dist[hits])]) + 1

    def to_records(self):
        return [
            {"index": e.index, "support": list(e.support),
             "coordinates": e.point.entries.tolist(), "value": e.value,
             "stationarity_level": e.stationarity_level,
             "under_budget": e.under_budget}
            for e in self.entries
        ]

    def to_json(self):
        return json.dumps({
            "s": self.s,
            "entries": self.to_records(),
            "singular_supports": [list(S) for S in self.singular_supports],
            "dropped_supports": [list(S) for S in self.dropped_supports],
            "provenance": self.provenance,
        }, indent=2)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "support", "coordinates", "value", "stationarity_level"])
        for e in self.entries:
            w.writerow([e.index, " ".join(map(str, e.support)),
                        " ".join(repr(float(v)) for v in e.point.entries),
                        repr(e.value), repr(e.stationarity_level)])
        return buf.getvalue()


def _normal_equations(model):
    if isinstance(model, LeastSquaresModel):
        return model.gram, model.A.T @ model.b
    if isinstance(model, QuadraticModel):
        return model.Q, -model.b
    raise TypeError("BF enumeration needs a least-squares or quadratic model")


def enumerate_bf(model, s, max_supports=10_000, cond_limit=1e12):
    """All BF vectors supported on size-``s`` index sets.

    For each support ``S`` (lexicographic order) the restricted stationarity
    system ``G_S x_S = h_S`` is solved; singular supports are skipped and
    listed in ``singular_supports``. A solution with incidental zeros is kept
    only if the full gradient vanishes there (flagged ``under_budget``),
    otherwise its support goes to ``dropped_supports``. Points equal to an
    earlier entry within 1e-10 are merged.
    """
    n = model.n
    if not 0 < s < n:
        raise ValueError(f"need 0 < s < n, got s={s}, n={n}")
    count = comb(n, s)
    if count > max_supports:
        raise ValueError(f"{count} supports exceed max_supports={max_supports}")
    G, h = _normal_equations(model)
    entries, singular, dropped = [], [], []
    for S in combinations(range(n), s):
        idx = list(S)
        G_S = G[np.ix_(idx, idx)]
        if np.linalg.cond(G_S) > cond_limit:
            singular.append(S)
            continue
        x = np.zeros(n)
        x[idx] = np.linalg.solve(G_S, h[idx])
        x = snap(x)
        if any(np.max(np.abs(x - e.point.entries)) <= 1e-10 * (1.0 + np.max(np.abs(e.point.entries)))
               for e in entries):
            continue
        g = model.grad(x)
        nnz = int(np.count_nonzero(x))
        ok, _ = _bf(x, nnz, s, g, None)
        if not ok:
            dropped.append(S)
            continue
        entries.append(BFEntry(len(entries) + 1, S, SparseVector(x), model.value(x),
                               _level(x, nnz, s, g), nnz < s))
    if not entries and singular:
        raise ValueError("every support is singular")
    return BFCatalog(entries, s, singular, dropped)


def is_s_regular(A, s, max_supports=100_000, rtol=1e-10):
    """True if every ``s`` columns of ``A`` are linearly independent."""
    A = as_matrix(A, "A")
    m, n = A.shape
    if not 0 < s <= min(m, n):
        if s > m:
            return False
        raise ValueError(f"need 0 < s <= n, got s={s}, n={n}")
    count = comb(n, s)
    if count > max_supports:
        raise ValueError(f"{count} supports exceed max_supports={max_supports}")
    G = A.T @ A
    for S in combinations(range(n), s):
        ev = np.linalg.eigvalsh(G[np.ix_(S, S)])
        if ev[0] <= rtol * max(ev[-1], np.finfo(float).tiny):
            return False
    return True
