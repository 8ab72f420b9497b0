"""Serializable problem instances and seeded generators.

A problem file is JSON::

    {"format_version": 1, "kind": "least_squares" | "quadratic" | "quartic",
     "m": ..., "n": ..., "s": ...,
     "A" | "Q" | "factors": [row-major flat list],
     "b" | "c": [...], "x_true": [...] or null,
     "provenance": {"generator": ..., "seed": ..., "params": {...}}}

``A`` is ``m x n``, ``Q`` is ``n x n`` (with ``m = n``) and ``factors`` holds
the ``m`` rows ``a_i`` of a rank-one quartic, ``A_i = a_i a_i^T``. A general
quartic stores ``"mats"`` instead: the ``m`` symmetric ``n x n`` matrices
``A_i``, flattened row-major one after another.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .models import LeastSquaresModel, QuadraticModel, QuarticModel
from .rng import CounterRNG

__all__ = [
    "FORMAT_VERSION",
    "KINDS",
    "ProblemInstance",
    "generate_gaussian_ls",
    "generate_quartic",
    "generate_quadratic",
    "basin_demo_instance",
]

FORMAT_VERSION = 1
KINDS = {
    "least_squares": ("A", "b"),
    "quadratic": ("Q", "b"),
    "quartic": ("factors", "c"),
}


@dataclass
class ProblemInstance:
    kind: str
    matrix: np.ndarray
    vector: np.ndarray
    s: int
    x_true: object = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; choose from {sorted(KINDS)}")
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        self.vector = np.asarray(self.vector, dtype=np.float64)
        general_quartic = self.kind == "quartic" and self.matrix.ndim == 3
        if self.matrix.ndim != 2 and not general_quartic:
            raise ValueError("matrix payload must be 2-dimensional")
        m, n = self.matrix.shape[:2] if not general_quartic else (self.matrix.shape[0], self.matrix.shape[2])
        if self.kind == "quadratic" and m != n:
            raise ValueError(f"Q must be square, got {self.matrix.shape}")
        expected = n if self.kind == "quadratic" else m
        if self.vector.shape != (expected,):
            raise ValueError(f"vector payload must have length {expected}, got {self.vector.shape}")
        self.s = int(self.s)
        if not 0 < self.s < n:
            raise ValueError(f"need 0 < s < n, got s={self.s}, n={n}")
        if self.x_true is not None:
            self.x_true = np.asarray(self.x_true, dtype=np.float64)
            if self.x_true.shape != (n,):
                raise ValueError(f"x_true must have length {n}")

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def n(self):
        return self.matrix.shape[-1]

    def model(self):
        if self.kind == "least_squares":
            return LeastSquaresModel(self.matrix, self.vector)
        if self.kind == "quadratic":
            return QuadraticModel(self.matrix, self.vector)
        if self.matrix.ndim == 3:
            return QuarticModel(mats=self.matrix, c=self.vector)
        return QuarticModel(factors=self.matrix, c=self.vector)

    def to_dict(self):
        mkey, vkey = KINDS[self.kind]
        if self.matrix.ndim == 3:
            mkey = "mats"
        return {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "m": self.m,
            "n": self.n,
            "s": self.s,
            mkey: self.matrix.ravel().tolist(),
            vkey: self.vector.tolist(),
            "x_true": None if self.x_true is None else self.x_true.tolist(),
            "provenance": self.provenance,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        version = d.get("format_version")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported format_version {version!r}")
        kind = d.get("kind")
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        mkey, vkey = KINDS[kind]
        if kind == "quartic" and "mats" in d and mkey not in d:
            mkey = "mats"
        try:
            m, n = int(d["m"]), int(d["n"])
            flat = np.asarray(d[mkey], dtype=np.float64)
            vector = d[vkey]
            s = d["s"]
        except KeyError as exc:
            raise ValueError(f"problem file is missing field {exc.args[0]!r}") from None
        shape = (m, n, n) if mkey == "mats" else (m, n)
        if flat.size != int(np.prod(shape)):
            raise ValueError(f"{mkey} has {flat.size} entries, expected {int(np.prod(shape))}")
        return cls(kind, flat.reshape(shape), vector, s,
                   x_true=d.get("x_true"), provenance=d.get("provenance", {}))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())


def _provenance(name, seed, **params):
    return {"generator": name, "seed": int(seed), "params": params}


def _planted(rng, n, s):
    return rng.sparse_normal(n, s)


def generate_gaussian_ls(seed, m, n, s, normalize_columns=True, planted=True):
    """Gaussian least-squares instance.

    ``A`` is filled row-major with standard normals, then optionally every
    column is scaled to unit norm. With ``planted`` a random ``s``-sparse
    ``x_true`` is drawn and ``b = A x_true``; otherwise ``b`` is Gaussian.
    """
    if not 0 < s < n:
        raise ValueError(f"need 0 < s < n, got s={s}, n={n}")
    rng = CounterRNG(seed)
    A = rng.normal(m * n).reshape(m, n)
    if normalize_columns:
        A = A / np.linalg.norm(A, axis=0)
    if planted:
        x_true = _planted(rng, n, s)
        b = A @ x_true
    else:
        x_true = None
        b = rng.normal(m)
    prov = _provenance("gaussian_ls", seed, m=m, n=n, s=s,
                       normalize_columns=bool(normalize_columns), planted=bool(planted))
    return ProblemInstance("least_squares", A, b, s, x_true=x_true, provenance=prov)


def generate_quartic(seed, m, n, s):
    """Rank-one quartic ``sum_i ((a_i^T x)^2 - c_i)^2`` with ``c_i = (a_i^T x_true)^2``.

    Both ``x_true`` and ``-x_true`` are global minimizers with value zero.
    """
    if not 0 < s < n:
        raise ValueError(f"need 0 < s < n, got s={s}, n={n}")
    rng = CounterRNG(seed)
    F = rng.normal(m * n).reshape(m, n)
    x_true = _planted(rng, n, s)
    c = (F @ x_true) ** 2
    return ProblemInstance("quartic", F, c, s, x_true=x_true,
                           provenance=_provenance("quartic", seed, m=m, n=n, s=s))


def generate_quadratic(seed, n, s, ridge=0.1):
    """Convex quadratic ``x^T Q x + 2 b^T x`` with ``Q = B^T B / n + ridge * I``."""
    if not 0 < s < n:
        raise ValueError(f"need 0 < s < n, got s={s}, n={n}")
    rng = CounterRNG(seed)
    B = rng.normal(n * n).reshape(n, n)
    Q = B.T @ B / n + ridge * np.eye(n)
    Q = 0.5 * (Q + Q.T)
    b = rng.normal(n)
    return ProblemInstance("quadratic", Q, b, s,
                           provenance=_provenance("quadratic", seed, n=n, s=s, ridge=ridge))


def basin_demo_instance(a=1.0, b=4.0):
    """``a (x1 - 1)^2 + b (x2 - 1)^2`` up to a constant, with ``s = 1``.

    The basic-feasible points are ``(1, 0)`` and ``(0, 1)``; for ``b > a``
    the second is optimal.
    """
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    return ProblemInstance("quadratic", np.diag([a, b]), [-a, -b], 1,
                           provenance={"generator": "basin_demo", "params": {"a": a, "b": b}})
