"""Reference problems with known answers, and a self-checking fixture run.

Two small problems are embedded:

* ``q5``: ``x^T (I + J) x + 2 b^T x`` on five variables with
  ``b = -(3, 2, 3, 12, 5)`` and ``s = 2`` (``J`` is the all-ones matrix).
* ``ls5``: a 4x5 least-squares problem with ``b = A (1, -1, 0, 0, 0)`` and
  ``s = 2``. ``A`` and ``b`` are given to four decimals, so expected values
  derived from them carry a wider tolerance.

Values for ``ls5`` are quoted as ``|Ax - b|^2 - |b|^2``.
"""
import copy
import json
from dataclasses import asdict, dataclass

import numpy as np

from .instances import ProblemInstance
from .models import LeastSquaresModel, QuadraticModel
from .optimality import enumerate_bf, is_cw_minimum, is_l_stationary
from .solvers import SolverConfig, greedy_sparse_simplex

__all__ = [
    "Q5_B",
    "LS5_A",
    "LS5_B",
    "LS5_X_TRUE",
    "EXPECTED",
    "FixtureResult",
    "FixtureReport",
    "q5_model",
    "ls5_model",
    "ls5_instance",
    "q5_instance",
    "reproduce_fixtures",
]

Q5_B = np.array([-3.0, -2.0, -3.0, -12.0, -5.0])

LS5_A = np.array([
    [0.8899, -0.4355, 0.5304, -0.2324, 0.3745],
    [0.0797, -0.3475, 0.0942, 0.9681, -0.4919],
    [0.4425, 0.3248, 0.6921, 0.0921, 0.7575],
    [0.0773, 0.7643, -0.4804, 0.0142, 0.2099],
])
LS5_B = np.array([1.3254, 0.4272, 0.1177, -0.6870])
LS5_X_TRUE = np.array([1.0, -1.0, 0.0, 0.0, 0.0])

EXPECTED = {
    "q5_catalog": {
        "tol_point": 1e-3,
        "tol_value": 1e-2,
        "tol_level": 1e-2,
        "points": [
            [1.3333, 0.3333, 0, 0, 0],
            [1.0000, 0, 1.0000, 0, 0],
            [-2.0000, 0, 0, 7.0000, 0],
            [0.3333, 0, 0, 0, 2.3333],
            [0, 0.3333, 1.3333, 0, 0],
            [0, -2.6667, 0, 7.3333, 0],
            [0, -0.3333, 0, 0, 2.6667],
            [0, 0, -2.0000, 7.0000, 0],
            [0, 0, 0.3333, 0, 2.3333],
            [0, 0, 0, 6.3333, -0.6667],
        ],
        "values": [-4.66, -6.00, -78, -12.66, -4.66, -82.66, -12.66, -78, -12.66, -72.66],
        "levels": [62, 20, 3, 56, 62, 1.25, 58, 3, 56, 11],
    },
    "q5_lipschitz": {"tol": 1e-9, "L": 12.0, "L2": 6.0},
    "q5_hierarchy": {"L": 6.0, "l_stationary": [3, 6, 8], "cw_minima": [6], "best": 6},
    "ls5_lipschitz": {"tol_L": 1e-2, "tol_L2": 1e-3, "L": 4.78, "L2": 3.4972},
    "ls5_catalog": {
        "tol": 5e-2,
        "values": [-2.42, -1.60, -1.51, -1.99, -1.99, -1.48, -2.11, -1.33, -1.61, -0.11],
        "levels": [0.00, 2.90, 8.46, 0.91, 1.08, 13.97, 0.69, 18.70, 1.50, 9.05],
    },
    "ls5_greedy_trace": {
        "tol_point": 1e-3,
        "tol_limit": 1e-4,
        "start": [0, 1, 5, 0, 0],
        "iterates": [
            [0, 1.0000, 1.5608, 0, 0],
            [0, 0, 1.5608, 0, -0.6674],
            [1.6431, 0, 0, 0, -0.6674],
            [1.6431, -0.8634, 0, 0, 0],
            [1.0290, -0.8634, 0, 0, 0],
            [1.0290, -0.9938, 0, 0, 0],
            [1.0013, -0.9938, 0, 0, 0],
            [1.0013, -0.9997, 0, 0, 0],
            [1.0001, -0.9997, 0, 0, 0],
            [1.0001, -1.0000, 0, 0, 0],
            [1.0000, -1.0000, 0, 0, 0],
        ],
        "limit": [1, -1, 0, 0, 0],
    },
}


def q5_model():
    return QuadraticModel(np.eye(5) + np.ones((5, 5)), Q5_B)


def q5_instance():
    return ProblemInstance("quadratic", np.eye(5) + np.ones((5, 5)), Q5_B, 2,
                           provenance={"generator": "embedded", "name": "q5"})


def ls5_model():
    return LeastSquaresModel(LS5_A, LS5_B)


def ls5_instance():
    return ProblemInstance("least_squares", LS5_A, LS5_B, 2, x_true=LS5_X_TRUE,
                           provenance={"generator": "embedded", "name": "ls5"})


@dataclass
class FixtureResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    detail: str = ""


@dataclass
class FixtureReport:
    results: list

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def __getitem__(self, name):
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self):
        return {"passed": self.passed, "results": [asdict(r) for r in self.results]}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self):
        lines = ["name,passed,max_error,tolerance,detail"]
        for r in self.results:
            lines.append(f'{r.name},{r.passed},{r.max_error!r},{r.tolerance!r},"{r.detail}"')
        return "\n".join(lines) + "\n"


def _err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return float("inf")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def _check(name, errors_and_tols, detail=""):
    """Pass when every ``error <= tol``; report the worst error-to-tolerance pair."""
    worst = max(errors_and_tols, key=lambda et: et[0] / et[1])
    passed = all(e <= t for e, t in errors_and_tols)
    return FixtureResult(name, bool(passed), worst[0], worst[1], detail)


def _set_check(name, got, want):
    ok = sorted(got) == sorted(want)
    return FixtureResult(name, ok, 0.0 if ok else 1.0, 0.0, f"got {sorted(got)}, expected {sorted(want)}")


def _q5_catalog(exp):
    cat = enumerate_bf(q5_model(), 2)
    return _check("q5_catalog", [
        (0.0 if len(cat) == len(exp["points"]) else float("inf"), 1.0),
        (_err(cat.points, exp["points"]), exp["tol_point"]),
        (_err(cat.values, exp["values"]), exp["tol_value"]),
        (_err(cat.levels, exp["levels"]), exp["tol_level"]),
    ], f"{len(cat)} entries")


def _q5_lipschitz(exp):
    L, L2 = q5_model().lipschitz_constants()
    return _check("q5_lipschitz", [(abs(L - exp["L"]), exp["tol"]), (abs(L2 - exp["L2"]), exp["tol"])],
                  f"L={L!r} L2={L2!r}")


def _q5_hierarchy(exp):
    model = q5_model()
    cat = enumerate_bf(model, 2)
    stat = [e.index for e in cat if is_l_stationary(model, e.point, 2, exp["L"])]
    cw = [e.index for e in cat if is_cw_minimum(model, e.point, 2)[0]]
    results = [
        _set_check("q5_l_stationary", stat, exp["l_stationary"]),
        _set_check("q5_cw_minima", cw, exp["cw_minima"]),
        _set_check("q5_best", [cat.best().index], [exp["best"]]),
    ]
    return results


def _ls5_lipschitz(exp):
    L, L2 = ls5_model().lipschitz_constants()
    return _check("ls5_lipschitz", [(abs(L - exp["L"]), exp["tol_L"]), (abs(L2 - exp["L2"]), exp["tol_L2"])],
                  f"L={L!r} L2={L2!r}")


def _ls5_catalog(exp):
    cat = enumerate_bf(ls5_model(), 2)
    shifted = cat.values - float(LS5_B @ LS5_B)
    return _check("ls5_catalog", [
        (0.0 if len(cat) == len(exp["values"]) else float("inf"), 1.0),
        (_err(shifted, exp["values"]), exp["tol"]),
        (_err(cat.levels, exp["levels"]), exp["tol"]),
    ], f"{len(cat)} entries")


def _ls5_trace(exp):
    trace = greedy_sparse_simplex(ls5_model(), exp["start"], 2, SolverConfig())
    want = np.asarray(exp["iterates"], dtype=float)
    got = np.array([v.entries for v in trace.iterates[1:len(want) + 1]])
    supports_ok = got.shape == want.shape and all(
        np.array_equal(np.flatnonzero(g), np.flatnonzero(w)) for g, w in zip(got, want))
    return _check("ls5_greedy_trace", [
        (0.0 if supports_ok else float("inf"), 1.0),
        (_err(got, want), exp["tol_point"]),
        (_err(trace.x.entries, exp["limit"]), exp["tol_limit"]),
    ], f"{trace.n_iter} moves, {trace.termination.value}")


def reproduce_fixtures(expected=None):
    """Recompute every reference result and compare it with its expected value.

    ``expected`` may override parts of :data:`EXPECTED`, keyed by fixture
    name; overrides are merged one level deep. The report depends only on
    the inputs, so repeated runs serialize identically.
    """
    exp = copy.deepcopy(EXPECTED)
    for name, patch in (expected or {}).items():
        if name not in exp:
            raise KeyError(f"unknown fixture {name!r}")
        exp[name].update(patch)
    results = [
        _q5_catalog(exp["q5_catalog"]),
        _q5_lipschitz(exp["q5_lipschitz"]),
        *_q5_hierarchy(exp["q5_hierarchy"]),
        _ls5_lipschitz(exp["ls5_lipschitz"]),
        _ls5_catalog(exp["ls5_catalog"]),
        _ls5_trace(exp["ls5_greedy_trace"]),
    ]
    return FixtureReport(results)
