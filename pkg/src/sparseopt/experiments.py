"""Multi-start experiments and basin-of-attraction grids."""
import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial

import numpy as np

from .instances import ProblemInstance
from .models import LeastSquaresModel, QuadraticModel
from .optimality import enumerate_bf
from .rng import CounterRNG
from .solvers import iht, solve
from .sparsity import project_cs

__all__ = [
    "RunRecord",
    "ExperimentReport",
    "recovered",
    "run_multistart",
    "basin_grid",
    "basin_csv",
]

UNMATCHED = "unmatched"
ERROR = "error"


def _version():
    from . import __version__
    return __version__


@dataclass
class RunRecord:
    run: int
    start: list
    limit: object = None
    match: object = None
    n_iter: int = 0
    value: object = None
    termination: object = None
    certified: object = None
    success: object = None
    certificate: object = None
    error: object = None


@dataclass
class ExperimentReport:
    records: list
    histogram: dict
    config: dict
    instance: dict = field(default_factory=dict)
    tool_version: str = ""

    @property
    def n_runs(self):
        return len(self.records)

    @property
    def n_success(self):
        return sum(1 for r in self.records if r.success)

    def to_dict(self):
        return {
            "tool_version": self.tool_version,
            "config": self.config,
            "instance": self.instance,
            "n_runs": self.n_runs,
            "n_success": self.n_success,
            "histogram": {str(k): v for k, v in self.histogram.items()},
            "records": [asdict(r) for r in self.records],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["run", "match", "n_iter", "value", "termination", "certified", "success", "error"])
        for r in self.records:
            w.writerow([r.run, r.match, r.n_iter, repr(r.value), r.termination,
                        r.certified, r.success, r.error or ""])
        return buf.getvalue()


def recovered(instance, x, rtol=1e-3):
    """Whether ``x`` recovers the planted solution of ``instance``.

    Least squares and quadratics need the planted support. Quartics are
    sign-ambiguous, so ``x`` must be within ``rtol * (1 + |x_true|)`` of
    ``x_true`` or of ``-x_true``.
    """
    if instance.x_true is None:
        return None
    x = np.asarray(x, dtype=float)
    xt = instance.x_true
    if instance.kind == "quartic":
        err = min(np.linalg.norm(x - xt), np.linalg.norm(x + xt))
        return bool(err <= rtol * (1.0 + np.linalg.norm(xt)))
    return bool(np.array_equal(np.flatnonzero(x), np.flatnonzero(xt)))


def _claimed_tier(algorithm, cert, L, Lf):
    if algorithm == "gss":
        return bool(cert.is_cw_minimum)
    if algorithm == "pss":
        return None if cert.l_queried is None else bool(cert.is_l_stationary)
    if algorithm == "iht":
        return bool(cert.is_l_stationary) if Lf is not None and L > Lf else None
    return None


def _one_run(run, instance, model, config, seed, catalog):
    rng = CounterRNG(seed, run)
    x0 = rng.sparse_normal(model.n, instance.s)
    rec = RunRecord(run=run, start=x0.tolist())
    try:
        trace = solve(model, instance.s, config, x0)
    except (ValueError, ArithmeticError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
        return rec
    x = trace.x.entries
    rec.limit = x.tolist()
    rec.n_iter = trace.n_iter
    rec.value = trace.value
    rec.termination = trace.termination.value
    cert = trace.certificate
    rec.certificate = cert.to_dict() if cert is not None else None
    if cert is not None:
        rec.certified = _claimed_tier(config.algorithm, cert, config.L,
                                      model.lipschitz_constants()[0])
    if catalog is not None:
        k = catalog.match(x)
        rec.match = UNMATCHED if k is None else k
    rec.success = recovered(instance, x)
    return rec


def _config_echo(config, n_starts, seed):
    return {"algorithm": config.algorithm, "L": config.L, "max_iter": config.max_iter,
            "step_tol": config.step_tol, "decrease_tol": config.decrease_tol,
            "n_starts": n_starts, "seed": seed}


def run_multistart(instance, config, n_starts, seed, classify=True, workers=1):
    """Run ``config.algorithm`` from ``n_starts`` random ``s``-sparse starts.

    Run ``r`` draws its start from stream ``(seed, r)``: a random support of
    size ``s`` with standard normal values. Limits are matched against the
    basic-feasible catalog when the model admits one (least squares and
    quadratics) and ``classify`` is set. Solver errors are stored on the run
    record and counted under ``"error"``. With ``workers > 1`` runs are
    spread over processes; records stay ordered by run index.
    """
    if not isinstance(instance, ProblemInstance):
        raise TypeError("run_multistart needs a ProblemInstance")
    if n_starts < 0:
        raise ValueError("n_starts must be nonnegative")
    model = instance.model()
    run_config = replace(config, record_trace=False)      # only limits are reported
    catalog = None
    if classify and isinstance(model, (LeastSquaresModel, QuadraticModel)):
        catalog = enumerate_bf(model, instance.s)
    job = partial(_one_run, instance=instance, model=model, config=run_config,
                  seed=seed, catalog=catalog)
    runs = range(int(n_starts))
    if workers > 1 and n_starts > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(job, runs, chunksize=max(1, n_starts // (4 * workers))))
    else:
        records = [job(r) for r in runs]

    histogram = {}
    if catalog is not None:
        histogram = {e.index: 0 for e in catalog}
        histogram[UNMATCHED] = 0
    histogram[ERROR] = 0
    for r in records:
        if r.error is not None:
            histogram[ERROR] += 1
        elif catalog is not None:
            histogram[r.match] += 1
    return ExperimentReport(
        records=records,
        histogram=histogram,
        config=_config_echo(config, n_starts, seed),
        instance=instance.provenance,
        tool_version=_version(),
    )


def _axis(lo_hi, count):
    lo, hi = lo_hi
    return np.linspace(lo, hi, int(count))


def basin_grid(model, config, x_range, y_range, resolution, s=1, catalog=None):
    """Classify the limit reached from each point of a 2-D grid.

    Returns rows ``(x, y, class)`` in row-major order (``y`` outer), where
    ``class`` is a catalog number or ``"unmatched"``. IHT starts from the
    grid point itself, its first step projecting it onto the sparse set;
    the other algorithms start from the projected grid point.
    """
    if model.n != 2:
        raise ValueError(f"basin grids need a 2-dimensional model, got n={model.n}")
    if catalog is None:
        catalog = enumerate_bf(model, s)
    nx, ny = (resolution, resolution) if np.isscalar(resolution) else resolution
    rows = []
    for y in _axis(y_range, ny):
        for x in _axis(x_range, nx):
            p = np.array([x, y])
            if config.algorithm == "iht":
                p = project_cs(p - model.grad(p) / config.L, s).entries
                trace = iht(model, p, s, config)
            else:
                trace = solve(model, s, config, project_cs(p, s).entries)
            k = catalog.match(trace.x.entries)
            rows.append((float(x), float(y), UNMATCHED if k is None else k))
    return rows


def basin_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "class"])
    for x, y, c in rows:
        w.writerow([repr(x), repr(y), c])
    return buf.getvalue()
