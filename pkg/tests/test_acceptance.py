"""End-to-end acceptance checks.

Each test prints one ``criterion k: PASS|FAIL`` line (visible with ``-s``)
and the same lines are repeated in the terminal summary.
"""
from itertools import combinations

import numpy as np

from conftest import ACCEPTANCE_LINES
from sparseopt.cli import main as cli_main
from sparseopt.experiments import run_multistart
from sparseopt.fixtures import EXPECTED, LS5_B, ls5_instance, reproduce_fixtures
from sparseopt.instances import generate_quartic
from sparseopt.models import LeastSquaresModel, QuadraticModel, QuarticModel
from sparseopt.optimality import enumerate_bf, is_cw_minimum, is_l_stationary
from sparseopt.solvers import (
    SolverConfig,
    greedy_sparse_simplex,
    iht,
    matching_pursuit,
    orthogonal_matching_pursuit,
    surrogate_argmin_check,
)
from sparseopt.sparsity import project_cs, projection_set_contains


def verdict(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


def random_ls(rng, m, n):
    return LeastSquaresModel(rng.normal(size=(m, n)), rng.normal(size=m))


def random_quadratic(rng, n):
    B = rng.normal(size=(n, n))
    return QuadraticModel(B.T @ B / n + 0.1 * np.eye(n), rng.normal(size=n))


def random_quartic(rng, m, n):
    F = rng.normal(size=(m, n))
    return QuarticModel(factors=F, c=(F @ rng.normal(size=n)) ** 2 + rng.random(m))


def sparse_start(rng, n, s):
    x = np.zeros(n)
    x[rng.choice(n, s, replace=False)] = rng.normal(size=s)
    return x


def test_criterion_1_reference_catalog(q5_catalog):
    exp = EXPECTED["q5_catalog"]
    errs = (
        np.max(np.abs(q5_catalog.points - np.array(exp["points"]))),
        np.max(np.abs(q5_catalog.values - np.array(exp["values"]))),
        np.max(np.abs(q5_catalog.levels - np.array(exp["levels"]))),
    )
    ok = len(q5_catalog) == 10 and errs[0] <= 1e-3 and errs[1] <= 1e-2 and errs[2] <= 1e-2
    verdict(1, ok, f"{len(q5_catalog)} BF vectors, max errors point/value/level = "
                   f"{errs[0]:.2e}/{errs[1]:.2e}/{errs[2]:.2e}")


def test_criterion_2_lipschitz(q5, ls5):
    L, L2 = q5.lipschitz_constants()
    P, P2 = ls5.lipschitz_constants()
    ok = (abs(L - 12) <= 1e-9 and abs(L2 - 6) <= 1e-9
          and abs(P - 4.78) <= 0.01 and abs(P2 - 3.4972) <= 0.001)
    verdict(2, ok, f"L={L:.12g} L2={L2:.12g}; least squares L={P:.5f} L2={P2:.5f}")


def test_criterion_3_hierarchy(q5, q5_catalog):
    stat = [e.index for e in q5_catalog if is_l_stationary(q5, e.point, 2, 6.0)]
    cw = [e.index for e in q5_catalog if is_cw_minimum(q5, e.point, 2)[0]]
    best = q5_catalog.best().index
    verdict(3, stat == [3, 6, 8] and cw == [6] and best == 6,
            f"L=6 stationary {stat}, CW minima {cw}, best {best}")


def test_criterion_4_least_squares_catalog(ls5_catalog):
    exp = EXPECTED["ls5_catalog"]
    dv = np.max(np.abs(ls5_catalog.values - LS5_B @ LS5_B - np.array(exp["values"])))
    dl = np.max(np.abs(ls5_catalog.levels - np.array(exp["levels"])))
    ok = len(ls5_catalog) == 10 and dv <= 5e-2 and dl <= 5e-2
    verdict(4, ok, f"{len(ls5_catalog)} BF vectors, max errors value/level = {dv:.2e}/{dl:.2e}")


def test_criterion_5_greedy_trace(ls5):
    exp = EXPECTED["ls5_greedy_trace"]
    trace = greedy_sparse_simplex(ls5, exp["start"], 2)
    want = np.array(exp["iterates"])
    got = np.array([v.entries for v in trace.iterates[1:len(want) + 1]])
    supports = got.shape == want.shape and all(
        np.array_equal(np.flatnonzero(g), np.flatnonzero(w)) for g, w in zip(got, want))
    coord = float(np.max(np.abs(got - want))) if supports else np.inf
    limit = float(np.max(np.abs(trace.x.entries - np.array(exp["limit"]))))
    verdict(5, supports and coord <= 1e-3 and limit <= 1e-4,
            f"supports {'match' if supports else 'differ'}, max iterate error {coord:.2e}, "
            f"limit error {limit:.2e} after {trace.n_iter} moves")


def test_criterion_6_structural_zeros():
    inst = ls5_instance()
    seen = {}
    for label, config in [("iht 9.56", SolverConfig(algorithm="iht", L=9.56)),
                          ("iht 5.26", SolverConfig(algorithm="iht", L=5.26)),
                          ("gss", SolverConfig(algorithm="gss")),
                          ("pss", SolverConfig(algorithm="pss"))]:
        report = run_multistart(inst, config, 1000, seed=1)
        assert report.n_runs == 1000
        seen[label] = {k for k, v in report.histogram.items() if v}
    ok = (not seen["iht 9.56"] & {6, 8, "unmatched", "error"}
          and not seen["iht 5.26"] & {3, 6, 8, 10, "unmatched", "error"}
          and seen["gss"] <= {1, 4, 7}
          and seen["pss"] <= {1, 4, 7, 9})
    verdict(6, ok, "limits reached: " + "; ".join(f"{k} {sorted(v, key=str)}" for k, v in seen.items()))


def _descent_margin_holds(rng):
    worst = np.inf
    for k in range(50):
        model = random_ls(rng, 8, 12) if k % 2 == 0 else random_quadratic(rng, 10)
        Lf = model.lipschitz_constants()[0]
        L = 1.5 * Lf
        trace = iht(model, sparse_start(rng, model.n, 3), 3,
                    SolverConfig(algorithm="iht", L=L, max_iter=300))
        X = np.array([v.entries for v in trace.iterates])
        f = np.array(trace.values)
        gap = f[:-1] - f[1:] - 0.5 * (L - Lf) * np.sum(np.diff(X, axis=0) ** 2, axis=1)
        worst = min(worst, float(gap.min()))
    return worst >= -1e-9, worst


def _surrogate_holds(rng):
    hits = 0
    for k in range(20):
        model = random_ls(rng, 5, 6) if k % 2 else random_quadratic(rng, 6)
        x = sparse_start(rng, 6, 2) if k % 3 else rng.normal(size=6)
        L = (1.0 + rng.random()) * model.lipschitz_constants()[0]
        hits += surrogate_argmin_check(model, x, L, 2)
    return hits == 20, hits


def _projection_holds(rng):
    for _ in range(200):
        n = int(rng.integers(2, 9))
        s = int(rng.integers(1, n))
        y = rng.integers(-3, 4, size=n).astype(float)      # small integers force ties
        x = project_cs(y, s).entries
        best = min(np.sum(y ** 2) - np.sum(y[list(S)] ** 2) for S in combinations(range(n), s))
        if not (projection_set_contains(y, x, s) and np.isclose(np.sum((x - y) ** 2), best)):
            return False
    return True


def _quadratic_parts(model):
    if isinstance(model, LeastSquaresModel):
        return model.A.T @ model.A, -model.A.T @ model.b
    return model.Q, model.b


def _brute_cw(model, x, s):
    """CW test from closed-form 1-D minima of ``x^T Q x + 2 q^T x``."""
    Q, q = _quadratic_parts(model)
    fx = model.value(x)
    I1 = np.flatnonzero(x)
    starts = [x] if len(I1) < s else [np.where(np.arange(len(x)) == i, 0.0, x) for i in I1]
    for y in starts:
        t = -(Q @ y + q) / np.diag(Q)
        for j in range(len(x)):
            z = y.copy()
            z[j] += t[j]
            if model.value(z) < fx - 1e-9 * (1 + abs(fx)):
                return False
    return True


def _cw_holds(rng):
    checked = 0
    for k in range(20):
        n = int(rng.integers(4, 9))
        model = random_ls(rng, n - 1, n) if k % 2 else random_quadratic(rng, n)
        for e in enumerate_bf(model, 2):
            if is_cw_minimum(model, e.point, 2)[0] != _brute_cw(model, e.point.entries, 2):
                return False, checked
            checked += 1
    return True, checked


def _one_d_holds(rng):
    """Quartic coordinate minima against an interpolated quartic and numpy's roots."""
    worst = 0.0
    for _ in range(30):
        n = int(rng.integers(2, 9))
        model = random_quartic(rng, 5, n)
        x = rng.normal(size=n)
        T, F = model.coordinate_minima(x)
        for i in range(n):
            ts = np.linspace(-2, 2, 5)
            vals = [model.value(x + t * np.eye(n)[i]) for t in ts]
            poly = np.polyfit(ts, vals, 4)
            crit = np.roots(np.polyder(poly))
            crit = crit[np.abs(crit.imag) <= 1e-7 * (1 + np.abs(crit))].real
            ref = min(model.value(x + t * np.eye(n)[i]) for t in crit)
            worst = max(worst, (F[i] - ref) / (1 + abs(ref)))
    return worst <= 1e-9, worst


def _gradients_hold(rng):
    worst = 0.0
    for k in range(30):
        n = int(rng.integers(2, 9))
        model = [random_ls(rng, 6, n), random_quadratic(rng, n), random_quartic(rng, 6, n)][k % 3]
        x = rng.normal(size=n)
        h = 1e-6
        fd = np.array([(model.value(x + h * e) - model.value(x - h * e)) / (2 * h) for e in np.eye(n)])
        g = model.grad(x)
        worst = max(worst, float(np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1.0)))
    return worst <= 1e-5, worst


def test_criterion_7_property_suite():
    rng = np.random.default_rng(2024)
    descent, d_worst = _descent_margin_holds(rng)
    surrogate, hits = _surrogate_holds(rng)
    projection = _projection_holds(rng)
    cw, n_cw = _cw_holds(rng)
    one_d, w1 = _one_d_holds(rng)
    grads, wg = _gradients_hold(rng)
    verdict(7, descent and surrogate and projection and cw and one_d and grads,
            f"descent min slack {d_worst:.1e}, surrogate {hits}/20, projection {projection}, "
            f"CW {cw} on {n_cw} points, 1-D gap {w1:.1e}, gradient rel err {wg:.1e}")


def test_criterion_8_pursuit():
    rng = np.random.default_rng(88)
    prefix_err, orth = 0.0, 0.0
    for _ in range(20):
        model = random_ls(rng, 10, 15)
        s = 4
        mp = matching_pursuit(model, s)
        greedy = greedy_sparse_simplex(model, np.zeros(15), s, SolverConfig(max_iter=s))
        assert len(mp.iterates) == len(greedy.iterates) == s + 1
        for a, b in zip(mp.iterates, greedy.iterates):
            prefix_err = max(prefix_err, float(np.max(np.abs(a.entries - b.entries))))
        omp = orthogonal_matching_pursuit(model, s)
        r = model.b - model.A @ omp.x.entries
        orth = max(orth, float(np.max(np.abs(model.A[:, omp.x.support].T @ r))))
    verdict(8, prefix_err <= 1e-12 and orth <= 1e-10,
            f"greedy vs MP max diff {prefix_err:.1e}, OMP max |A_S^T r| {orth:.1e}")


def test_criterion_9_quartic_ordering():
    totals = {"gss": 0, "pss": 0}
    for k in range(10):
        inst = generate_quartic(100 + k, 20, 30, 3)
        for algo in totals:
            totals[algo] += run_multistart(inst, SolverConfig(algorithm=algo), 50, seed=k).n_success
    verdict(9, totals["gss"] >= totals["pss"],
            f"successes over 500 runs: greedy {totals['gss']}, partial {totals['pss']}")


def test_criterion_10_determinism(tmp_path, capsys):
    first, second = reproduce_fixtures(), reproduce_fixtures()
    same = first.to_json() == second.to_json() and first.to_csv() == second.to_csv()
    same_cli = True
    for fmt in ("json", "csv"):
        paths = [tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"]
        codes = [cli_main(["fixtures", "--format", fmt, "--out", str(p)]) for p in paths]
        same_cli &= codes == [0, 0] and paths[0].read_bytes() == paths[1].read_bytes()
    capsys.readouterr()
    verdict(10, same and same_cli and first.passed,
            f"fixture reports byte-identical: in-process {same}, CLI json/csv files {same_cli}")
