"""Command-line front end.

Exit status is 0 on success, 1 when a fixture check fails or an input file
or point is invalid, and 2 on a usage error.
"""
import argparse
import json
import sys

import numpy as np

from . import __version__
from .experiments import basin_csv, basin_grid, run_multistart
from .fixtures import reproduce_fixtures
from .instances import (
    ProblemInstance,
    basin_demo_instance,
    generate_gaussian_ls,
    generate_quadratic,
    generate_quartic,
)
from .optimality import certify, enumerate_bf
from .rng import CounterRNG
from .solvers import ALGORITHMS, SolverConfig, solve

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


def _vector(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(args, text):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _render(args, obj):
    return obj.to_csv() if args.format == "csv" else obj.to_json()


def _format_default(args, default):
    # parent-parser actions are shared between subcommands, so the
    # per-command default is filled in here rather than with set_defaults
    if args.format is None:
        args.format = default


def _load(args):
    inst = ProblemInstance.load(args.problem)
    if args.s is not None:
        inst = ProblemInstance(inst.kind, inst.matrix, inst.vector, args.s,
                               x_true=inst.x_true, provenance=inst.provenance)
    return inst


def _config(args):
    if args.algo == "iht" and args.L is None:
        raise _UsageError("--algo iht requires --L")
    return SolverConfig(algorithm=args.algo, L=args.L, max_iter=args.max_iter)


def cmd_generate(args):
    if args.kind == "least_squares":
        inst = generate_gaussian_ls(args.seed, args.m, args.n, args.s,
                                    normalize_columns=not args.raw_columns,
                                    planted=not args.unplanted)
    elif args.kind == "quartic":
        inst = generate_quartic(args.seed, args.m, args.n, args.s)
    elif args.kind == "quadratic":
        inst = generate_quadratic(args.seed, args.n, args.s)
    else:
        inst = basin_demo_instance()
    _emit(args, inst.to_json())
    return EXIT_OK


def cmd_solve(args):
    inst = _load(args)
    model = inst.model()
    if args.x0 is not None:
        x0 = args.x0
    elif args.seed is not None:
        x0 = CounterRNG(args.seed).sparse_normal(model.n, inst.s)
    else:
        x0 = np.zeros(model.n)
    trace = solve(model, inst.s, _config(args), x0)
    _emit(args, _render(args, trace))
    return EXIT_OK


def cmd_certify(args):
    inst = _load(args)
    cert = certify(inst.model(), args.x, inst.s, L=args.L)
    if args.format == "csv":
        d = cert.to_dict()
        rows = ["field,value"] + [f"{k},{json.dumps(v)!s}" for k, v in d.items()]
        _emit(args, "\n".join(rows) + "\n")
    else:
        _emit(args, json.dumps(cert.to_dict(), indent=2))
    return EXIT_OK


def cmd_enumerate_bf(args):
    inst = _load(args)
    _emit(args, _render(args, enumerate_bf(inst.model(), inst.s)))
    return EXIT_OK


def cmd_multistart(args):
    inst = _load(args)
    seed = 0 if args.seed is None else args.seed
    report = run_multistart(inst, _config(args), args.starts, seed, workers=args.workers)
    _emit(args, _render(args, report))
    return EXIT_OK


def cmd_basin(args):
    inst = _load(args) if args.problem else basin_demo_instance()
    if args.s is not None and not args.problem:
        raise _UsageError("--s applies only with a problem file")
    rows = basin_grid(inst.model(), _config(args), args.x_range, args.y_range,
                      (args.resolution, args.resolution), s=inst.s)
    if args.format == "json":
        _emit(args, json.dumps([{"x": x, "y": y, "class": c} for x, y, c in rows], indent=2))
    else:
        _emit(args, basin_csv(rows))
    return EXIT_OK


def cmd_fixtures(args):
    report = reproduce_fixtures()
    _emit(args, _render(args, report))
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (default: csv for basin, json otherwise)")
    common.add_argument("--seed", type=int, default=None)

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--algo", choices=ALGORITHMS, default="gss")
    solver.add_argument("--L", type=float, default=None, help="IHT step constant")
    solver.add_argument("--max-iter", type=int, default=10_000)

    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--s", type=int, default=None, help="override the problem's sparsity level")

    parser = argparse.ArgumentParser(prog="sparseopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a seeded problem file")
    p.add_argument("--kind", choices=("least_squares", "quartic", "quadratic", "basin_demo"),
                   default="least_squares")
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--s", type=int, default=3)
    p.add_argument("--raw-columns", action="store_true", help="skip column normalization")
    p.add_argument("--unplanted", action="store_true", help="Gaussian b instead of b = A x_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", parents=[common, solver, budget], help="run one solver")
    p.add_argument("problem")
    p.add_argument("--x0", type=_vector, default=None, help="comma-separated start (default: zero, or random with --seed)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", parents=[common, budget], help="optimality report for a point")
    p.add_argument("problem")
    p.add_argument("--x", type=_vector, required=True, help="comma-separated point")
    p.add_argument("--L", type=float, default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("enumerate-bf", parents=[common, budget], help="list basic-feasible points")
    p.add_argument("problem")
    p.set_defaults(func=cmd_enumerate_bf)

    p = sub.add_parser("multistart", parents=[common, solver, budget], help="random-start experiment")
    p.add_argument("problem")
    p.add_argument("--starts", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_multistart)

    p = sub.add_parser("basin", parents=[common, solver, budget], help="2-D basin-of-attraction grid")
    p.add_argument("problem", nargs="?", help="2-variable problem (default: built-in demo)")
    p.add_argument("--x-range", type=float, nargs=2, default=(-2.0, 2.0), metavar=("LO", "HI"))
    p.add_argument("--y-range", type=float, nargs=2, default=(-2.0, 2.0), metavar=("LO", "HI"))
    p.add_argument("--resolution", type=int, default=21)
    p.set_defaults(func=cmd_basin)

    p = sub.add_parser("fixtures", parents=[common], help="check the embedded reference results")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _format_default(args, "csv" if args.command == "basin" else "json")
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sparseopt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"sparseopt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
