"""Command-line interface.

``amgkit run``   solves one model problem and prints a report
                 (exit 0 converged, 2 not converged, 1 crash/config error).
``amgkit bench`` times the hot kernels with and without numba.
"""

import argparse
import sys
import time

import numpy as np

from . import kernels
from .experiments import ProblemSpec, SolverConfig, report_emit, run_experiment
from .sparse import write_matrix_market

_PROBLEM_ALIASES = {
    "laplace": "laplace",
    "poisson-mms": "poisson-mms",
    "mms": "poisson-mms",
    "hetero": "hetero",
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; 2 means "not converged" here
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _build_parser():
    parser = _Parser(prog="amgkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--problem", default="laplace", choices=sorted(_PROBLEM_ALIASES))
    run.add_argument("--cells", type=int, default=40, help="cells per axis")
    run.add_argument("--ranks", type=int, default=1, help="virtual ranks")
    run.add_argument("--delta", type=float, default=1.0 / 3.0)
    run.add_argument("--beta", type=float, default=1.0e-5)
    run.add_argument("--smin", type=int, default=4)
    run.add_argument("--smax", type=int, default=6)
    run.add_argument("--dmax", type=int, default=2)
    run.add_argument("--omega", type=float, default=1.6)
    run.add_argument("--smoother", default="sgs",
                     choices=["sgs", "gs-forward", "gs-backward", "jacobi"])
    run.add_argument("--steps", type=int, default=1)
    run.add_argument("--tol", type=float, default=1.0e-8)
    run.add_argument("--max-iter", type=int, default=200)
    run.add_argument("--coarse-target", type=int, default=1000)
    run.add_argument("--max-levels", type=int, default=25)
    run.add_argument("--format", default="table", choices=["table", "csv", "json"])
    run.add_argument("--seed", type=int, default=None,
                     help="reserved; the solver paths are deterministic")
    run.add_argument("--dump-matrix", metavar="PATH",
                     help="write the assembled system in Matrix Market format")
    run.add_argument("--dump-aggregates", metavar="PATH",
                     help="write the finest-level vertex,aggregate csv (1 rank only)")
    run.add_argument("--dump-stats", metavar="PATH",
                     help="write hierarchy/communication statistics as JSON")
    run.add_argument("--history", metavar="PATH",
                     help="write the residual history as csv")

    bench = sub.add_parser("bench", help="compare numba and interpreted kernels")
    bench.add_argument("--cells", type=int, default=24)
    bench.add_argument("--repeat", type=int, default=5)
    return parser


def _cmd_run(args):
    spec = ProblemSpec(_PROBLEM_ALIASES[args.problem], args.cells)
    config = SolverConfig(
        delta=args.delta, beta=args.beta, s_min=args.smin, s_max=args.smax,
        d_max=args.dmax, omega=args.omega, smoother=args.smoother,
        steps=args.steps, tol=args.tol, max_iter=args.max_iter,
        coarse_target=args.coarse_target, max_levels=args.max_levels,
    )
    report, _, extras = run_experiment(spec, config, ranks=args.ranks)
    if args.dump_matrix:
        write_matrix_market(args.dump_matrix, extras["A"])
    if args.dump_aggregates:
        if args.ranks == 1 and extras["hierarchy"].levels[0].agg is not None:
            extras["hierarchy"].levels[0].agg.dump_csv(args.dump_aggregates)
        else:
            print("aggregate dump requires --ranks 1", file=sys.stderr)
    if args.dump_stats:
        h = extras["hierarchy"]
        if args.ranks == 1:
            stats = h.stats_json()
        else:
            from .parallel.multigrid import comm_stats_json

            stats = comm_stats_json(h)
        with open(args.dump_stats, "w") as fh:
            fh.write(stats + "\n")
    if args.history:
        with open(args.history, "w") as fh:
            fh.write(extras["solve_report"].history_csv())
    print(report_emit(report, args.format), end="")
    return 0 if report.converged else 2


def _time_call(fn, repeat, *args):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _cmd_bench(args):
    from .problems import ProblemSpec as PS, generate

    A, rhs, _ = generate(PS("laplace", args.cells))
    x = np.linspace(0.0, 1.0, A.n)
    out = np.empty(A.n)
    offs, cols, vals = A.row_offsets, A.col_indices, A.values

    cases = [
        ("spmv", kernels.csr_matvec, (offs, cols, vals, x, out)),
        ("residual", kernels.csr_residual, (offs, cols, vals, x, rhs, out)),
        ("gs_forward", kernels.gs_sweep_forward, (offs, cols, vals, x.copy(), rhs, A.n)),
        ("gs_backward", kernels.gs_sweep_backward, (offs, cols, vals, x.copy(), rhs, A.n)),
    ]
    n = A.n
    print(f"kernel benchmark: laplace {args.cells}^3 ({n} unknowns, {A.nnz} nnz), "
          f"best of {args.repeat}")
    if kernels.USING_NUMBA:
        print(f"{'kernel':>12}  {'numba':>12}  {'interpreted':>12}  {'speedup':>8}")
        for name, fn, fargs in cases:
            fn(*fargs)  # compile before timing
            t_jit = _time_call(fn, args.repeat, *fargs)
            t_py = _time_call(kernels.python_version(fn), 1, *fargs)
            print(f"{name:>12}  {t_jit:12.6f}  {t_py:12.6f}  {t_py / t_jit:8.1f}x")
    else:
        print("numba disabled (AMGKIT_NO_NUMBA set or numba missing); "
              "timing the interpreted path only")
        print(f"{'kernel':>12}  {'interpreted':>12}")
        for name, fn, fargs in cases:
            t_py = _time_call(fn, 1, *fargs)
            print(f"{name:>12}  {t_py:12.6f}")
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_bench(args)
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        print(f"amgkit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
