"""``grasspool`` command line: ``pool``, ``experiment`` and ``gradcheck``.

Exit codes: 0 success, 1 bad input or arguments, 2 numerical failure,
3 gradient check outside tolerance.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .diagnostics import FD_RTOL, ROUTE_ATOL, run_gradcheck
from .errors import CallbackFailure, GrassPoolError, NonFinite, RankDeficient
from .experiment import SWEEPS, run_experiment
from .formats import load_sequence, save_descriptor
from .grassmann import CgOptions
from .grp import GrpParams, pool_grp, pool_grp_incremental
from .kernels import KernelKind, KernelSpec
from .synthetic import SyntheticSpec

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grasspool", description="Generalized rank pooling on the Grassmannian.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pool", help="pool one sequence file into a subspace descriptor")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--format", choices=("csv", "bin"), default=None)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--lambda", dest="lam", type=float, default=10.0)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--init", choices=("pca", "random"), default="pca")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--incremental", action="store_true")
    p.add_argument("--out", type=Path, default=None, help="descriptor path (default: INPUT with .grpu suffix)")

    e = sub.add_parser("experiment", help="cross-validated sweep on synthetic data")
    e.add_argument("--synth", required=True, help="CLASSES,PER,N,D,DYNAMICS,SIGMA,SEED[,LAYOUT]")
    e.add_argument("--sweep", choices=SWEEPS, default="eta")
    e.add_argument("--values", default="0.1", help="comma-separated sweep values")
    e.add_argument("--kernel", choices=[k.value for k in KernelKind], default="rbf-proj")
    e.add_argument("--beta", type=float, default=1.0)
    e.add_argument("--degree", type=int, default=2)
    e.add_argument("--rank", type=int, default=2)
    e.add_argument("--eta", type=float, default=0.1)
    e.add_argument("--lambda", dest="lam", type=float, default=10.0)
    e.add_argument("--max-iters", type=int, default=100)
    e.add_argument("--svm-c", type=float, default=1.0)
    e.add_argument("--folds", type=int, default=3)
    e.add_argument("--report", type=Path, required=True)

    g = sub.add_parser("gradcheck", help="finite-difference and naive-vs-fast gradient checks")
    g.add_argument("--n", type=int, default=20)
    g.add_argument("--d", type=int, default=30)
    g.add_argument("--rank", type=int, default=3)
    g.add_argument("--trials", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--corrupt-gradient", action="store_true", help=argparse.SUPPRESS)
    return parser


def _cmd_pool(args) -> int:
    seq = load_sequence(args.input, args.format)
    if not 1 <= args.rank <= seq.d:
        print(f"error: --rank must satisfy 1 <= rank <= d = {seq.d}, got {args.rank}", file=sys.stderr)
        return EXIT_INPUT
    params = GrpParams(p=args.rank, eta=args.eta, lam=args.lam, cg=CgOptions(max_iters=args.max_iters),
                       init=args.init, seed=args.seed)
    pool = pool_grp_incremental if args.incremental else pool_grp
    desc = pool(seq, params)
    out = args.out or args.input.with_suffix(".grpu")
    save_descriptor(desc, out)
    print(f"objective={desc.final_objective!r} iters={desc.iterations_run} "
          f"satisfied={desc.constraints_satisfied_fraction!r}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    synth = SyntheticSpec.parse(args.synth)
    params = GrpParams(p=args.rank, eta=args.eta, lam=args.lam, cg=CgOptions(max_iters=args.max_iters))
    kernel = KernelSpec(KernelKind(args.kernel), args.beta, args.degree)
    report = run_experiment(synth, args.sweep, args.values.split(","), kernel, args.svm_c, args.folds, params)
    text = report.to_text()
    args.report.write_text(text)
    args.report.with_name(args.report.name + ".csv").write_text(report.to_csv())
    sys.stdout.write(text)
    for key, secs in report.runtimes.items():
        print(f"runtime {key} seconds={secs:.3f}")
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    res = run_gradcheck(args.n, args.d, args.rank, args.trials, args.seed, corrupt=args.corrupt_gradient)
    print(f"max_fd_rel_error={res.max_fd_rel_error:.3e} (tol {FD_RTOL:g}) "
          f"max_route_abs_diff={res.max_route_abs_diff:.3e} (tol {ROUTE_ATOL:g}) trials={res.trials}")
    return EXIT_OK if res.passed else EXIT_TOLERANCE


_COMMANDS = {"pool": _cmd_pool, "experiment": _cmd_experiment, "gradcheck": _cmd_gradcheck}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (RankDeficient, NonFinite, CallbackFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GrassPoolError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
