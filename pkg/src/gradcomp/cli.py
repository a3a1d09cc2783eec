"""Command-line experiment runner.

Subcommands ``quad`` and ``lqr`` run one seeded benchmark comparison and
write ``<out>.csv`` / ``<out>.meta`` (plus ``<out>.svg`` with ``--svg``);
``sweep`` repeats a run across values of one parameter and writes a summary.
Exit codes: 0 success, 1 error (the message names the failing stage),
2 finished without reaching the termination tolerance.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from .experiment import (EXPERIMENT_LQR, EXPERIMENT_QUAD, SOLVER_GC,
                         SOLVER_MODEL_FREE, StageError, default_config,
                         run_experiment, run_sweep)
from .lqr import GRAD_CENTRAL, GRAD_ONE_POINT
from .serialize import load_instance, save_instance

SEED_ENV_VAR = "GRADCOMP_SEED"


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0,
                        help=f"instance seed (env {SEED_ENV_VAR} overrides)")
    parser.add_argument("--solver", choices=[SOLVER_GC, SOLVER_MODEL_FREE],
                        default=SOLVER_GC)
    parser.add_argument("--gamma", type=float, help="staleness-monitor tightness in (0,1)")
    parser.add_argument("--l-r", dest="l_r", type=float,
                        help="Lipschitz constant assumed for the residual gradient")
    parser.add_argument("--alpha", type=float, help="Armijo decrease fraction")
    parser.add_argument("--beta", type=float, help="backtracking shrink factor")
    parser.add_argument("--eta-min", dest="eta_min", type=float,
                        help="step floor of the model-based line search")
    parser.add_argument("--eta-max", dest="eta_max", type=float,
                        help="initial trial step of every line search")
    parser.add_argument("--tol", dest="termination_tol", type=float,
                        help="stop once the error to the reference drops below this")
    parser.add_argument("--max-outer-iters", dest="max_outer_iters", type=int)
    parser.add_argument("--grad-scheme", dest="gradient_scheme",
                        choices=[GRAD_ONE_POINT, GRAD_CENTRAL],
                        help="zeroth-order gradient scheme")
    parser.add_argument("--out", dest="output_path", default="gradcomp_run",
                        help="output path stem for .csv/.meta/.svg")
    parser.add_argument("--svg", dest="emit_svg", action="store_true",
                        help="also write an error-vs-evaluations SVG plot")
    parser.add_argument("--save-instance", metavar="PATH",
                        help="archive the generated instance to PATH")
    parser.add_argument("--load-instance", metavar="PATH",
                        help="run on an archived instance instead of generating one")


def _config_from_args(experiment: str, args: argparse.Namespace):
    overrides = {k: v for k, v in vars(args).items()
                 if k in ("seed", "solver", "gamma", "l_r", "alpha", "beta",
                          "eta_min", "eta_max", "termination_tol",
                          "max_outer_iters", "gradient_scheme", "output_path",
                          "emit_svg") and v is not None}
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        overrides["seed"] = int(env_seed)
    return default_config(experiment, **overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradcomp",
        description="Evaluation-budget benchmarks for compensated model-gradient descent")
    sub = parser.add_subparsers(dest="command", required=True)

    quad = sub.add_parser("quad", help="random composite convex quadratic")
    _add_run_flags(quad)
    lqr = sub.add_parser("lqr", help="linear feedback on a mildly nonlinear plant")
    _add_run_flags(lqr)

    sweep = sub.add_parser("sweep", help="rerun one experiment across parameter values")
    sweep.add_argument("--experiment", choices=[EXPERIMENT_QUAD, EXPERIMENT_LQR],
                       default=EXPERIMENT_QUAD)
    sweep.add_argument("--param", required=True,
                       help="one of gamma, L_r, eta_min")
    sweep.add_argument("--values", required=True,
                       help="comma-separated parameter values")
    _add_run_flags(sweep)
    return parser


def _run_single(experiment: str, args: argparse.Namespace) -> int:
    config = _config_from_args(experiment, args)
    instance = None
    if args.load_instance:
        try:
            instance = load_instance(args.load_instance)
        except (OSError, ValueError) as exc:
            print(f"gradcomp: instance-load: {exc}", file=sys.stderr)
            return 1
    try:
        result = run_experiment(config, instance=instance)
    except StageError as exc:
        print(f"gradcomp: {exc}", file=sys.stderr)
        return 1
    if args.save_instance:
        try:
            save_instance(args.save_instance, result.instance)
        except OSError as exc:
            print(f"gradcomp: instance-save: {exc}", file=sys.stderr)
            return 1
    if not result.trace.converged:
        print(f"gradcomp: solve: did not reach tolerance ({result.trace.termination})",
              file=sys.stderr)
        return 2
    return 0


def _run_sweep(args: argparse.Namespace) -> int:
    param = args.param.lower()
    config = _config_from_args(args.experiment, args)
    try:
        values = [float(v) for v in args.values.split(",") if v != ""]
    except ValueError:
        print(f"gradcomp: sweep: bad --values {args.values!r}", file=sys.stderr)
        return 1
    try:
        _, failures = run_sweep(config, param, values)
    except (StageError, ValueError) as exc:
        print(f"gradcomp: sweep: {exc}", file=sys.stderr)
        return 1
    return 0 if failures == 0 else 2


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in (EXPERIMENT_QUAD, EXPERIMENT_LQR):
        return _run_single(args.command, args)
    return _run_sweep(args)


if __name__ == "__main__":
    sys.exit(main())
