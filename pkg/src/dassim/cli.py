"""Command-line twin-experiment runner.

Example:
    dassim run --methods kf,enkf,var3d --steps 2000 --seed 42 \\
        --out-csv run.csv --out-metrics run.metrics
"""

from __future__ import annotations

import argparse
import sys

from .harness import METHODS, SOLVERS, ExperimentConfig, run_experiment, write_csv, write_metrics


def _methods_list(text: str) -> tuple[str, ...]:
    return tuple(part for part in text.split(",") if part)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dassim", description="Spring-mass data assimilation twin experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a twin experiment and write CSV/metrics outputs")
    run.add_argument("--methods", type=_methods_list, default=METHODS, metavar="LIST",
                     help="comma-separated subset of kf,enkf,var3d (default: all; empty for truth/observations only)")
    run.add_argument("--dt", type=float, default=0.01, help="time step in seconds (default 0.01)")
    run.add_argument("--steps", type=int, default=2000, help="number of steps (default 2000)")
    run.add_argument("--seed", type=int, default=42, help="seed for truth, observations and ensemble (default 42)")
    run.add_argument("--r-var", type=float, default=0.01, help="observation noise variance (default 0.01)")
    run.add_argument("--ensemble-size", type=int, default=100, help="ensemble members (default 100)")
    run.add_argument("--d-scale", type=float, default=0.05, help="3D-Var background variance (default 0.05)")
    run.add_argument("--solver", choices=SOLVERS, default="analytic", help="3D-Var solver (default analytic)")
    run.add_argument("--gd-eps", type=float, default=1e-6, help="gradient-norm tolerance for gd solver")
    run.add_argument("--gd-step", type=float, default=0.1, help="initial gd step size")
    run.add_argument("--gd-maxiter", type=int, default=1000, help="gd iteration cap")
    run.add_argument("--obs-stride", type=int, default=1, help="assimilate every Nth observation (default 1)")
    run.add_argument("--out-csv", default=None, metavar="PATH", help="write per-step series as CSV")
    run.add_argument("--out-metrics", default=None, metavar="PATH", help="write key=value metrics")
    return parser


def cli_main(argv=None) -> int:
    """Parse flags and run; returns 0 (ok), 2 (bad arguments) or 1 (failure)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags, 0 on --help
        return int(exc.code or 0)

    cfg = ExperimentConfig(
        dt=args.dt,
        steps=args.steps,
        seed=args.seed,
        r_var=args.r_var,
        ensemble_size=args.ensemble_size,
        d_scale=args.d_scale,
        methods=args.methods,
        solver=args.solver,
        gd_eps=args.gd_eps,
        gd_step=args.gd_step,
        gd_maxiter=args.gd_maxiter,
        obs_stride=args.obs_stride,
        out_csv=args.out_csv,
        out_metrics=args.out_metrics,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"dassim run: bad arguments: {exc}", file=sys.stderr)
        return 2

    try:
        result = run_experiment(cfg)
        if cfg.out_csv is not None:
            write_csv(result, cfg.out_csv)
        if cfg.out_metrics is not None:
            write_metrics(result, cfg.out_metrics)
    except Exception as exc:
        print(f"dassim run: {exc}", file=sys.stderr)
        return 1

    for key, value in result.metrics.items():
        print(f"{key}={value}")
    if cfg.out_csv is not None:
        print(f"wrote {cfg.out_csv}")
    if cfg.out_metrics is not None:
        print(f"wrote {cfg.out_metrics}")
    return 0


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
