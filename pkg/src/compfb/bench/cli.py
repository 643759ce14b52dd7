"""Command-line front end: ``bench run``, ``bench prox-oracle``, ``bench selftest``."""

from __future__ import annotations

import argparse
import sys

from .experiment import ExperimentConfig, run_experiment
from .validate import PROX_KINDS, prox_oracle_suite, selftest


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Deblurring benchmark for the composite forward-backward solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a deblurring experiment sweep")
    run.add_argument("--image", default="", help="input P5 PGM (bundled image if omitted)")
    run.add_argument("--size", type=int, default=128, help="square side after reduction")
    run.add_argument(
        "--penalty",
        default="logsum",
        choices=["logsum", "lrho", "cauchy", "l1"],
    )
    run.add_argument("--theta", type=float, default=1000.0)
    run.add_argument("--epsilon", type=float, default=1e-5)
    run.add_argument("--rho", type=float, default=0.5)
    run.add_argument("--algo", default="both", choices=["c2fb", "vmfb", "both"])
    run.add_argument(
        "--inner",
        default="15",
        help="comma-separated inner-iteration counts for c2fb, e.g. 5,15",
    )
    run.add_argument("--isnr", type=float, default=20.0, help="input SNR in dB")
    run.add_argument("--seeds", type=int, default=1, help="number of noise realizations")
    run.add_argument("--base-seed", type=int, default=0)
    run.add_argument("--gamma", type=float, default=0.99)
    run.add_argument("--metric", default="scalar", choices=["scalar", "diag"])
    run.add_argument("--out", default="bench_out")
    run.add_argument("--blur-length", type=int, default=5)
    run.add_argument("--blur-angle", type=float, default=60.0)
    run.add_argument("--levels", type=int, default=4)
    run.add_argument("--kmax", type=int, default=20000)
    run.add_argument("--x-tol", type=float, default=1e-6)
    run.add_argument("--f-tol", type=float, default=1e-5)
    run.add_argument(
        "--timing",
        action="store_true",
        help="measure wall time (gives up byte-identical summary CSVs)",
    )
    run.add_argument(
        "--save-images",
        action="store_true",
        help="also write each reconstruction as a P5 PGM",
    )

    po = sub.add_parser("prox-oracle", help="validate a prox against the grid oracle")
    po.add_argument("--kind", required=True, choices=list(PROX_KINDS))
    po.add_argument("--trials", type=int, default=500)
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--step", type=float, default=1e-5)

    sub.add_parser("selftest", help="run the library invariant suite")
    return parser


def _cmd_run(args) -> int:
    algos = ("c2fb", "vmfb") if args.algo == "both" else (args.algo,)
    cfg = ExperimentConfig(
        image_path=args.image,
        size=args.size,
        blur_length=args.blur_length,
        blur_angle_deg=args.blur_angle,
        isnr_db=args.isnr,
        noise_seed=args.base_seed,
        n_realizations=args.seeds,
        penalty_kind=args.penalty,
        theta=args.theta,
        epsilon=args.epsilon,
        rho=args.rho,
        algos=algos,
        inner_list=tuple(int(tok) for tok in args.inner.split(",") if tok),
        gamma=args.gamma,
        metric_policy="scalar" if args.metric == "scalar" else "diagonal_majorant",
        levels=args.levels,
        max_outer=args.kmax,
        stop_x_tol=args.x_tol,
        stop_f_tol=args.f_tol,
        timing=args.timing,
        save_images=args.save_images,
        output_dir=args.out,
    )
    rows = run_experiment(cfg)
    print(f"{'realization':>11} {'algo':>5} {'I':>4} {'outer':>7} {'total':>7} "
          f"{'f_final':>14} {'snr_db':>8} {'C':>10}")
    for row in rows:
        print(
            f"{row.realization:>11} {row.algo:>5} {row.inner:>4} "
            f"{row.outer_iters:>7} {row.total_inner:>7} {row.f_final:>14.6g} "
            f"{row.snr_db:>8.3f} {row.c_vs_baseline:>10.4g}"
        )
    print(f"artefacts written to {cfg.output_dir}/")
    not_converged = [r for r in rows if not r.converged]
    bad_monitors = [r for r in rows if not r.monitors_ok]
    if not_converged:
        print(f"{len(not_converged)} run(s) hit the iteration cap without converging")
    if bad_monitors:
        print(f"{len(bad_monitors)} run(s) violated a relative-error monitor")
    return 1 if (not_converged or bad_monitors) else 0


def _cmd_prox_oracle(args) -> int:
    res = prox_oracle_suite(args.kind, trials=args.trials, seed=args.seed, step=args.step)
    print(
        f"prox '{res.kind}': {res.trials} trials, max |prox - oracle| = "
        f"{res.max_abs_dev:.3e} (allowed {2 * args.step:.1e}), max objective gap = "
        f"{res.max_obj_gap:.3e} (allowed 1e-09), {res.elapsed_s:.2f}s -> "
        f"{'ok' if res.ok else 'FAIL'}"
    )
    return 0 if res.ok else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "prox-oracle":
        return _cmd_prox_oracle(args)
    return 0 if selftest() else 1


if __name__ == "__main__":
    sys.exit(main())
