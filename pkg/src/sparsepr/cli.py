"""Command-line front end.

Subcommands: solve, sweep, noise, reconstruct, selftest.  Every report is
written as CSV (and JSON-lines for verbose trial dumps) with a rendered
PNG figure next to it unless --no-figure is given.

Exit codes: 0 success, 1 selftest failures, 2 usage error, 3 invalid
parameter (the violated constraint is named), 4 unreadable input file.
Errors are printed to stderr as single-line JSON.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import harness, model, solver
from .harness import (
    DESK_M_OVER_N,
    DESK_SNR_DB,
    PAPER_M_OVER_N,
    PAPER_SNR_DB,
    ExperimentSpec,
)
from .model import NoiseSpec
from .numerics import relative_error
from .solver import ALGORITHMS, SMOOTHED, SolverConfig

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

OUTDIR_ENV = "SPARSEPR_OUTDIR"


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors as machine-readable JSON."""

    def error(self, message):
        print(json.dumps({"error": "usage", "detail": message}), file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fail(code: int, kind: str, detail: str) -> int:
    print(json.dumps({"error": kind, "detail": detail}), file=sys.stderr)
    return code


def _out_path(name: str) -> str:
    if os.path.isabs(name):
        return name
    return os.path.join(os.environ.get(OUTDIR_ENV, "."), name)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver parameters")
    g.add_argument("--tau", type=float, default=None,
                   help="step size in (0,1) (default: 0.3)")
    g.add_argument("--gamma", type=float, default=None,
                   help="mu-schedule test level in (0,1) (default: 0.9)")
    g.add_argument("--gamma1", type=float, default=None,
                   help="mu shrink factor in (0,1) (default: 0.5)")
    g.add_argument("--mu0", type=float, default=None,
                   help="initial smoothing parameter (default: 30)")
    g.add_argument("-T", "--iterations", type=int, default=None,
                   help="max iterations (default: 1000)")
    g.add_argument("--stop-tol", type=float, default=None,
                   help="early stop on relative error vs truth; 0 disables "
                        "(default: 1e-7 in benchmark commands, 0 for solve)")
    g.add_argument("--i0-fraction", type=float, default=None,
                   help="fraction of measurements kept for the init matrix "
                        "(default: 3/13)")
    g.add_argument("--init-weight-exponent", type=float, default=None,
                   help="exponent w in the q_i^w init weights (default: 0.5)")
    g.add_argument("--power-iters", type=int, default=None,
                   help="power iteration cap (default: 200)")
    g.add_argument("--power-tol", type=float, default=None,
                   help="power iteration residual tolerance (default: 1e-8)")
    g.add_argument("--config", default=None, metavar="FILE",
                   help="flat key=value solver config file; explicit flags win")


_SOLVER_FLAG_FIELDS = (
    "tau", "gamma", "gamma1", "mu0", "iterations", "stop_tol",
    "i0_fraction", "init_weight_exponent", "power_iters", "power_tol",
)


def _solver_config(args, default_stop_tol: float) -> SolverConfig:
    if args.config is not None:
        try:
            cfg = SolverConfig.from_file(args.config)
        except OSError as exc:
            raise _InputFileError(str(exc))
    else:
        cfg = SolverConfig()
        cfg.stop_tol = default_stop_tol
    overrides = {
        name: getattr(args, name)
        for name in _SOLVER_FLAG_FIELDS
        if getattr(args, name) is not None
    }
    return replace(cfg, **overrides)


class _InputFileError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="sparsepr",
        description="Sparse phase retrieval from magnitude-only Gaussian "
                    "measurements: smoothed thresholded gradient solver and "
                    "Monte-Carlo benchmarks.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__import__('sparsepr').__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    # solve -----------------------------------------------------------------
    p = sub.add_parser(
        "solve", help="solve one synthetic instance and dump the trace",
        description="Synthesize a sparse signal and Gaussian magnitude "
                    "measurements, run the solver, and write the "
                    "per-iteration trace CSV (plus a figure).")
    p.add_argument("--mode", choices=("real", "complex"), default="real",
                   help="field of the signal and rows (default: real)")
    p.add_argument("--n", type=int, default=256, help="signal length (default: 256)")
    p.add_argument("--k", type=int, default=5, help="true sparsity (default: 5)")
    p.add_argument("--k-hat", type=int, default=None,
                   help="sparsity budget given to the solver (default: k)")
    p.add_argument("--m", type=int, default=None,
                   help="number of measurements (default: 3*n)")
    p.add_argument("--seed", type=int, default=2024, help="RNG seed (default: 2024)")
    p.add_argument("--snr", type=float, default=None,
                   help="amplitude SNR in dB; omit for noiseless")
    p.add_argument("--algorithm", choices=ALGORITHMS, default=SMOOTHED,
                   help="solver variant (default: smoothed)")
    p.add_argument("--out", default="solve", help="output name prefix (default: solve)")
    p.add_argument("--no-figure", action="store_true", help="skip the PNG figure")
    p.add_argument("--save-signal", default=None, metavar="FILE",
                   help="also write the ground-truth signal blob")
    p.add_argument("--save-ensemble", default=None, metavar="FILE",
                   help="also write the measurement ensemble blob")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    # sweep -----------------------------------------------------------------
    p = sub.add_parser(
        "sweep", help="success-rate sweep over m/n (and sparsity budgets)",
        description="Monte-Carlo success-rate sweep; writes per-cell summary "
                    "CSV, per-trial CSV, and a success-rate figure.")
    _add_common_experiment_flags(p)
    p.add_argument("--m-over-n", type=_float_list, default=None, metavar="LIST",
                   help="comma-separated m/n grid (default: "
                        "0.2,0.4,0.8,1.5,3.0; paper scale: 0.1..3.0 step 0.1)")
    p.add_argument("--k-hat", type=_int_list, default=None, metavar="LIST",
                   help="comma-separated sparsity budgets (default: the true k)")
    p.add_argument("--out", default="sweep", help="output name prefix (default: sweep)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    # noise -----------------------------------------------------------------
    p = sub.add_parser(
        "noise", help="mean/median error versus SNR",
        description="Noise robustness curve; writes per-cell summary CSV, "
                    "per-trial CSV, and an error-vs-SNR figure.")
    _add_common_experiment_flags(p, default_trials=None)
    p.add_argument("--m-over-n", type=float, default=1.5,
                   help="measurements per dimension (default: 1.5)")
    p.add_argument("--k-hat", type=int, default=None,
                   help="sparsity budget (default: the true k)")
    p.add_argument("--snr", type=_float_list, default=None, metavar="LIST",
                   help="comma-separated SNR grid in dB, 'inf' for noiseless "
                        "(default: 10,30,50,70; paper scale: 5..70 step 5)")
    p.add_argument("--out", default="noise", help="output name prefix (default: noise)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_noise)

    # reconstruct -------------------------------------------------------------
    p = sub.add_parser(
        "reconstruct", help="paired reconstruction dump (smoothed vs baseline)",
        description="Reconstruct one instance with both solver variants and "
                    "write truth/estimate CSV plus stem-plot figure.  The "
                    "instance is synthesized from flags, or loaded with "
                    "--ensemble-in (and optionally --signal-in for truth).")
    p.add_argument("--mode", choices=("real", "complex"), default="real",
                   help="field of the signal and rows (default: real)")
    p.add_argument("--n", type=int, default=None,
                   help="signal length (default: 256; paper scale: 1000)")
    p.add_argument("--k", type=int, default=None,
                   help="true sparsity (default: 5; paper scale: 10)")
    p.add_argument("--k-hat", type=int, default=None,
                   help="sparsity budget (default: 40; paper scale: 180)")
    p.add_argument("--m-over-n", type=float, default=1.0,
                   help="measurements per dimension (default: 1.0)")
    p.add_argument("--seed", type=int, default=2024, help="RNG seed (default: 2024)")
    p.add_argument("--snr", type=float, default=None,
                   help="amplitude SNR in dB; omit for noiseless")
    p.add_argument("--ensemble-in", default=None, metavar="FILE",
                   help="load measurements from a blob instead of synthesizing")
    p.add_argument("--signal-in", default=None, metavar="FILE",
                   help="ground-truth signal blob (with --ensemble-in)")
    p.add_argument("--paper-scale", action="store_true",
                   help="use the full-size defaults (n=1000, k=10, k_hat=180)")
    p.add_argument("--out", default="reconstruction",
                   help="output name prefix (default: reconstruction)")
    p.add_argument("--no-figure", action="store_true", help="skip the PNG figure")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_reconstruct)

    # selftest ----------------------------------------------------------------
    p = sub.add_parser(
        "selftest", help="run the built-in invariant suite",
        description="Runs the fast invariant checks and exits 0 iff all pass.")
    p.set_defaults(func=cmd_selftest)

    return parser


def _add_common_experiment_flags(p: argparse.ArgumentParser, default_trials: int | None = 25) -> None:
    p.add_argument("--mode", choices=("real", "complex"), default="real",
                   help="field of the signal and rows (default: real)")
    p.add_argument("--n", type=int, default=None,
                   help="signal length (default: 256; paper scale: 1000)")
    p.add_argument("--true-k", type=int, default=None,
                   help="true sparsity (default: 5; paper scale: 10)")
    p.add_argument("--trials", type=int, default=None,
                   help=f"trials per cell (default: {default_trials if default_trials else 10}; "
                        "paper scale: 100)")
    p.add_argument("--seed", type=int, default=2024, help="base seed (default: 2024)")
    p.add_argument("--algorithm", choices=ALGORITHMS, default=SMOOTHED,
                   help="solver variant (default: smoothed)")
    p.add_argument("--threshold", type=float, default=1e-5,
                   help="success threshold on relative error (default: 1e-5)")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel worker processes; results are byte-identical "
                        "for any value (default: 1)")
    p.add_argument("--paper-scale", action="store_true",
                   help="use the full-size grids (n=1000, 100 trials)")
    p.add_argument("--verbose-trials", action="store_true",
                   help="also write per-trial JSON lines")
    p.add_argument("--include-timing", action="store_true",
                   help="include wall-time columns (breaks byte reproducibility)")
    p.add_argument("--no-figure", action="store_true", help="skip the PNG figure")


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    cfg = _solver_config(args, default_stop_tol=0.0)
    n = args.n
    m = args.m if args.m is not None else 3 * n
    cfg.k_hat = args.k_hat if args.k_hat is not None else args.k
    cfg.validate(n)
    if args.k > n:
        raise ValueError(f"k must be <= n = {n}, got {args.k}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")

    x = model.make_signal(n, args.k, seed=args.seed, mode=args.mode)
    ens = model.measure(x, m, seed=args.seed + 1, mode=args.mode,
                        noise=NoiseSpec(snr_db=args.snr))
    if args.save_signal:
        model.save_signal(_out_path(args.save_signal), x)
    if args.save_ensemble:
        model.save_ensemble(_out_path(args.save_ensemble), ens)

    outcome = solver.run_algorithm(args.algorithm, ens, cfg, truth=x)
    trace_path = _out_path(args.out + "_trace.csv")
    solver.write_trace_csv(trace_path, outcome)
    written = [trace_path]
    if not args.no_figure:
        from . import plotting

        fig_path = _out_path(args.out + "_trace.png")
        plotting.save_figure(plotting.trace_figure(outcome), fig_path)
        written.append(fig_path)

    print(json.dumps({
        "algorithm": args.algorithm,
        "n": n, "k": args.k, "k_hat": cfg.k_hat, "m": m,
        "iterations": outcome.iterations_run,
        "final_rel_err": outcome.final_rel_err,
        "init_rel_err": outcome.init_rel_err,
        "mu_final": outcome.mu_final,
        "converged_early": outcome.converged_early,
        "files": written,
    }))
    return EXIT_OK


def _experiment_spec(args, m_over_n, k_hat_grid, snr_grid) -> ExperimentSpec:
    paper = args.paper_scale
    cfg = _solver_config(args, default_stop_tol=1e-7)
    return ExperimentSpec(
        mode=args.mode,
        n=args.n if args.n is not None else (1000 if paper else 256),
        true_k=args.true_k if args.true_k is not None else (10 if paper else 5),
        k_hat_grid=k_hat_grid,
        m_over_n_grid=m_over_n,
        snr_db_grid=snr_grid,
        trials=args.trials if args.trials is not None else (100 if paper else 25),
        base_seed=args.seed,
        algorithm=args.algorithm,
        success_threshold=args.threshold,
        solver=cfg,
    )


def _write_sweep_outputs(args, result, figure_kind: str) -> list[str]:
    paths = []
    summary = _out_path(args.out + "_summary.csv")
    trials = _out_path(args.out + "_trials.csv")
    harness.write_summary_csv(summary, result, include_timing=args.include_timing)
    harness.write_trials_csv(trials, result, include_timing=args.include_timing)
    paths += [summary, trials]
    if args.verbose_trials:
        jsonl = _out_path(args.out + "_trials.jsonl")
        harness.write_trials_jsonl(jsonl, result, include_timing=args.include_timing)
        paths.append(jsonl)
    if not args.no_figure:
        from . import plotting

        builder = plotting.sweep_figure if figure_kind == "sweep" else plotting.noise_figure
        fig_path = _out_path(args.out + ".png")
        plotting.save_figure(builder(result), fig_path)
        paths.append(fig_path)
    return paths


def cmd_sweep(args) -> int:
    m_over_n = args.m_over_n
    if m_over_n is None:
        m_over_n = PAPER_M_OVER_N if args.paper_scale else DESK_M_OVER_N
    spec = _experiment_spec(args, m_over_n, args.k_hat, None)
    result = harness.run_sweep(spec, jobs=args.jobs)

    paths = _write_sweep_outputs(args, result, "sweep")
    for s in result.summaries():
        print(f"{spec.cells()[s.cell_index].label()}: success_rate={s.success_rate:.3f} "
              f"median_rel_err={s.median_rel_err:.3e}")
    print("wrote: " + ", ".join(paths))
    return EXIT_OK


def cmd_noise(args) -> int:
    if args.trials is None and not args.paper_scale:
        args.trials = 10
    snr = args.snr
    if snr is None:
        snr = PAPER_SNR_DB if args.paper_scale else DESK_SNR_DB
    snr_grid = tuple(None if np.isinf(s) else float(s) for s in snr)
    k_hat_grid = (args.k_hat,) if args.k_hat is not None else None
    spec = _experiment_spec(args, (args.m_over_n,), k_hat_grid, snr_grid)
    result = harness.run_noise_curve(spec, jobs=args.jobs)

    paths = _write_sweep_outputs(args, result, "noise")
    for s in result.summaries():
        snr_label = "inf" if s.snr_db is None else f"{s.snr_db:g}"
        print(f"snr={snr_label} dB: mean_rel_err={s.mean_rel_err:.3e} "
              f"median_rel_err={s.median_rel_err:.3e}")
    print("wrote: " + ", ".join(paths))
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    cfg = _solver_config(args, default_stop_tol=1e-10)
    paper = args.paper_scale
    if args.ensemble_in is not None:
        try:
            ens = model.load_ensemble(args.ensemble_in)
            truth = model.load_signal(args.signal_in) if args.signal_in else None
        except (OSError, ValueError) as exc:
            raise _InputFileError(str(exc))
        cfg.k_hat = args.k_hat if args.k_hat is not None else (180 if paper else 40)
        cfg.validate(ens.n)
        sm = solver.solve(ens, cfg, truth=truth)
        bl = solver.solve_baseline_mu0(ens, cfg, truth=truth)
        nan_vec = np.full(ens.n, np.nan)
        dump = harness.ReconstructionDump(
            truth=truth.vector if truth is not None else nan_vec,
            smoothed=sm.z_final,
            baseline=bl.z_final,
            smoothed_rel_err=(relative_error(sm.z_final, truth.vector)
                              if truth is not None else float("nan")),
            baseline_rel_err=(relative_error(bl.z_final, truth.vector)
                              if truth is not None else float("nan")),
            support=(truth.support if truth is not None else np.array([], dtype=int)),
        )
    else:
        spec = ExperimentSpec(
            mode=args.mode,
            n=args.n if args.n is not None else (1000 if paper else 256),
            true_k=args.k if args.k is not None else (10 if paper else 5),
            k_hat_grid=(args.k_hat if args.k_hat is not None else (180 if paper else 40),),
            m_over_n_grid=(args.m_over_n,),
            snr_db_grid=(args.snr,) if args.snr is not None else None,
            trials=1,
            base_seed=args.seed,
            solver=cfg,
        )
        dump = harness.dump_reconstruction(spec)

    csv_path = _out_path(args.out + ".csv")
    harness.write_reconstruction_csv(csv_path, dump)
    written = [csv_path]
    if not args.no_figure:
        from . import plotting

        fig_path = _out_path(args.out + ".png")
        plotting.save_figure(plotting.reconstruction_figure(dump), fig_path)
        written.append(fig_path)
    print(json.dumps({
        "smoothed_rel_err": dump.smoothed_rel_err,
        "baseline_rel_err": dump.baseline_rel_err,
        "files": written,
    }))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    failures = run_selftest()
    return EXIT_OK if failures == 0 else EXIT_SELFTEST


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse --help / usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _InputFileError as exc:
        return _fail(EXIT_IO, "input", str(exc))
    except ValueError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
