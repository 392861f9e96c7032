"""Monte-Carlo experiment engine.

Sweeps a grid of (m/n, sparsity budget, SNR) cells, runs seeded independent
trials per cell, and aggregates success rates and error statistics.  Trial
seeds are derived from (base seed, cell index, trial index) with a
splittable hash, so results are bit-identical no matter how many workers
run the grid.  Wall times are collected but excluded from file output by
default: reruns must produce byte-identical CSVs.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from statistics import mean, median

import numpy as np

from .model import NoiseSpec, make_signal, measure
from .numerics import derive_seeds, relative_error
from .solver import SMOOTHED, SolverConfig, run_algorithm, solve, solve_baseline_mu0

DEFAULT_SUCCESS_THRESHOLD = 1e-5
DESK_M_OVER_N = (0.2, 0.4, 0.8, 1.5, 3.0)
DESK_SNR_DB = (10.0, 30.0, 50.0, 70.0)
PAPER_M_OVER_N = tuple(round(0.1 * i, 1) for i in range(1, 31))
PAPER_SNR_DB = tuple(float(s) for s in range(5, 71, 5))


@dataclass(frozen=True)
class Cell:
    """One grid point.  snr_db None means noiseless."""

    m_over_n: float
    k_hat: int
    snr_db: float | None = None

    def label(self) -> str:
        snr = "inf" if self.snr_db is None else f"{self.snr_db:g}"
        return f"m/n={self.m_over_n:g} k_hat={self.k_hat} snr={snr}"


@dataclass
class ExperimentSpec:
    """Grid description plus everything a trial needs to be reproducible."""

    mode: str = "real"
    n: int = 256
    true_k: int = 5
    k_hat_grid: tuple[int, ...] | None = None  # None: (true_k,)
    m_over_n_grid: tuple[float, ...] = DESK_M_OVER_N
    snr_db_grid: tuple[float | None, ...] | None = None  # None: noiseless
    trials: int = 25
    base_seed: int = 2024
    algorithm: str = SMOOTHED
    success_threshold: float = DEFAULT_SUCCESS_THRESHOLD
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(stop_tol=1e-7))

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.success_threshold > 0:
            raise ValueError(f"success_threshold must be > 0, got {self.success_threshold}")
        if not self.m_over_n_grid:
            raise ValueError("m_over_n_grid must be nonempty")
        if self.k_hat_grid is not None and not self.k_hat_grid:
            raise ValueError("k_hat_grid must be nonempty when given")

    def cells(self) -> list[Cell]:
        k_hats = self.k_hat_grid if self.k_hat_grid is not None else (self.true_k,)
        snrs = self.snr_db_grid if self.snr_db_grid is not None else (None,)
        return [
            Cell(m_over_n=r, k_hat=k, snr_db=s)
            for s in snrs
            for k in k_hats
            for r in self.m_over_n_grid
        ]

    def m_for(self, cell: Cell) -> int:
        return max(1, int(round(cell.m_over_n * self.n)))


@dataclass
class TrialRecord:
    cell_index: int
    m_over_n: float
    k_hat: int
    snr_db: float | None
    trial: int
    signal_seed: int
    ensemble_seed: int
    rel_err: float
    success: bool
    init_rel_err: float
    iterations: int
    mu_final: float
    clipped: int
    wall_time: float


@dataclass
class CellSummary:
    cell_index: int
    m_over_n: float
    k_hat: int
    snr_db: float | None
    trials: int
    success_rate: float
    mean_rel_err: float
    median_rel_err: float
    mean_iterations: float
    mean_wall_time: float


@dataclass
class SweepResult:
    spec: ExperimentSpec
    records: list[TrialRecord]

    def summaries(self) -> list[CellSummary]:
        by_cell: dict[int, list[TrialRecord]] = {}
        for rec in self.records:
            by_cell.setdefault(rec.cell_index, []).append(rec)
        cells = self.spec.cells()
        out = []
        for idx in sorted(by_cell):
            rows = sorted(by_cell[idx], key=lambda r: r.trial)
            cell = cells[idx]
            out.append(
                CellSummary(
                    cell_index=idx,
                    m_over_n=cell.m_over_n,
                    k_hat=cell.k_hat,
                    snr_db=cell.snr_db,
                    trials=len(rows),
                    success_rate=mean(float(r.success) for r in rows),
                    mean_rel_err=mean(r.rel_err for r in rows),
                    median_rel_err=median(r.rel_err for r in rows),
                    mean_iterations=mean(r.iterations for r in rows),
                    mean_wall_time=mean(r.wall_time for r in rows),
                )
            )
        return out

    def success_rates(self) -> list[float]:
        return [s.success_rate for s in self.summaries()]


def trial_seeds(base_seed: int, cell_index: int, trial: int) -> tuple[int, int]:
    """(signal seed, ensemble seed) for one trial; distinct across the grid."""
    sig, ens = derive_seeds(base_seed, cell_index, trial)
    return int(sig), int(ens)


def run_trial(spec: ExperimentSpec, cell_index: int, trial: int) -> TrialRecord:
    """Synthesize, solve, and score one seeded trial."""
    cell = spec.cells()[cell_index]
    signal_seed, ensemble_seed = trial_seeds(spec.base_seed, cell_index, trial)
    t0 = time.perf_counter()
    x = make_signal(spec.n, spec.true_k, seed=signal_seed, mode=spec.mode)
    ens = measure(
        x,
        spec.m_for(cell),
        seed=ensemble_seed,
        mode=spec.mode,
        noise=NoiseSpec(snr_db=cell.snr_db),
    )
    cfg = replace(spec.solver, k_hat=cell.k_hat)
    outcome = run_algorithm(spec.algorithm, ens, cfg, truth=x)
    rel_err = relative_error(outcome.z_final, x.vector)
    return TrialRecord(
        cell_index=cell_index,
        m_over_n=cell.m_over_n,
        k_hat=cell.k_hat,
        snr_db=cell.snr_db,
        trial=trial,
        signal_seed=signal_seed,
        ensemble_seed=ensemble_seed,
        rel_err=rel_err,
        success=rel_err < spec.success_threshold,
        init_rel_err=outcome.init_rel_err,
        iterations=outcome.iterations_run,
        mu_final=outcome.mu_final,
        clipped=ens.clipped,
        wall_time=time.perf_counter() - t0,
    )


def _run_indexed(args) -> TrialRecord:
    spec, cell_index, trial = args
    return run_trial(spec, cell_index, trial)


def run_sweep(spec: ExperimentSpec, jobs: int = 1) -> SweepResult:
    """Run every (cell, trial) in the grid, optionally across processes.

    The result is ordered by (cell, trial) regardless of worker count, so
    aggregation and file output are byte-stable.
    """
    tasks = [
        (spec, ci, t)
        for ci in range(len(spec.cells()))
        for t in range(spec.trials)
    ]
    if jobs <= 1 or len(tasks) == 1:
        records = [_run_indexed(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_indexed, tasks, chunksize=4))
    records.sort(key=lambda r: (r.cell_index, r.trial))
    return SweepResult(spec=spec, records=records)


def run_noise_curve(spec: ExperimentSpec, jobs: int = 1) -> SweepResult:
    """A sweep over an SNR grid; error statistics are the point, not success."""
    if spec.snr_db_grid is None:
        raise ValueError("run_noise_curve requires snr_db_grid")
    return run_sweep(spec, jobs=jobs)


@dataclass
class ReconstructionDump:
    truth: np.ndarray
    smoothed: np.ndarray
    baseline: np.ndarray
    smoothed_rel_err: float
    baseline_rel_err: float
    support: np.ndarray


def dump_reconstruction(spec: ExperimentSpec, cell_index: int = 0, trial: int = 0) -> ReconstructionDump:
    """Run both algorithms on one paired-seed trial and return the vectors."""
    cell = spec.cells()[cell_index]
    signal_seed, ensemble_seed = trial_seeds(spec.base_seed, cell_index, trial)
    x = make_signal(spec.n, spec.true_k, seed=signal_seed, mode=spec.mode)
    ens = measure(
        x,
        spec.m_for(cell),
        seed=ensemble_seed,
        mode=spec.mode,
        noise=NoiseSpec(snr_db=cell.snr_db),
    )
    cfg = replace(spec.solver, k_hat=cell.k_hat)
    sm = solve(ens, cfg, truth=x)
    bl = solve_baseline_mu0(ens, cfg, truth=x)
    return ReconstructionDump(
        truth=x.vector,
        smoothed=sm.z_final,
        baseline=bl.z_final,
        smoothed_rel_err=relative_error(sm.z_final, x.vector),
        baseline_rel_err=relative_error(bl.z_final, x.vector),
        support=x.support,
    )


# ---------------------------------------------------------------------------
# File output.  Column layouts are documented in the README; floats are
# written with repr() so identical runs produce identical bytes.
# ---------------------------------------------------------------------------

SUMMARY_COLUMNS = (
    "cell_index", "m_over_n", "k_hat", "snr_db", "trials",
    "success_rate", "mean_rel_err", "median_rel_err", "mean_iterations",
)
TRIAL_COLUMNS = (
    "cell_index", "m_over_n", "k_hat", "snr_db", "trial",
    "signal_seed", "ensemble_seed", "rel_err", "success",
    "init_rel_err", "iterations", "mu_final", "clipped",
)


def _fmt(value):
    if value is None:
        return "inf"
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return repr(value)
    return value


def write_summary_csv(path, result: SweepResult, include_timing: bool = False) -> None:
    columns = SUMMARY_COLUMNS + (("mean_wall_time",) if include_timing else ())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for s in result.summaries():
            row = [s.cell_index, _fmt(s.m_over_n), s.k_hat, _fmt(s.snr_db), s.trials,
                   _fmt(s.success_rate), _fmt(s.mean_rel_err), _fmt(s.median_rel_err),
                   _fmt(s.mean_iterations)]
            if include_timing:
                row.append(_fmt(s.mean_wall_time))
            writer.writerow(row)


def write_trials_csv(path, result: SweepResult, include_timing: bool = False) -> None:
    columns = TRIAL_COLUMNS + (("wall_time",) if include_timing else ())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for r in result.records:
            row = [r.cell_index, _fmt(r.m_over_n), r.k_hat, _fmt(r.snr_db), r.trial,
                   r.signal_seed, r.ensemble_seed, _fmt(r.rel_err), _fmt(r.success),
                   _fmt(r.init_rel_err), r.iterations, _fmt(r.mu_final), r.clipped]
            if include_timing:
                row.append(_fmt(r.wall_time))
            writer.writerow(row)


def write_trials_jsonl(path, result: SweepResult, include_timing: bool = False) -> None:
    """One JSON object per trial, keys as in TRIAL_COLUMNS."""
    with open(path, "w") as fh:
        for r in result.records:
            obj = {
                "cell_index": r.cell_index,
                "m_over_n": r.m_over_n,
                "k_hat": r.k_hat,
                "snr_db": r.snr_db,
                "trial": r.trial,
                "signal_seed": r.signal_seed,
                "ensemble_seed": r.ensemble_seed,
                "rel_err": r.rel_err,
                "success": r.success,
                "init_rel_err": r.init_rel_err,
                "iterations": r.iterations,
                "mu_final": r.mu_final,
                "clipped": r.clipped,
            }
            if include_timing:
                obj["wall_time"] = r.wall_time
            fh.write(json.dumps(obj) + "\n")


RECONSTRUCTION_COLUMNS = (
    "index", "truth_re", "truth_im", "smoothed_re", "smoothed_im",
    "baseline_re", "baseline_im",
)


def write_reconstruction_csv(path, dump: ReconstructionDump) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECONSTRUCTION_COLUMNS)
        for i in range(dump.truth.shape[0]):
            writer.writerow([
                i,
                repr(float(np.real(dump.truth[i]))), repr(float(np.imag(dump.truth[i]))),
                repr(float(np.real(dump.smoothed[i]))), repr(float(np.imag(dump.smoothed[i]))),
                repr(float(np.real(dump.baseline[i]))), repr(float(np.imag(dump.baseline[i]))),
            ])
