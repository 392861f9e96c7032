"""Sparse phase retrieval solver.

The solver runs three stages:

1. Support estimate: the k_hat largest weighted column-energy scores
   (1/m) * sum_i q_i^2 |a_ij|^2.
2. Spectral initialization: leading eigenvector of a weighted correlation
   matrix built from the measurements with the largest normalized
   amplitudes, restricted to the estimated support, scaled to the norm
   estimate lambda0 = sqrt(mean q^2).
3. Iterative refinement: hard-thresholded gradient descent on the smoothed
   amplitude loss, with the smoothing parameter mu shrunk by gamma1
   whenever the gradient norm at the new iterate falls below gamma * mu.

solve_baseline_mu0 runs the same loop with the un-smoothed mu = 0 gradient
and no mu schedule, as a contrast baseline.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields

import numpy as np

from . import smoothing
from .model import MeasurementEnsemble, SparseSignal
from .numerics import (
    COMPLEX,
    DEFAULT_POWER_ITERS,
    DEFAULT_POWER_TOL,
    hard_threshold,
    leading_eigenvector,
    relative_error,
    top_k_indices,
)

I0_FRACTION_DEFAULT = 3.0 / 13.0

SMOOTHED = "smoothed"
BASELINE = "baseline"
ALGORITHMS = (SMOOTHED, BASELINE)


@dataclass
class SolverConfig:
    """Solver hyperparameters.  Defaults follow the reference tuning."""

    tau: float = 0.3            # step size, in (0,1)
    gamma: float = 0.9          # mu-schedule test level, in (0,1)
    gamma1: float = 0.5         # mu shrink factor, in (0,1)
    mu0: float = 30.0           # initial smoothing parameter
    iterations: int = 1000      # max iterations T
    k_hat: int | None = None    # sparsity budget (None: set by the caller)
    i0_fraction: float = I0_FRACTION_DEFAULT
    init_weight_exponent: float = 0.5  # q_i^w weight in the init matrix
    stop_tol: float = 0.0       # early stop on rel_err vs truth; 0 disables
    grad_tol: float = 1e-14     # blind-mode stop on gradient norm
    power_iters: int = DEFAULT_POWER_ITERS
    power_tol: float = DEFAULT_POWER_TOL
    power_seed: int = 7         # deterministic power-iteration start

    def validate(self, n: int | None = None) -> None:
        """Raise ValueError naming the violated constraint."""
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0,1), got {self.tau}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0,1), got {self.gamma}")
        if not 0.0 < self.gamma1 < 1.0:
            raise ValueError(f"gamma1 must lie in (0,1), got {self.gamma1}")
        if not self.mu0 > 0:
            raise ValueError(f"mu0 must be positive, got {self.mu0}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not 0.0 < self.i0_fraction <= 1.0:
            raise ValueError(f"i0_fraction must lie in (0,1], got {self.i0_fraction}")
        if self.stop_tol < 0:
            raise ValueError(f"stop_tol must be >= 0, got {self.stop_tol}")
        if self.k_hat is not None:
            if self.k_hat < 1:
                raise ValueError(f"k_hat must be >= 1, got {self.k_hat}")
            if n is not None and self.k_hat > n:
                raise ValueError(f"k_hat must be <= n = {n}, got {self.k_hat}")

    @classmethod
    def from_file(cls, path) -> "SolverConfig":
        """Parse a flat key=value config file ('#' starts a comment)."""
        known = {f.name for f in fields(cls)}
        kwargs = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
                key, value = (part.strip() for part in line.split("=", 1))
                if key not in known:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
                if key in ("iterations", "k_hat", "power_iters", "power_seed"):
                    kwargs[key] = int(value)
                else:
                    kwargs[key] = float(value)
        return cls(**kwargs)


@dataclass
class InitInfo:
    support: np.ndarray
    eigenvalue: float
    converged: bool
    degenerate: bool  # all amplitudes zero; z0 is the zero vector


@dataclass
class SolverTrace:
    """Per-iteration history.  grad_norm is the mu-schedule test quantity
    ||grad(z_{t+1}, mu_t)||; rel_err is filled only when truth is given."""

    t: list[int] = field(default_factory=list)
    mu: list[float] = field(default_factory=list)
    grad_norm: list[float] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    rel_err: list[float] = field(default_factory=list)
    mu_reductions: int = 0

    def append(self, t, mu, grad_norm, obj, rel_err):
        self.t.append(int(t))
        self.mu.append(float(mu))
        self.grad_norm.append(float(grad_norm))
        self.objective.append(float(obj))
        self.rel_err.append(float(rel_err) if rel_err is not None else math.nan)


@dataclass
class SolverOutcome:
    z_final: np.ndarray
    iterations_run: int
    trace: SolverTrace
    converged_early: bool
    init_rel_err: float  # nan when no truth supplied
    init_info: InitInfo
    mu_final: float
    algorithm: str = SMOOTHED
    zero_projection_hits: int = 0  # baseline only: terms dropped at |a_i^H z| = 0

    @property
    def final_rel_err(self) -> float:
        return self.trace.rel_err[-1] if self.trace.rel_err else math.nan


def estimate_support(ens: MeasurementEnsemble, k_hat: int) -> np.ndarray:
    """Indices of the k_hat largest scores (1/m) sum_i q_i^2 |a_ij|^2."""
    if not 1 <= k_hat <= ens.n:
        raise ValueError(f"k_hat must satisfy 1 <= k_hat <= {ens.n}, got {k_hat}")
    scores = (ens.q**2) @ (np.abs(ens.rows) ** 2) / ens.m
    return top_k_indices(scores, k_hat)


def initialize(ens: MeasurementEnsemble, cfg: SolverConfig) -> tuple[np.ndarray, InitInfo]:
    """Spectral initial point z0 = lambda0 * (leading eigenvector), supported
    on the estimated support; entries off it are exactly zero."""
    cfg.validate(ens.n)
    k_hat = cfg.k_hat if cfg.k_hat is not None else ens.n
    support = estimate_support(ens, k_hat)
    dtype = np.float64 if ens.mode != COMPLEX else np.complex128
    z0 = np.zeros(ens.n, dtype=dtype)

    lam0 = float(np.sqrt(np.mean(ens.q**2)))
    if lam0 == 0.0:
        return z0, InitInfo(support=support, eigenvalue=0.0, converged=True, degenerate=True)

    # the floor of fraction*m, nudged so exact rationals like 3/13 survive
    # the float product (e.g. 13 * (3/13) = 2.999...)
    n_sel = max(1, math.floor(ens.m * cfg.i0_fraction + 1e-9))
    row_norms = np.linalg.norm(ens.rows, axis=1)
    stat = np.divide(ens.q, row_norms, out=np.zeros_like(ens.q), where=row_norms > 0)
    i0 = top_k_indices(stat, n_sel)

    b = ens.rows[i0][:, support]
    b_sq = (np.abs(b) ** 2).sum(axis=1)
    keep = b_sq > 0
    b = b[keep]
    weights = ens.q[i0][keep] ** cfg.init_weight_exponent / b_sq[keep]
    y_mat = ((weights[:, None] * b).T @ b.conj()) / ens.m

    v, lam, converged = leading_eigenvector(
        lambda w: y_mat @ w,
        dim=k_hat,
        iters=cfg.power_iters,
        tol=cfg.power_tol,
        seed=cfg.power_seed,
        mode=ens.mode,
    )
    z0[support] = lam0 * v
    return z0, InitInfo(support=support, eigenvalue=lam, converged=converged, degenerate=False)


def thresholded_step(
    z: np.ndarray, mu: float, ens: MeasurementEnsemble, cfg: SolverConfig
) -> tuple[np.ndarray, float, float]:
    """One iteration: gradient step, hard threshold, mu update.

    Returns (z_next, mu_next, grad_norm_at_z_next) where the gradient norm
    is evaluated at z_next with the incoming mu (the schedule test).
    Exactly one gradient evaluation at z and one at z_next.
    """
    k_hat = cfg.k_hat if cfg.k_hat is not None else ens.n
    z_next = hard_threshold(z - cfg.tau * smoothing.wirtinger_grad(z, ens, mu), k_hat)
    grad_norm = float(np.linalg.norm(smoothing.wirtinger_grad(z_next, ens, mu)))
    mu_next = mu if grad_norm >= cfg.gamma * mu else cfg.gamma1 * mu
    return z_next, mu_next, grad_norm


def solve(
    ens: MeasurementEnsemble,
    cfg: SolverConfig,
    truth: SparseSignal | None = None,
    z0: np.ndarray | None = None,
) -> SolverOutcome:
    """Run the smoothed solver for up to cfg.iterations steps.

    With truth supplied and stop_tol > 0 the loop exits early once the
    relative error drops below stop_tol (benchmark mode).  Blind mode runs
    the full horizon or until the gradient norm falls below grad_tol.
    A warm start z0 skips the spectral initialization.
    """
    cfg.validate(ens.n)
    if z0 is None:
        z, init_info = initialize(ens, cfg)
    else:
        z = np.array(z0, copy=True)
        init_info = InitInfo(
            support=np.flatnonzero(z), eigenvalue=math.nan, converged=True,
            degenerate=not np.any(z),
        )
    init_rel_err = relative_error(z, truth.vector) if truth is not None else math.nan

    trace = SolverTrace()
    mu = cfg.mu0
    converged_early = False
    iterations_run = 0
    for t in range(cfg.iterations):
        z, mu_next, grad_norm = thresholded_step(z, mu, ens, cfg)
        obj = smoothing.objective(z, ens, mu)
        rel = relative_error(z, truth.vector) if truth is not None else None
        trace.append(t + 1, mu, grad_norm, obj, rel)
        if mu_next != mu:
            trace.mu_reductions += 1
        mu = mu_next
        iterations_run = t + 1
        if truth is not None and cfg.stop_tol > 0 and rel < cfg.stop_tol:
            converged_early = True
            break
        if grad_norm < cfg.grad_tol:
            converged_early = True
            break

    return SolverOutcome(
        z_final=z,
        iterations_run=iterations_run,
        trace=trace,
        converged_early=converged_early,
        init_rel_err=init_rel_err,
        init_info=init_info,
        mu_final=mu,
        algorithm=SMOOTHED,
    )


def solve_baseline_mu0(
    ens: MeasurementEnsemble,
    cfg: SolverConfig,
    truth: SparseSignal | None = None,
    z0: np.ndarray | None = None,
) -> SolverOutcome:
    """Same loop with the un-smoothed mu = 0 gradient and no mu schedule."""
    cfg.validate(ens.n)
    k_hat = cfg.k_hat if cfg.k_hat is not None else ens.n
    if z0 is None:
        z, init_info = initialize(ens, cfg)
    else:
        z = np.array(z0, copy=True)
        init_info = InitInfo(
            support=np.flatnonzero(z), eigenvalue=math.nan, converged=True,
            degenerate=not np.any(z),
        )
    init_rel_err = relative_error(z, truth.vector) if truth is not None else math.nan

    trace = SolverTrace()
    converged_early = False
    iterations_run = 0
    zero_hits = 0
    for t in range(cfg.iterations):
        zero_hits += smoothing.count_zero_projections(z, ens)
        z = hard_threshold(z - cfg.tau * smoothing.baseline_grad_mu0(z, ens), k_hat)
        grad_norm = float(np.linalg.norm(smoothing.baseline_grad_mu0(z, ens)))
        obj = smoothing.amplitude_loss(z, ens)
        rel = relative_error(z, truth.vector) if truth is not None else None
        trace.append(t + 1, 0.0, grad_norm, obj, rel)
        iterations_run = t + 1
        if truth is not None and cfg.stop_tol > 0 and rel < cfg.stop_tol:
            converged_early = True
            break
        if grad_norm < cfg.grad_tol:
            converged_early = True
            break

    return SolverOutcome(
        z_final=z,
        iterations_run=iterations_run,
        trace=trace,
        converged_early=converged_early,
        init_rel_err=init_rel_err,
        init_info=init_info,
        mu_final=0.0,
        algorithm=BASELINE,
        zero_projection_hits=zero_hits,
    )


def run_algorithm(
    algorithm: str,
    ens: MeasurementEnsemble,
    cfg: SolverConfig,
    truth: SparseSignal | None = None,
) -> SolverOutcome:
    if algorithm == SMOOTHED:
        return solve(ens, cfg, truth)
    if algorithm == BASELINE:
        return solve_baseline_mu0(ens, cfg, truth)
    raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")


TRACE_COLUMNS = ("t", "mu", "grad_norm", "objective", "rel_err")


def write_trace_csv(path, outcome: SolverOutcome) -> None:
    """Dump the per-iteration trace with columns t,mu,grad_norm,objective,rel_err."""
    tr = outcome.trace
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for i in range(len(tr.t)):
            writer.writerow(
                [tr.t[i], repr(tr.mu[i]), repr(tr.grad_norm[i]),
                 repr(tr.objective[i]), repr(tr.rel_err[i])]
            )
