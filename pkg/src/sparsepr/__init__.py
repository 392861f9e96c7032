"""Sparse phase retrieval from magnitude-only Gaussian measurements.

A smoothed amplitude-flow solver with hard thresholding and an annealed
smoothing parameter, plus a Monte-Carlo benchmark harness and CLI.
"""

from .model import (
    MeasurementEnsemble,
    NoiseSpec,
    SparseSignal,
    load_ensemble,
    load_signal,
    make_signal,
    measure,
    save_ensemble,
    save_signal,
)
from .numerics import (
    dist_mod_phase,
    hard_threshold,
    leading_eigenvector,
    relative_error,
    seeded_gaussian,
)
from .smoothing import (
    amplitude_loss,
    baseline_grad_mu0,
    objective,
    phi,
    wirtinger_grad,
)
from .solver import (
    SolverConfig,
    SolverOutcome,
    SolverTrace,
    estimate_support,
    initialize,
    solve,
    solve_baseline_mu0,
    thresholded_step,
)

__version__ = "0.1.0"

__all__ = [
    "MeasurementEnsemble",
    "NoiseSpec",
    "SolverConfig",
    "SolverOutcome",
    "SolverTrace",
    "SparseSignal",
    "amplitude_loss",
    "baseline_grad_mu0",
    "dist_mod_phase",
    "estimate_support",
    "hard_threshold",
    "initialize",
    "leading_eigenvector",
    "load_ensemble",
    "load_signal",
    "make_signal",
    "measure",
    "objective",
    "phi",
    "relative_error",
    "save_ensemble",
    "save_signal",
    "seeded_gaussian",
    "solve",
    "solve_baseline_mu0",
    "thresholded_step",
    "wirtinger_grad",
]
