"""Figure rendering for sweep, noise, reconstruction, and trace outputs.

Every report the CLI writes as CSV can also be rendered to a PNG next to
it.  Rendering is file-based (Agg backend); nothing here opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import ReconstructionDump, SweepResult
from .solver import SolverOutcome

FIGSIZE = (6.4, 4.0)
DPI = 120


def save_figure(fig, path) -> None:
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def sweep_figure(result: SweepResult):
    """Success rate versus m/n, one line per sparsity budget."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    summaries = result.summaries()
    k_hats = sorted({s.k_hat for s in summaries})
    for k_hat in k_hats:
        pts = [(s.m_over_n, s.success_rate) for s in summaries if s.k_hat == k_hat]
        pts.sort()
        label = f"k_hat={k_hat}" if len(k_hats) > 1 else result.spec.algorithm
        ax.plot(*zip(*pts), marker="o", label=label)
    ax.set_xlabel("m/n")
    ax.set_ylabel("empirical success rate")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    ax.set_title(f"{result.spec.mode} mode, n={result.spec.n}, "
                 f"k={result.spec.true_k}, {result.spec.trials} trials/cell")
    return fig


def noise_figure(result: SweepResult):
    """Mean and median relative error versus SNR (log error axis)."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    summaries = [s for s in result.summaries() if s.snr_db is not None]
    summaries.sort(key=lambda s: s.snr_db)
    snr = [s.snr_db for s in summaries]
    ax.semilogy(snr, [s.mean_rel_err for s in summaries], marker="o", label="mean")
    ax.semilogy(snr, [s.median_rel_err for s in summaries], marker="s", label="median")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("relative error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    ax.set_title(f"{result.spec.mode} mode, n={result.spec.n}, "
                 f"k={result.spec.true_k}, {result.spec.trials} trials/point")
    return fig


def reconstruction_figure(dump: ReconstructionDump):
    """Stem plots of truth and both reconstructions (moduli for complex)."""
    fig, axes = plt.subplots(3, 1, figsize=(6.4, 7.2), sharex=True)
    panels = (
        ("truth", dump.truth),
        (f"smoothed (rel err {dump.smoothed_rel_err:.2e})", dump.smoothed),
        (f"baseline (rel err {dump.baseline_rel_err:.2e})", dump.baseline),
    )
    for ax, (title, vec) in zip(axes, panels):
        values = vec.real if np.isrealobj(dump.truth) else np.abs(vec)
        ax.stem(np.arange(len(values)), values, markerfmt=" ", basefmt="k-")
        ax.set_title(title, fontsize=10)
        ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel("index")
    fig.tight_layout()
    return fig


def trace_figure(outcome: SolverOutcome):
    """Relative error, gradient norm, and mu along the iterations."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    tr = outcome.trace
    t = np.asarray(tr.t)
    if not np.all(np.isnan(tr.rel_err)):
        ax.semilogy(t, tr.rel_err, label="relative error")
    ax.semilogy(t, tr.grad_norm, label="gradient norm")
    if outcome.algorithm == "smoothed":
        ax.semilogy(t, tr.mu, label="mu", linestyle="--")
    ax.set_xlabel("iteration")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    ax.set_title(f"{outcome.algorithm} run: {outcome.iterations_run} iterations")
    return fig
