"""Smoothed amplitude objective and its Wirtinger gradient.

The non-smooth amplitude loss (1/m) * sum_i (|a_i^H z| - q_i)^2 is replaced
by the everywhere-smooth surrogate obtained from phi(x, mu) = sqrt(x^2 +
mu^2), which sits within mu of |x| uniformly.  For mu > 0 the gradient is
continuous everywhere, so no truncation of large per-measurement terms is
needed; the mu = 0 gradient (plain amplitude flow) is kept as a baseline
and exhibits the discontinuity at measurement zero crossings.
"""

from __future__ import annotations

import numpy as np

from .model import MeasurementEnsemble


def phi(x, mu):
    """Smooth absolute value sqrt(x^2 + mu^2); phi(x, 0) == |x|."""
    return np.hypot(x, mu)


def amplitude_loss(z: np.ndarray, ens: MeasurementEnsemble) -> float:
    """Non-smooth amplitude loss (1/m) * sum (|a_i^H z| - q_i)^2."""
    r = np.abs(ens.rows.conj() @ z) - ens.q
    return float(r @ r) / ens.m


def objective(z: np.ndarray, ens: MeasurementEnsemble, mu: float) -> float:
    """Smoothed loss (1/m) * sum (phi(|a_i^H z|, mu) - q_i)^2."""
    if z.shape[0] != ens.n:
        raise ValueError(f"dimension mismatch: z has {z.shape[0]}, rows have {ens.n}")
    r = phi(np.abs(ens.rows.conj() @ z), mu) - ens.q
    return float(r @ r) / ens.m


def wirtinger_grad(z: np.ndarray, ens: MeasurementEnsemble, mu: float) -> np.ndarray:
    """Wirtinger gradient of the smoothed loss.

    (2/m) * sum_i (s_i - q_i * s_i / sqrt(|s_i|^2 + mu^2)) * a_i with
    s_i = a_i^H z.  Defined for mu > 0 only; at mu = 0 the s_i = 0 terms
    would be discontinuous.  Real inputs give a real gradient (the plain
    gradient of the same loss over real vectors).
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive for the smoothed gradient, got {mu}")
    if z.shape[0] != ens.n:
        raise ValueError(f"dimension mismatch: z has {z.shape[0]}, rows have {ens.n}")
    s = ens.rows.conj() @ z
    r = s * (1.0 - ens.q / phi(np.abs(s), mu))
    return (2.0 / ens.m) * (r @ ens.rows)


def baseline_grad_mu0(z: np.ndarray, ens: MeasurementEnsemble) -> np.ndarray:
    """Un-smoothed amplitude-flow gradient (the mu = 0 limit).

    (2/m) * sum_i (1 - q_i / |s_i|) * s_i * a_i.  Terms with s_i = 0 are
    set to zero (the phase of 0 is taken as 0); count_zero_projections
    reports how many such terms an iterate hit.
    """
    if z.shape[0] != ens.n:
        raise ValueError(f"dimension mismatch: z has {z.shape[0]}, rows have {ens.n}")
    s = ens.rows.conj() @ z
    mag = np.abs(s)
    ratio = np.divide(ens.q, mag, out=np.zeros_like(mag), where=mag > 0)
    r = s * (1.0 - ratio)
    # s_i = 0 kills the whole term regardless of the ratio convention,
    # but 0 * nonfinite would leak NaN, hence the guarded divide above.
    return (2.0 / ens.m) * (r @ ens.rows)


def count_zero_projections(z: np.ndarray, ens: MeasurementEnsemble) -> int:
    """Number of measurements with a_i^H z exactly zero at this iterate."""
    return int(np.count_nonzero((ens.rows.conj() @ z) == 0))
