"""Field-generic vector kernels shared by the rest of the library.

Everything here works for both real (float64) and complex (complex128)
vectors.  Random generation is explicit-state: callers pass a seed or a
``numpy.random.Generator``, never a global stream, so parallel trials
cannot interleave.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

REAL = "real"
COMPLEX = "complex"

DEFAULT_POWER_ITERS = 200
DEFAULT_POWER_TOL = 1e-8


def check_mode(mode: str) -> str:
    if mode not in (REAL, COMPLEX):
        raise ValueError(f"mode must be '{REAL}' or '{COMPLEX}', got {mode!r}")
    return mode


def derive_seeds(*path) -> np.ndarray:
    """Derive independent 64-bit seeds from a tuple of integers.

    Uses numpy's splittable SeedSequence hash, so (base, cell, trial)
    paths give streams that are deterministic and collision-resistant
    across the whole experiment grid.
    """
    ss = np.random.SeedSequence(tuple(int(p) for p in path))
    return ss.generate_state(2, dtype=np.uint64)


def seeded_gaussian(shape, seed, mode: str = REAL) -> np.ndarray:
    """Deterministic standard Gaussian draw.

    Real mode: i.i.d. N(0,1) entries.  Complex mode: N(0,1/2) + j*N(0,1/2),
    i.e. unit variance per complex entry.  Identical (seed, shape, mode)
    reproduces identical output bit-for-bit.
    """
    rng = np.random.default_rng(seed)
    return gaussian(rng, shape, mode)


def gaussian(rng: np.random.Generator, shape, mode: str = REAL) -> np.ndarray:
    check_mode(mode)
    if mode == REAL:
        return rng.standard_normal(shape)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return np.sqrt(0.5) * (re + 1j * im)


def dist_mod_phase(w1: np.ndarray, w2: np.ndarray) -> float:
    """Euclidean distance modulo a global phase.

    Returns min over theta of ||w1*exp(-j*theta) - w2||_2.  For complex
    vectors this is the closed form sqrt(||w1||^2 + ||w2||^2 - 2|<w1,w2>|);
    for real vectors it reduces to min(||w1 - w2||, ||w1 + w2||).
    """
    w1 = np.asarray(w1)
    w2 = np.asarray(w2)
    if w1.shape != w2.shape:
        raise ValueError(f"length mismatch: {w1.shape} vs {w2.shape}")
    if np.isrealobj(w1) and np.isrealobj(w2):
        return float(min(np.linalg.norm(w1 - w2), np.linalg.norm(w1 + w2)))
    inner = np.vdot(w1, w2)
    sq = np.linalg.norm(w1) ** 2 + np.linalg.norm(w2) ** 2 - 2.0 * abs(inner)
    # roundoff can push the squared distance a hair below zero
    return float(np.sqrt(max(sq, 0.0)))


def relative_error(z: np.ndarray, x: np.ndarray) -> float:
    """dist_mod_phase(z, x) / ||x||_2 (the recovery error metric)."""
    nx = np.linalg.norm(x)
    if nx == 0:
        return float(np.linalg.norm(z))
    return dist_mod_phase(z, x) / float(nx)


def hard_threshold(u: np.ndarray, k: int) -> np.ndarray:
    """Keep the k entries of largest modulus, zero the rest.

    Ties are broken toward the lowest index so runs are reproducible.
    """
    u = np.asarray(u)
    n = u.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if k == n:
        return u.copy()
    # stable sort on descending modulus == lowest-index tie-break
    order = np.argsort(-np.abs(u), kind="stable")
    out = np.zeros_like(u)
    keep = order[:k]
    out[keep] = u[keep]
    return out


def top_k_indices(scores: np.ndarray, k: int) -> np.ndarray:
    """Sorted indices of the k largest scores, ties toward lowest index."""
    order = np.argsort(-np.asarray(scores), kind="stable")
    return np.sort(order[:k])


def leading_eigenvector(
    apply: Callable[[np.ndarray], np.ndarray],
    dim: int,
    iters: int = DEFAULT_POWER_ITERS,
    tol: float = DEFAULT_POWER_TOL,
    seed: int = 0,
    mode: str = REAL,
) -> tuple[np.ndarray, float, bool]:
    """Leading eigenpair of a Hermitian PSD linear map by power iteration.

    Starts from a deterministic seeded Gaussian vector and stops when the
    residual ||Y v - lam v|| <= tol * lam.  Returns (v, lam, converged)
    with v unit norm; on non-convergence the best iterate is returned with
    converged=False.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    v = seeded_gaussian(dim, seed, mode)
    nv = np.linalg.norm(v)
    if nv == 0:  # cannot happen for a Gaussian draw; belt and braces
        v = np.zeros(dim, dtype=v.dtype)
        v[0] = 1.0
    else:
        v = v / nv
    lam = 0.0
    for _ in range(iters):
        y = apply(v)
        lam = float(np.real(np.vdot(v, y)))
        if np.linalg.norm(y - lam * v) <= tol * lam:
            return v, lam, True
        ny = np.linalg.norm(y)
        if ny == 0:
            # v is in the nullspace of a PSD map => eigenvalue 0 reached
            return v, 0.0, True
        v = y / ny
    y = apply(v)
    lam = float(np.real(np.vdot(v, y)))
    converged = bool(np.linalg.norm(y - lam * v) <= tol * lam)
    return v, lam, converged
