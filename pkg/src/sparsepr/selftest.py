"""Built-in invariant suite behind the `selftest` CLI command.

Each check is fast and deterministic; the whole suite runs in well under a
minute.  The pytest suite covers the same ground (and more) with frozen
oracle values; this module exists so an installed binary can vouch for
itself without a test checkout.
"""

from __future__ import annotations

import numpy as np

from . import smoothing
from .model import NoiseSpec, make_signal, measure
from .numerics import (
    dist_mod_phase,
    gaussian,
    hard_threshold,
    leading_eigenvector,
    seeded_gaussian,
)
from .solver import SolverConfig, solve


def check_smoothing_bound():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1e6, 1e6, 100_000)
    mu = rng.uniform(1e-9, 1e3, 100_000)
    gap = smoothing.phi(x, mu) - np.abs(x)
    assert np.all(gap >= 0) and np.all(gap <= mu), "phi must sit within mu above |x|"


def check_phi_values():
    assert smoothing.phi(-3.0, 0.0) == 3.0
    assert smoothing.phi(4.0, 3.0) == 5.0
    assert smoothing.phi(0.0, 2.5) == 2.5


def check_gradient_finite_differences():
    rng = np.random.default_rng(1)
    h = 1e-6
    for mode in ("real", "complex"):
        for _ in range(3):
            n, m = 6, 15
            x = make_signal(n, 3, seed=int(rng.integers(1 << 31)), mode=mode)
            ens = measure(x, m, seed=int(rng.integers(1 << 31)), mode=mode)
            mu = float(10 ** rng.uniform(-2, 1))
            z = gaussian(rng, n, mode)
            g = smoothing.wirtinger_grad(z, ens, mu)
            fd = np.zeros(n, dtype=g.dtype)
            for l in range(n):
                e = np.zeros(n, dtype=g.dtype)
                e[l] = h
                d_re = (smoothing.objective(z + e, ens, mu)
                        - smoothing.objective(z - e, ens, mu)) / (2 * h)
                fd[l] = d_re
                if mode == "complex":
                    d_im = (smoothing.objective(z + 1j * e, ens, mu)
                            - smoothing.objective(z - 1j * e, ens, mu)) / (2 * h)
                    fd[l] += 1j * d_im
            rel = np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-12)
            assert rel < 1e-6, f"gradient mismatch {rel:.2e} ({mode})"


def check_mu_limit_slope():
    rng = np.random.default_rng(2)
    x = make_signal(8, 3, seed=30, mode="complex")
    ens = measure(x, 20, seed=31, mode="complex")
    z = gaussian(rng, 8, "complex")
    while np.min(np.abs(ens.rows.conj() @ z)) < 0.3:
        z = gaussian(rng, 8, "complex")
    mus = np.array([1e-2, 1e-3, 1e-4])
    errs = [
        np.linalg.norm(smoothing.wirtinger_grad(z, ens, mu)
                       - smoothing.baseline_grad_mu0(z, ens))
        for mu in mus
    ]
    slope = np.polyfit(np.log(mus), np.log(errs), 1)[0]
    assert slope >= 1.8, f"mu->0 decay slope {slope:.3f} below quadratic"


def check_metric_laws():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        w1 = gaussian(rng, n, "complex")
        w2 = gaussian(rng, n, "complex")
        w3 = gaussian(rng, n, "complex")
        theta = rng.uniform(0, 2 * np.pi)
        d12 = dist_mod_phase(w1, w2)
        assert abs(d12 - dist_mod_phase(w2, w1)) < 1e-9
        assert abs(d12 - dist_mod_phase(np.exp(1j * theta) * w1, w2)) < 1e-9
        assert d12 <= dist_mod_phase(w1, w3) + dist_mod_phase(w3, w2) + 1e-9
    assert dist_mod_phase(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == 0.0


def check_threshold_laws():
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(2, 40))
        k = int(rng.integers(1, n + 1))
        u = gaussian(rng, n, "complex")
        v = hard_threshold(u, k)
        kept = np.abs(v[v != 0])
        dropped = np.abs(u[v == 0])
        assert np.count_nonzero(v) <= k
        if kept.size and dropped.size:
            assert kept.min() >= dropped.max()
        assert np.array_equal(hard_threshold(v, k), v)
    assert np.array_equal(hard_threshold(np.array([2.0, 2.0]), 1), np.array([2.0, 0.0]))


def check_power_iteration():
    rng = np.random.default_rng(5)
    b = rng.standard_normal((12, 6))
    mat = b.T @ b
    v, lam, converged = leading_eigenvector(lambda w: mat @ w, 6, iters=5000, tol=1e-12)
    w, vecs = np.linalg.eigh(mat)
    assert converged
    assert abs(lam - w[-1]) < 1e-8 * w[-1]
    assert dist_mod_phase(v, vecs[:, -1]) < 1e-6


def check_rng_contract():
    a = seeded_gaussian(1000, 42, "complex")
    b = seeded_gaussian(1000, 42, "complex")
    assert np.array_equal(a, b), "seeded draws must be bit-identical"
    big = seeded_gaussian(100_000, 43, "complex")
    var = np.mean(np.abs(big) ** 2)
    assert abs(var - 1.0) < 0.05, f"complex variance {var:.3f} off unit"


def check_snr_calibration():
    x = make_signal(32, 4, seed=50)
    ens = measure(x, 10_000, seed=51, noise=NoiseSpec(snr_db=30.0))
    resid = ens.q - ens.clean_amplitudes
    snr = 10 * np.log10((ens.clean_amplitudes @ ens.clean_amplitudes) / (resid @ resid))
    assert abs(snr - 30.0) < 0.5, f"empirical SNR {snr:.2f} dB"


def check_end_to_end():
    x = make_signal(32, 3, seed=60)
    ens = measure(x, 256, seed=61)
    out = solve(ens, SolverConfig(k_hat=3), truth=x)
    assert out.final_rel_err < 1e-5, f"recovery failed: {out.final_rel_err:.2e}"
    mu = np.asarray(out.trace.mu)
    assert np.all(mu > 0) and np.all(np.diff(mu) <= 0)
    assert np.count_nonzero(out.z_final) <= 3


CHECKS = (
    ("smoothing bound", check_smoothing_bound),
    ("phi values", check_phi_values),
    ("gradient vs finite differences", check_gradient_finite_differences),
    ("mu->0 quadratic limit", check_mu_limit_slope),
    ("phase-distance metric laws", check_metric_laws),
    ("hard-threshold laws", check_threshold_laws),
    ("power iteration vs dense eigensolver", check_power_iteration),
    ("seeded RNG contract", check_rng_contract),
    ("noise SNR calibration", check_snr_calibration),
    ("end-to-end recovery", check_end_to_end),
)


def run_selftest() -> int:
    """Run all checks; print one line each; return the number of failures."""
    failures = 0
    for name, fn in CHECKS:
        try:
            fn()
        except AssertionError as exc:
            failures += 1
            print(f"FAIL  {name}: {exc}")
        else:
            print(f"PASS  {name}")
    print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return failures
