import numpy as np
import pytest

from sparsepr.numerics import (
    derive_seeds,
    dist_mod_phase,
    gaussian,
    hard_threshold,
    leading_eigenvector,
    seeded_gaussian,
    top_k_indices,
)


class TestDistModPhase:
    def test_real_sign_flip_is_zero(self):
        assert dist_mod_phase(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == 0.0

    def test_global_phase_is_removed(self):
        rng = np.random.default_rng(0)
        w = gaussian(rng, 5, "complex")
        assert dist_mod_phase(1j * w, w) < 1e-12

    def test_orthogonal_real_pair(self):
        d = dist_mod_phase(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert d == pytest.approx(np.sqrt(2.0), abs=1e-15)

    def test_closed_form_matches_theta_grid(self):
        # brute-force minimization over 1e6 equally spaced phases
        rng = np.random.default_rng(1)
        w1 = gaussian(rng, 6, "complex")
        w2 = gaussian(rng, 6, "complex")
        theta = np.linspace(0.0, 2 * np.pi, 1_000_000, endpoint=False)
        inner = np.vdot(w1, w2)
        sq = (np.linalg.norm(w1) ** 2 + np.linalg.norm(w2) ** 2
              - 2 * np.real(np.exp(1j * theta) * inner))
        grid_min = np.sqrt(sq.min())
        assert dist_mod_phase(w1, w2) == pytest.approx(grid_min, abs=1e-9)

    def test_real_mode_equals_min_over_signs(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            w1 = rng.standard_normal(7)
            w2 = rng.standard_normal(7)
            expected = min(np.linalg.norm(w1 - w2), np.linalg.norm(w1 + w2))
            assert dist_mod_phase(w1, w2) == expected

    def test_metric_laws_on_random_triples(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            n = int(rng.integers(1, 8))
            w1, w2, w3 = (gaussian(rng, n, "complex") for _ in range(3))
            d12 = dist_mod_phase(w1, w2)
            assert d12 >= 0
            assert abs(d12 - dist_mod_phase(w2, w1)) < 1e-9
            theta = rng.uniform(0, 2 * np.pi)
            assert abs(d12 - dist_mod_phase(np.exp(1j * theta) * w1, w2)) < 1e-9
            assert d12 <= dist_mod_phase(w1, w3) + dist_mod_phase(w3, w2) + 1e-9

    def test_zero_iff_same_up_to_phase(self):
        rng = np.random.default_rng(4)
        w = gaussian(rng, 6, "complex")
        assert dist_mod_phase(np.exp(0.7j) * w, w) < 1e-12
        v = w + 0.1 * gaussian(rng, 6, "complex")
        assert dist_mod_phase(v, w) > 1e-3

    def test_length_mismatch_raises(self):
        with pytest.raises(ValueError, match="length mismatch"):
            dist_mod_phase(np.zeros(3), np.zeros(4))


class TestHardThreshold:
    def test_keeps_two_largest_magnitudes(self):
        u = np.array([3.0, -5.0, 1.0, 4.0])
        assert np.array_equal(hard_threshold(u, 2), np.array([0.0, -5.0, 0.0, 4.0]))

    def test_identity_when_already_sparse(self):
        u = np.array([0.0, 2.0, 0.0, -1.0])
        assert np.array_equal(hard_threshold(u, 3), u)

    def test_tie_broken_toward_lowest_index(self):
        assert np.array_equal(hard_threshold(np.array([2.0, 2.0]), 1),
                              np.array([2.0, 0.0]))

    def test_laws_on_random_vectors(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            n = int(rng.integers(2, 30))
            k = int(rng.integers(1, n + 1))
            u = gaussian(rng, n, "complex")
            v = hard_threshold(u, k)
            assert np.count_nonzero(v) <= k
            kept = np.abs(v[v != 0])
            dropped = np.abs(u[v == 0])
            if kept.size and dropped.size:
                assert kept.min() >= dropped.max()
            assert np.array_equal(hard_threshold(v, k), v)

    def test_permutation_equivariance_without_ties(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            n, k = 12, 4
            u = rng.standard_normal(n)
            perm = rng.permutation(n)
            assert np.array_equal(hard_threshold(u[perm], k), hard_threshold(u, k)[perm])

    def test_k_out_of_range_raises(self):
        with pytest.raises(ValueError, match="k must satisfy"):
            hard_threshold(np.ones(3), 0)
        with pytest.raises(ValueError, match="k must satisfy"):
            hard_threshold(np.ones(3), 4)


class TestTopKIndices:
    def test_ties_resolve_to_lowest_index(self):
        assert np.array_equal(top_k_indices(np.array([1.0, 1.0, 1.0]), 2), [0, 1])

    def test_plain_selection(self):
        assert np.array_equal(top_k_indices(np.array([0.1, 3.0, 2.0]), 2), [1, 2])


class TestLeadingEigenvector:
    def test_diagonal_map(self):
        d = np.array([2.0, 1.0])
        v, lam, ok = leading_eigenvector(lambda w: d * w, 2)
        assert ok
        assert lam == pytest.approx(2.0, abs=1e-7)
        assert dist_mod_phase(v, np.array([1.0, 0.0])) < 1e-6

    def test_identity_map_degenerate_spectrum(self):
        v, lam, ok = leading_eigenvector(lambda w: w, 3)
        assert ok
        assert lam == pytest.approx(1.0)
        assert np.linalg.norm(v) == pytest.approx(1.0)

    @pytest.mark.parametrize("mode", ["real", "complex"])
    def test_matches_dense_eigensolver(self, mode):
        rng = np.random.default_rng(7)
        b = gaussian(rng, (10, 5), mode)
        mat = b.conj().T @ b
        v, lam, ok = leading_eigenvector(
            lambda w: mat @ w, 5, iters=20_000, tol=1e-13, mode=mode)
        w, vecs = np.linalg.eigh(mat)
        assert ok
        assert lam == pytest.approx(w[-1], rel=1e-10)
        assert dist_mod_phase(v, vecs[:, -1]) < 1e-8

    def test_matches_oracle_up_to_dim_16(self):
        rng = np.random.default_rng(8)
        for dim in (2, 4, 8, 16):
            b = gaussian(rng, (3 * dim, dim), "complex")
            mat = b.conj().T @ b
            v, lam, ok = leading_eigenvector(
                lambda w: mat @ w, dim, iters=50_000, tol=1e-13, mode="complex")
            w, vecs = np.linalg.eigh(mat)
            assert ok
            assert dist_mod_phase(v, vecs[:, -1]) < 1e-8

    def test_nonconvergence_reports_flag(self):
        # nearly degenerate top eigenvalues cannot settle in 3 iterations
        d = np.array([1.0, 1.0 - 1e-9, 0.5])
        v, lam, ok = leading_eigenvector(lambda w: d * w, 3, iters=3, tol=1e-15)
        assert not ok
        assert np.linalg.norm(v) == pytest.approx(1.0)

    def test_bad_dim_raises(self):
        with pytest.raises(ValueError, match="dim"):
            leading_eigenvector(lambda w: w, 0)


class TestSeededGaussian:
    def test_determinism(self):
        a = seeded_gaussian((100,), 123, "complex")
        b = seeded_gaussian((100,), 123, "complex")
        assert np.array_equal(a, b)
        assert not np.array_equal(a, seeded_gaussian((100,), 124, "complex"))

    def test_complex_unit_variance(self):
        z = seeded_gaussian(100_000, 9, "complex")
        assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, rel=0.05)

    def test_real_mean_within_standard_error(self):
        z = seeded_gaussian(100_000, 10, "real")
        assert abs(np.mean(z)) < 3.0 / np.sqrt(100_000)

    def test_real_mode_is_real_dtype(self):
        assert seeded_gaussian(10, 1, "real").dtype == np.float64
        assert seeded_gaussian(10, 1, "complex").dtype == np.complex128

    def test_unknown_mode_raises(self):
        with pytest.raises(ValueError, match="mode"):
            seeded_gaussian(4, 0, "quaternion")


def test_derive_seeds_distinct_over_paths():
    seen = set()
    for cell in range(40):
        for trial in range(40):
            seen.add(tuple(derive_seeds(99, cell, trial)))
    assert len(seen) == 1600
