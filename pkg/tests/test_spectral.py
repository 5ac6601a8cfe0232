"""Eigenbasis computation: analytic spectra, invariants, cache format."""

import numpy as np
import pytest

from wavemetric import (
    AffinityConfig,
    DisconnectedGraphError,
    LaplacianSpec,
    PointCloud,
    ValidationError,
    WeightedGraph,
    build_affinity,
    compute_basis,
    laplacian,
    spectral_gap,
)
from wavemetric.spectral import basis_cache_key, load_basis, save_basis

SQ2 = np.sqrt(2.0)


def _unnorm(weights):
    return laplacian(WeightedGraph(weights), LaplacianSpec("unnormalized"))


def _random_graph(seed, n=15):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((n, 3))
    return build_affinity(PointCloud(pts), AffinityConfig(epsilon=2.0))


class TestAnalyticSpectra:
    def test_two_vertex_graph(self):
        # 2x2 diagonalization by hand: mu = {0, 2}, phi = (1,1)/sqrt2, (1,-1)/sqrt2
        basis = compute_basis(_unnorm(np.array([[0.0, 1.0], [1.0, 0.0]])), 2)
        np.testing.assert_allclose(basis.mu, [0.0, 2.0], atol=1e-14)
        np.testing.assert_allclose(basis.lam, [0.0, SQ2], atol=1e-14)
        np.testing.assert_allclose(basis.phi[:, 0], [1 / SQ2, 1 / SQ2], atol=1e-14)
        # sign convention: tie on magnitudes -> lowest index positive
        np.testing.assert_allclose(basis.phi[:, 1], [1 / SQ2, -1 / SQ2], atol=1e-14)

    def test_path_graph_p3(self):
        w = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        basis = compute_basis(_unnorm(w), 3)
        np.testing.assert_allclose(basis.mu, [0.0, 1.0, 3.0], atol=1e-12)

    def test_complete_graph_k3(self):
        w = np.ones((3, 3)) - np.eye(3)
        basis = compute_basis(_unnorm(w), 3)
        np.testing.assert_allclose(basis.mu, [0.0, 3.0, 3.0], atol=1e-12)
        np.testing.assert_allclose(spectral_gap(basis), np.sqrt(3.0), rtol=1e-12)

    @pytest.mark.parametrize("seed", [0, 3, 11])
    def test_connected_graph_single_zero_mode(self, seed):
        g = _random_graph(seed)
        basis = compute_basis(laplacian(g), g.n)
        assert np.sum(np.abs(basis.mu) <= 1e-8) == 1
        phi0 = basis.phi[:, 0]
        assert np.all(phi0 > 0) or np.all(phi0 < 0)


class TestInvariants:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    @pytest.mark.parametrize("variant", ["unnormalized", "symmetric"])
    def test_residual_and_orthonormality(self, seed, variant):
        g = _random_graph(seed)
        L = laplacian(g, LaplacianSpec(variant))
        basis = compute_basis(L, 8)
        resid = np.linalg.norm(L @ basis.phi - basis.phi * basis.mu[None, :], axis=0)
        assert np.all(resid <= 1e-8 * np.maximum(1.0, basis.mu))
        gram = basis.phi.T @ basis.phi
        assert np.max(np.abs(gram - np.eye(8))) <= 1e-10

    def test_eigenvalue_ordering_and_clamp(self):
        g = _random_graph(5)
        basis = compute_basis(laplacian(g), g.n)
        assert np.all(np.diff(basis.mu) >= 0)
        assert np.all(basis.mu >= 0)
        assert basis.mu[0] == 0.0  # clamped exactly
        assert basis.lam[0] == 0.0
        np.testing.assert_array_equal(basis.lam, np.sqrt(basis.mu))

    def test_determinism(self):
        L = laplacian(_random_graph(9))
        b1 = compute_basis(L, 6)
        b2 = compute_basis(L, 6)
        assert np.max(np.abs(b1.mu - b2.mu)) <= 1e-12
        np.testing.assert_array_equal(b1.phi, b2.phi)

    def test_sign_convention(self):
        basis = compute_basis(_unnorm(np.array([[0.0, 1.0], [1.0, 0.0]])), 2)
        for j in range(basis.N):
            col = basis.phi[:, j]
            assert col[np.argmax(np.abs(col))] > 0


class TestIterativeSolver:
    def test_matches_dense(self):
        g = _random_graph(2, n=60)
        L = laplacian(g)
        dense = compute_basis(L, 6, method="dense")
        iterative = compute_basis(L, 6, method="iterative")
        np.testing.assert_allclose(iterative.mu, dense.mu, atol=1e-9)
        # compare one-dimensional eigenspaces (spectrum is simple here)
        gaps = np.diff(dense.mu)
        for j in range(6):
            simple = (j == 0 or gaps[j - 1] > 1e-6) and (j == 5 or gaps[j] > 1e-6)
            if simple:
                dot = abs(np.dot(iterative.phi[:, j], dense.phi[:, j]))
                assert dot > 1 - 1e-8

    def test_iterative_determinism(self):
        L = laplacian(_random_graph(8, n=40))
        b1 = compute_basis(L, 5, method="iterative")
        b2 = compute_basis(L, 5, method="iterative")
        np.testing.assert_array_equal(b1.phi, b2.phi)


class TestSpectralGap:
    def test_two_vertex_gap(self):
        basis = compute_basis(_unnorm(np.array([[0.0, 1.0], [1.0, 0.0]])), 2)
        np.testing.assert_allclose(spectral_gap(basis), SQ2, rtol=1e-12)

    def test_disjoint_edges_disconnected(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 1.0
        w[2, 3] = w[3, 2] = 1.0
        basis = compute_basis(_unnorm(w), 4)
        with pytest.raises(DisconnectedGraphError):
            spectral_gap(basis)

    def test_needs_two_modes(self):
        basis = compute_basis(_unnorm(np.array([[0.0, 1.0], [1.0, 0.0]])), 1)
        with pytest.raises(ValidationError):
            spectral_gap(basis)


class TestValidation:
    def test_n_too_large(self):
        L = _unnorm(np.array([[0.0, 1.0], [1.0, 0.0]]))
        with pytest.raises(ValidationError):
            compute_basis(L, 3)

    def test_non_symmetric_rejected(self):
        L = np.array([[1.0, -1.0], [0.5, 1.0]])
        with pytest.raises(ValidationError, match="symmetric"):
            compute_basis(L, 2)


class TestCache:
    def test_roundtrip(self, tmp_path):
        g = _random_graph(4)
        basis = compute_basis(laplacian(g), 7)
        path = tmp_path / "basis.bin"
        save_basis(path, basis)
        back = load_basis(path)
        np.testing.assert_array_equal(back.mu, basis.mu)
        np.testing.assert_array_equal(back.phi, basis.phi)
        np.testing.assert_array_equal(back.lam, basis.lam)

    def test_cache_key_sensitivity(self):
        g = _random_graph(4)
        L = laplacian(g)
        key = basis_cache_key(L, 5, "symmetric")
        assert key != basis_cache_key(L, 6, "symmetric")
        assert key != basis_cache_key(L, 5, "unnormalized")
        assert key == basis_cache_key(L.copy(), 5, "symmetric")
