import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from mwgsp.eigen import symmetric_eig
from mwgsp.errors import InvalidArgumentError, NumericalFailure
from mwgsp.graph import Graph, laplacian, path_graph, ring_graph
from mwgsp.spectral import (
    apply_spectral_filter,
    dft_matrix,
    eigendecompose,
    gft,
    igft,
    laplacian_eigenmap,
)


def random_laplacian(rng, n, density=0.6):
    w = rng.uniform(0.1, 3.0, (n, n)) * (rng.uniform(size=(n, n)) < density)
    w = np.triu(w, 1)
    return laplacian(Graph.from_dense(w + w.T))


def connected_laplacian(rng, n):
    # a random graph plus a path keeps it connected
    w = np.triu(rng.uniform(0, 1, (n, n)) * (rng.uniform(size=(n, n)) < 0.3), 1)
    w = w + w.T + path_graph(n).dense()
    return laplacian(Graph.from_dense(w))


class TestEigensolver:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 100_000), st.integers(1, 40))
    def test_invariants_against_dense_oracle(self, seed, n):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((n, n))
        a = a + a.T
        vals, vecs = symmetric_eig(a)
        assert np.all(np.diff(vals) >= 0)
        np.testing.assert_allclose(vals, np.linalg.eigvalsh(a), atol=1e-10 * max(1, np.abs(a).max()))
        assert np.abs(vecs.T @ vecs - np.eye(n)).max() <= 1e-9
        assert np.abs(a - vecs @ np.diag(vals) @ vecs.T).max() <= 1e-8 * max(1, np.abs(a).max())

    def test_sign_convention(self):
        rng = np.random.default_rng(7)
        lap = random_laplacian(rng, 12)
        _, vecs = symmetric_eig(lap)
        for col in vecs.T:
            k = int(np.argmax(np.abs(col)))
            assert col[k] > 0

    def test_deterministic(self):
        lap = random_laplacian(np.random.default_rng(8), 15)
        a, b = symmetric_eig(lap), symmetric_eig(lap)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_moderate_size(self):
        lap = random_laplacian(np.random.default_rng(9), 300, density=0.05)
        vals, vecs = symmetric_eig(lap)
        assert np.abs(lap - (vecs * vals) @ vecs.T).max() <= 1e-8 * max(1, np.abs(lap).max())

    def test_sparse_input(self):
        lap = laplacian(ring_graph(6), sparse=True)
        np.testing.assert_allclose(symmetric_eig(lap)[0], np.linalg.eigvalsh(lap.toarray()), atol=1e-12)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidArgumentError):
            symmetric_eig(np.array([[0.0, np.inf], [np.inf, 0.0]]))

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidArgumentError):
            symmetric_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(InvalidArgumentError):
            symmetric_eig(np.zeros((2, 3)))


class TestEigendecompose:
    def test_path_two(self):
        es = eigendecompose(laplacian(path_graph(2)))
        np.testing.assert_allclose(es.eigenvalues, [0, 2], atol=1e-14)
        s = 1 / np.sqrt(2)
        np.testing.assert_allclose(np.abs(es.eigenvectors[:, 0]), [s, s], atol=1e-14)
        v1 = es.eigenvectors[:, 1]
        assert np.allclose(v1, [s, -s]) or np.allclose(v1, [-s, s])

    def test_zero_matrix(self):
        es = eigendecompose(np.zeros((4, 4)))
        np.testing.assert_array_equal(es.eigenvalues, 0)
        np.testing.assert_allclose(es.eigenvectors @ es.eigenvectors.T, np.eye(4), atol=1e-14)

    def test_ring_four(self):
        es = eigendecompose(laplacian(ring_graph(4)))
        np.testing.assert_allclose(es.eigenvalues, [0, 2, 2, 4], atol=1e-12)

    def test_connected_dc(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            n = int(rng.integers(2, 20))
            es = eigendecompose(connected_laplacian(rng, n))
            assert abs(es.eigenvalues[0]) <= 1e-8
            np.testing.assert_allclose(np.abs(es.eigenvectors[:, 0]), 1 / np.sqrt(n), atol=1e-6)

    def test_immutable(self):
        es = eigendecompose(laplacian(path_graph(3)))
        with pytest.raises(ValueError):
            es.eigenvalues[0] = 1.0


class TestGft:
    def setup_method(self):
        self.rng = np.random.default_rng(11)
        self.n = 9
        self.lap = connected_laplacian(self.rng, self.n)
        self.es = eigendecompose(self.lap)

    def test_eigenvector_to_impulse(self):
        np.testing.assert_allclose(gft(self.es, self.es.eigenvectors[:, 3]), np.eye(self.n)[3], atol=1e-12)

    def test_zero(self):
        np.testing.assert_array_equal(gft(self.es, np.zeros(self.n)), 0)
        np.testing.assert_array_equal(igft(self.es, np.zeros(self.n)), 0)

    def test_constant(self):
        c = 2.5
        out = gft(self.es, np.full(self.n, c))
        assert abs(out[0]) == pytest.approx(c * np.sqrt(self.n))
        np.testing.assert_allclose(out[1:], 0, atol=1e-10)

    def test_dc_impulse(self):
        out = igft(self.es, np.eye(self.n)[0])
        np.testing.assert_allclose(np.abs(out), 1 / np.sqrt(self.n), atol=1e-10)

    def test_parseval_and_round_trip(self):
        for _ in range(100):
            f = self.rng.standard_normal(self.n)
            fh = gft(self.es, f)
            assert np.linalg.norm(fh) == pytest.approx(np.linalg.norm(f), rel=1e-10)
            assert np.abs(igft(self.es, fh) - f).max() <= 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            gft(self.es, np.ones(self.n + 1))
        with pytest.raises(InvalidArgumentError):
            igft(self.es, np.ones(self.n - 1))


class TestSpectralFilter:
    def setup_method(self):
        self.rng = np.random.default_rng(12)
        self.lap = connected_laplacian(self.rng, 8)
        self.es = eigendecompose(self.lap)
        self.f = self.rng.standard_normal(8)

    def test_identity(self):
        out = apply_spectral_filter(self.es, lambda lam: np.ones_like(lam), self.f)
        np.testing.assert_allclose(out, self.f, atol=1e-9)

    def test_linear_is_laplacian(self):
        out = apply_spectral_filter(self.es, lambda lam: lam, self.f)
        np.testing.assert_allclose(out, self.lap @ self.f, atol=1e-8)

    def test_heat_limit_is_mean(self):
        es = eigendecompose(laplacian(path_graph(5)))
        f = self.rng.standard_normal(5)
        out = apply_spectral_filter(es, lambda lam: np.exp(-1e4 * lam), f)
        np.testing.assert_allclose(out, np.full(5, f.mean()), atol=1e-6)

    def test_composition(self):
        h1 = lambda lam: np.exp(-0.3 * lam)
        h2 = lambda lam: 1 / (1 + lam)
        both = apply_spectral_filter(self.es, lambda lam: h1(lam) * h2(lam), self.f)
        seq = apply_spectral_filter(self.es, h2, apply_spectral_filter(self.es, h1, self.f))
        np.testing.assert_allclose(both, seq, atol=1e-9)

    def test_non_finite_response_names_eigenvalue(self):
        with pytest.raises(NumericalFailure, match="eigenvalue"):
            apply_spectral_filter(self.es, lambda lam: np.where(lam > 0.5, 1.0, np.nan), self.f)

    @pytest.mark.parametrize("n", [3, 4, 5, 8, 13, 32])
    def test_ring_matches_dft_projector(self, n):
        es = eigendecompose(laplacian(ring_graph(n)))
        u = dft_matrix(n)
        lam_ring = 2 - 2 * np.cos(2 * np.pi * np.arange(n) / n)
        rng = np.random.default_rng(n)
        f = rng.standard_normal(n)
        for h in (lambda lam: np.exp(-0.7 * lam), lambda lam: (lam <= 1.5).astype(float), lambda lam: np.cos(lam) + lam ** 2):
            expected = (u @ (h(lam_ring) * (u.conj().T @ f))).real
            np.testing.assert_allclose(apply_spectral_filter(es, h, f), expected, atol=1e-8)


class TestDft:
    def test_one(self):
        np.testing.assert_array_equal(dft_matrix(1), [[1]])

    def test_two(self):
        np.testing.assert_allclose(dft_matrix(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 7, 16, 31, 64])
    def test_unitary(self, n):
        u = dft_matrix(n)
        assert np.abs(u.conj().T @ u - np.eye(n)).max() <= 1e-10

    def test_matches_numpy_fft(self):
        x = np.random.default_rng(0).standard_normal(10)
        np.testing.assert_allclose(dft_matrix(10) @ x, np.fft.fft(x, norm="ortho"), atol=1e-12)


class TestEigenmap:
    def test_fiedler_monotone(self):
        emb = laplacian_eigenmap(eigendecompose(laplacian(path_graph(3))), 1)[:, 0]
        d = np.diff(emb)
        assert np.all(d > 0) or np.all(d < 0)

    def test_columns_orthonormal(self):
        es = eigendecompose(connected_laplacian(np.random.default_rng(13), 10))
        emb = laplacian_eigenmap(es, 4)
        np.testing.assert_allclose(emb.T @ emb, np.eye(4), atol=1e-10)
        np.testing.assert_array_equal(emb, es.eigenvectors[:, 1:5])

    def test_ring_circle(self):
        emb = laplacian_eigenmap(eigendecompose(laplacian(ring_graph(8))), 2)
        r2 = (emb ** 2).sum(axis=1)
        np.testing.assert_allclose(r2, 2 / 8, atol=1e-6)  # radius 1/2
        np.testing.assert_allclose(np.sqrt(r2), 0.5, atol=1e-6)

    def test_d_too_large(self):
        with pytest.raises(InvalidArgumentError):
            laplacian_eigenmap(eigendecompose(laplacian(path_graph(3))), 3)


def test_sparse_laplacian_decomposes():
    es = eigendecompose(sp.csr_array(laplacian(path_graph(4))))
    np.testing.assert_allclose(es.eigenvalues, 2 - 2 * np.cos(np.pi * np.arange(4) / 4), atol=1e-12)
