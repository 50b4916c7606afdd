import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mwgsp.errors import InvalidArgumentError, NumericalFailure
from mwgsp.filters import (
    FilterKind,
    apply_filter,
    apply_joint_filter,
    apply_nonseparable_filter,
    apply_separable_filter,
    chebyshev_coefficients,
    chebyshev_filter,
    gershgorin_bound,
    heat,
    ideal_lowpass,
    joint_heat,
    parse_filter_spec,
    polynomial,
    sampled,
)
from mwgsp.graph import Graph, laplacian, path_graph, ring_graph
from mwgsp.product import kron_sum_matvec, product_eigensystem
from mwgsp.spectral import eigendecompose
from mwgsp.tensor import vec


def random_graph(rng, n, density=0.6):
    w = rng.uniform(0.1, 2.0, (n, n)) * (rng.uniform(size=(n, n)) < density)
    w = np.triu(w, 1)
    return Graph.from_dense(w + w.T)


def random_product(rng, dims):
    laps = [laplacian(random_graph(rng, n)) for n in dims]
    return laps, [eigendecompose(l) for l in laps]


def dense_function_of(mat, h):
    # dense oracle: spectral calculus through numpy's eigh
    vals, vecs = np.linalg.eigh(mat)
    return (vecs * h(vals)) @ vecs.T


def explicit_kron_sum(mats):
    dims = [m.shape[0] for m in mats]
    total = np.zeros((int(np.prod(dims)),) * 2)
    for k, a in enumerate(mats):
        total += np.kron(np.kron(np.eye(int(np.prod(dims[k + 1:]))), a), np.eye(int(np.prod(dims[:k]))))
    return total


class TestJoint:
    def test_identity(self):
        rng = np.random.default_rng(0)
        _, eigs = random_product(rng, (3, 4))
        t = rng.standard_normal((3, 4))
        out = apply_joint_filter(product_eigensystem(eigs), lambda lam: np.ones_like(lam), t)
        np.testing.assert_allclose(out, t, atol=1e-9)

    def test_linear_is_kron_sum(self):
        laps = [laplacian(path_graph(2))] * 2
        spec = product_eigensystem([eigendecompose(l) for l in laps])
        t = np.random.default_rng(1).standard_normal((2, 2))
        np.testing.assert_allclose(apply_joint_filter(spec, lambda lam: lam, t), kron_sum_matvec(laps, t), atol=1e-9)

    def test_matches_dense_function(self):
        rng = np.random.default_rng(2)
        laps, eigs = random_product(rng, (3, 2, 4))
        t = rng.standard_normal((3, 2, 4))
        h = lambda lam: 1 / (1 + lam)
        expected = dense_function_of(explicit_kron_sum(laps), h) @ vec(t)
        np.testing.assert_allclose(vec(apply_joint_filter(product_eigensystem(eigs), h, t)), expected, atol=1e-10)

    def test_joint_heat_equals_separable_heat(self):
        rng = np.random.default_rng(3)
        _, eigs = random_product(rng, (3, 4, 2))
        t = rng.standard_normal((3, 4, 2))
        a = apply_filter(joint_heat(0.7), eigs, t)
        b = apply_filter(heat([0.7, 0.7, 0.7]), eigs, t)
        np.testing.assert_allclose(a, b, atol=1e-10)


class TestSeparable:
    def test_lowpass_dc_gives_grand_mean(self):
        rng = np.random.default_rng(4)
        eigs = [eigendecompose(laplacian(path_graph(n))) for n in (3, 4)]
        t = rng.standard_normal((3, 4))
        dc = lambda lam: (np.abs(lam) <= 1e-9).astype(float)
        out = apply_separable_filter(eigs, [dc, dc], t)
        np.testing.assert_allclose(out, np.full((3, 4), t.mean()), atol=1e-12)

    def test_matches_kron_oracle(self):
        rng = np.random.default_rng(5)
        laps, eigs = random_product(rng, (3, 4))
        h1 = lambda lam: np.exp(-0.4 * lam)
        h2 = lambda lam: 1 / (1 + lam ** 2)
        t = rng.standard_normal((3, 4))
        big = np.kron(dense_function_of(laps[1], h2), dense_function_of(laps[0], h1))
        np.testing.assert_allclose(vec(apply_separable_filter(eigs, [h1, h2], t)), big @ vec(t), atol=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 100_000), st.lists(st.integers(2, 4), min_size=1, max_size=3))
    def test_sequential_equals_joint_product_response(self, seed, dims):
        rng = np.random.default_rng(seed)
        _, eigs = random_product(rng, dims)
        taus = rng.uniform(0.1, 2.0, len(dims))
        hs = [lambda lam, a=a: np.exp(-a * lam) / (1 + lam) for a in taus]
        t = rng.standard_normal(dims)
        seq = apply_separable_filter(eigs, hs, t)
        joint = apply_nonseparable_filter(eigs, lambda *ls: np.prod([h(l) for h, l in zip(hs, ls)], axis=0), t)
        np.testing.assert_allclose(seq, joint, atol=1e-9)
        order = list(rng.permutation(len(dims)) + 1)
        np.testing.assert_allclose(apply_separable_filter(eigs, hs, t, order=order), seq, atol=1e-10)

    def test_wrong_count(self):
        eigs = [eigendecompose(laplacian(path_graph(2)))] * 2
        with pytest.raises(InvalidArgumentError):
            apply_separable_filter(eigs, [None], np.zeros((2, 2)))


class TestNonseparable:
    def test_product_reduces_to_separable(self):
        rng = np.random.default_rng(6)
        _, eigs = random_product(rng, (3, 3))
        h1 = lambda lam: np.exp(-lam)
        h2 = lambda lam: np.cos(lam)
        t = rng.standard_normal((3, 3))
        a = apply_nonseparable_filter(eigs, lambda l1, l2: h1(l1) * h2(l2), t)
        b = apply_separable_filter(eigs, [h1, h2], t)
        np.testing.assert_allclose(a, b, atol=1e-10)

    def test_wave_response_not_separable(self):
        eigs = [eigendecompose(laplacian(path_graph(3)))] * 2
        s = 1.3
        h = lambda l1, l2: np.cos(np.sqrt(np.maximum(l1 + l2, 0)) * s)
        grid = h(*np.meshgrid(eigs[0].eigenvalues, eigs[1].eigenvalues, indexing="ij"))
        # a separable response grid is an outer product, rank one
        assert np.linalg.matrix_rank(grid, tol=1e-8) > 1
        # and the filter output differs from the best rank-one surrogate
        u, sv, vt = np.linalg.svd(grid)
        best = np.outer(u[:, 0] * sv[0], vt[0])
        t = np.random.default_rng(7).standard_normal((3, 3))
        a = apply_nonseparable_filter(eigs, h, t)
        b = apply_nonseparable_filter(eigs, lambda l1, l2: best, t)
        assert np.abs(a - b).max() > 1e-3

    def test_non_finite_names_index(self):
        eigs = [eigendecompose(laplacian(path_graph(2)))] * 2
        h = lambda l1, l2: np.where((l1 > 1) & (l2 > 1), np.inf, 1.0)
        with pytest.raises(NumericalFailure, match=r"\(1, 1\)"):
            apply_nonseparable_filter(eigs, h, np.ones((2, 2)))


@pytest.mark.parametrize("make", [
    lambda: heat([0.5, 1.0]),
    lambda: joint_heat(0.3),
    lambda: ideal_lowpass(1.2),
    lambda: polynomial([1, -0.5, 0.25]),
    lambda: sampled([0, 2, 8], [1, 0.5, 0]),
])
def test_zero_tensor_preserved(make):
    eigs = [eigendecompose(laplacian(path_graph(n))) for n in (3, 4)]
    z = np.zeros((3, 4))
    np.testing.assert_array_equal(apply_filter(make(), eigs, z), 0)


def test_zero_tensor_preserved_chebyshev_and_nonseparable():
    laps = [laplacian(path_graph(n), sparse=True) for n in (3, 4)]
    z = np.zeros((3, 4))
    np.testing.assert_array_equal(chebyshev_filter(laps, lambda lam: np.exp(-lam), 10, z), 0)
    eigs = [eigendecompose(l.toarray()) for l in laps]
    np.testing.assert_array_equal(apply_nonseparable_filter(eigs, lambda a, b: np.cos(a * b), z), 0)


class TestSpecFormat:
    @pytest.mark.parametrize("text,kind", [
        ("kind=heat tau=0.5,1.0", FilterKind.SEPARABLE),
        ("kind=joint_heat tau=0.5", FilterKind.JOINT),
        ("kind=lowpass cutoff=1.2", FilterKind.JOINT),
        ("kind=poly coeffs=1,-0.5,0.25", FilterKind.JOINT),
        ("kind=table x=0,1,2 y=1,0.5,0", FilterKind.JOINT),
    ])
    def test_parse(self, text, kind):
        assert parse_filter_spec(text).kind is kind

    def test_round_trip_text(self):
        for spec in (heat([0.5, 1.0]), joint_heat(2.0), ideal_lowpass(1.5), polynomial([1, 2]), sampled([0, 1], [1, 0])):
            again = parse_filter_spec(spec.text)
            assert again.text == spec.text
            lam = np.linspace(0, 4, 9)
            if spec.kind is FilterKind.SEPARABLE:
                for a, b in zip(spec.response, again.response):
                    np.testing.assert_array_equal(a(lam), b(lam))
            else:
                np.testing.assert_array_equal(spec.response(lam), again.response(lam))

    def test_poly_values(self):
        h = parse_filter_spec("kind=poly coeffs=1,-0.5,0.25").response
        np.testing.assert_allclose(h(np.array([0.0, 2.0])), [1.0, 1 - 1 + 1])

    def test_lowpass_inclusive(self):
        h = ideal_lowpass(1.0).response
        np.testing.assert_array_equal(h(np.array([0.5, 1.0, 1.5])), [1, 1, 0])

    @pytest.mark.parametrize("text", [
        "kind=heat",
        "kind=wavelet tau=1",
        "kind=heat tau=1 extra=2",
        "kind=lowpass cutoff=abc",
        "tau=1",
        "kind=heat tau",
        "kind=heat tau=-1",
    ])
    def test_rejects(self, text):
        with pytest.raises(InvalidArgumentError):
            parse_filter_spec(text)


class TestChebyshev:
    def test_coefficients_of_chebyshev_polynomial(self):
        # h = T_2 on [-1, 1] mapped to [0, 2]: c = (0, 0, 1, 0, ...)
        h = lambda lam: 2 * (lam - 1) ** 2 - 1
        c = chebyshev_coefficients(h, 6, 2.0)
        np.testing.assert_allclose(c, [0, 0, 1, 0, 0, 0, 0], atol=1e-13)

    def test_linear_is_exact(self):
        rng = np.random.default_rng(8)
        laps, _ = random_product(rng, (3, 4))
        t = rng.standard_normal((3, 4))
        for k in (2, 5):
            out = chebyshev_filter(laps, lambda lam: lam, k, t)
            np.testing.assert_allclose(out, kron_sum_matvec(laps, t), atol=1e-8)

    def test_heat_p4_p4_k30(self):
        laps = [laplacian(path_graph(4), sparse=True)] * 2
        eigs = [eigendecompose(l.toarray()) for l in laps]
        t = np.random.default_rng(9).standard_normal((4, 4))
        h = lambda lam: np.exp(-lam)
        exact = apply_joint_filter(product_eigensystem(eigs), h, t)
        for kwargs in ({}, {"factor_eigs": eigs}):
            approx = chebyshev_filter(laps, h, 30, t, **kwargs)
            assert np.linalg.norm(approx - exact) <= 1e-3 * np.linalg.norm(exact)

    def test_error_decreases_as_order_doubles(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            laps, eigs = random_product(rng, (4, 5, 3))
            t = rng.standard_normal((4, 5, 3))
            h = lambda lam: np.exp(-0.5 * lam)
            exact = apply_joint_filter(product_eigensystem(eigs), h, t)
            errs = [np.linalg.norm(chebyshev_filter(laps, h, k, t) - exact) for k in (5, 10, 20, 40)]
            floor = 1e-13 * np.linalg.norm(exact)
            for a, b in zip(errs, errs[1:]):
                assert b <= 1.1 * a + floor

    def test_gershgorin_bounds_spectrum(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            lap = laplacian(random_graph(rng, int(rng.integers(2, 10))))
            assert gershgorin_bound(lap) >= np.linalg.eigvalsh(lap).max() - 1e-12

    def test_gershgorin_ring(self):
        assert gershgorin_bound(laplacian(ring_graph(5))) == 4.0

    def test_bad_order(self):
        with pytest.raises(InvalidArgumentError):
            chebyshev_filter([laplacian(path_graph(3))], lambda lam: lam, 0, np.zeros(3))

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            chebyshev_filter([laplacian(path_graph(3))], lambda lam: lam, 4, np.zeros(4))
