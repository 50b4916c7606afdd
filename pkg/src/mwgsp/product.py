"""Cartesian product graphs, Kronecker sums and the multi-way graph Fourier transform.

Product vertices are ordered mode-1 major, the same order ``vec`` uses, so a
tensor signal and its vectorization index the product graph consistently.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, InvalidArgumentError
from .graph import Graph, laplacian
from .spectral import EigenSystem, dft_matrix, eigendecompose
from .tensor import kron_decremental, mode_product, multilinear_apply, vec

DEFAULT_CAP = 100_000


def _check_cap(joint_n: int, cap: int) -> None:
    if joint_n > cap:
        raise CapacityError(
            f"product has {joint_n} vertices, above the explicit cap of {cap}; "
            "use kron_sum_matvec / multilinear_apply instead of materializing"
        )


def kronecker_sum(mats: Sequence, cap: int = DEFAULT_CAP):
    """``sum_k I_{n>k} (x) A_k (x) I_{n<k}`` for square ``A_1, ..., A_D``.

    Returns a sparse array if any factor is sparse, otherwise a dense one.
    """
    if not mats:
        raise InvalidArgumentError("need at least one factor")
    sizes = []
    for k, a in enumerate(mats, start=1):
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidArgumentError(f"factor {k} is not square: shape {a.shape}")
        sizes.append(a.shape[0])
    joint_n = int(np.prod(sizes))
    _check_cap(joint_n, cap)

    sparse = any(sp.issparse(a) for a in mats)
    if sparse:
        total = sp.csr_array((joint_n, joint_n), dtype=float)
        for k, a in enumerate(mats):
            after = int(np.prod(sizes[k + 1 :]))
            before = int(np.prod(sizes[:k]))
            term = sp.kron(sp.kron(sp.eye_array(after), sp.csr_array(a)), sp.eye_array(before))
            total = total + term
        return sp.csr_array(total)

    total = np.zeros((joint_n, joint_n), dtype=np.result_type(*mats))
    for k, a in enumerate(mats):
        after = int(np.prod(sizes[k + 1 :]))
        before = int(np.prod(sizes[:k]))
        total += np.kron(np.kron(np.eye(after), a), np.eye(before))
    return total


def cartesian_product(factors: Sequence[Graph], cap: int = DEFAULT_CAP) -> Graph:
    """Explicit Cartesian product graph; adjacency is the Kronecker sum of factor adjacencies."""
    if not factors:
        raise InvalidArgumentError("need at least one factor graph")
    if len(factors) == 1:
        return factors[0]
    return Graph(kronecker_sum([g.weights for g in factors], cap=cap))


def kron_sum_matvec(factor_mats: Sequence, x) -> np.ndarray:
    """Multiply by the Kronecker sum of ``factor_mats`` without forming it.

    ``x`` may be a flat vector (mode-1-major) or a tensor with the factor
    sizes as shape; the result has the same layout.
    """
    dims = tuple(m.shape[0] for m in factor_mats)
    x = np.asarray(x)
    flat = x.ndim == 1
    if flat:
        if x.size != int(np.prod(dims)):
            raise InvalidArgumentError(f"vector of length {x.size} does not match product size {np.prod(dims)}")
        t = x.reshape(dims, order="F")
    else:
        if x.shape != dims:
            raise InvalidArgumentError(f"tensor shape {x.shape} does not match factor sizes {dims}")
        t = x
    out = np.zeros(dims, dtype=np.result_type(t.dtype, float))
    for k, m in enumerate(factor_mats, start=1):
        out += mode_product(t, m, k)
    return vec(out) if flat else out


@dataclass(frozen=True, eq=False)
class ProductSpectrum:
    """Eigensystem of a Kronecker sum, built from the factor eigensystems.

    Eigenpair ``(l_1, ..., l_D)`` has eigenvalue ``sum_k lambda^(k)_{l_k}`` and
    eigenvector ``psi^(D)_{l_D} (x) ... (x) psi^(1)_{l_1}``. Eigenvectors are
    only built on request and cached.
    """

    factor_eigs: tuple
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if not self.factor_eigs:
            raise InvalidArgumentError("product spectrum needs factor eigensystems")
        object.__setattr__(self, "factor_eigs", tuple(self.factor_eigs))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(es.n for es in self.factor_eigs)

    @property
    def joint_n(self) -> int:
        return int(np.prod(self.dims))

    @property
    def lambda_max(self) -> float:
        return float(sum(es.lambda_max for es in self.factor_eigs))

    def eigenvalue_grid(self) -> np.ndarray:
        """Tensor of joint eigenvalues indexed by multi-index."""
        grids = np.meshgrid(*[es.eigenvalues for es in self.factor_eigs], indexing="ij")
        return reduce(np.add, grids)

    def multi_index(self, linear: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(linear, self.dims, order="F"))

    def linear_index(self, multi: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(multi), self.dims, order="F"))

    def eigenvalue(self, multi: Sequence[int]) -> float:
        self._check(multi)
        return float(sum(es.eigenvalues[l] for es, l in zip(self.factor_eigs, multi)))

    def eigenvector(self, multi: Sequence[int]) -> np.ndarray:
        multi = tuple(int(l) for l in multi)
        self._check(multi)
        hit = self._cache.get(multi)
        if hit is not None:
            return hit
        cols = [es.eigenvectors[:, [l]] for es, l in zip(self.factor_eigs, multi)]
        v = kron_decremental(cols).ravel()
        v.flags.writeable = False
        with self._lock:
            return self._cache.setdefault(multi, v)

    def sorted_eigenvalues(self) -> tuple[np.ndarray, np.ndarray]:
        """Joint eigenvalues ascending, with multi-indices as rows.

        Equal eigenvalues are ordered lexicographically by multi-index.
        """
        grid = self.eigenvalue_grid()
        idx = np.indices(self.dims).reshape(len(self.dims), -1)
        vals = grid.reshape(-1)
        order = np.lexsort(tuple(idx[::-1]) + (vals,))
        return vals[order], idx[:, order].T

    def _check(self, multi):
        if len(multi) != len(self.dims) or any(not 0 <= l < n for l, n in zip(multi, self.dims)):
            raise InvalidArgumentError(f"multi-index {tuple(multi)} out of range for dims {self.dims}")


def product_eigensystem(factor_eigs: Sequence[EigenSystem]) -> ProductSpectrum:
    return ProductSpectrum(tuple(factor_eigs))


@dataclass(frozen=True, eq=False)
class ProductStructure:
    """Ordered factor graphs of a Cartesian product, never materialized."""

    factors: tuple
    factor_eigs: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise InvalidArgumentError("need at least one factor graph")
        if self.factor_eigs is not None:
            eigs = tuple(self.factor_eigs)
            if [es.n for es in eigs] != [g.n for g in self.factors]:
                raise InvalidArgumentError("factor eigensystems do not match factor sizes")
            object.__setattr__(self, "factor_eigs", eigs)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(g.n for g in self.factors)

    @property
    def joint_n(self) -> int:
        return int(np.prod(self.dims))

    def laplacians(self, sparse: bool = True) -> list:
        return [laplacian(g, sparse=sparse) for g in self.factors]

    def with_eigs(self) -> "ProductStructure":
        if self.factor_eigs is not None:
            return self
        eigs = tuple(eigendecompose(laplacian(g)) for g in self.factors)
        return ProductStructure(self.factors, eigs)

    def spectrum(self) -> ProductSpectrum:
        return product_eigensystem(self.with_eigs().factor_eigs)

    def materialize(self, cap: int = DEFAULT_CAP) -> Graph:
        return cartesian_product(self.factors, cap=cap)


def _eig_list(factor_eigs) -> list[EigenSystem]:
    if isinstance(factor_eigs, ProductSpectrum):
        return list(factor_eigs.factor_eigs)
    if isinstance(factor_eigs, ProductStructure):
        return list(factor_eigs.with_eigs().factor_eigs)
    return list(factor_eigs)


def _check_dims(t: np.ndarray, eigs: list[EigenSystem]) -> None:
    if t.ndim != len(eigs):
        raise InvalidArgumentError(f"tensor of order {t.ndim} needs {t.ndim} factor eigensystems, got {len(eigs)}")
    for k, (n, es) in enumerate(zip(t.shape, eigs), start=1):
        if n != es.n:
            raise InvalidArgumentError(f"mode {k} has size {n} but its graph has {es.n} vertices")


def mwgft(t, factor_eigs) -> np.ndarray:
    """Multi-way GFT: ``Psi^(k)^T`` applied along every mode."""
    t = np.asarray(t)
    eigs = _eig_list(factor_eigs)
    _check_dims(t, eigs)
    return multilinear_apply(t, [es.eigenvectors.T for es in eigs])


def imwgft(coeffs, factor_eigs) -> np.ndarray:
    coeffs = np.asarray(coeffs)
    eigs = _eig_list(factor_eigs)
    _check_dims(coeffs, eigs)
    return multilinear_apply(coeffs, [es.eigenvectors for es in eigs])


def jft(x, graph_eigs: EigenSystem) -> np.ndarray:
    """Joint time-vertex transform ``Psi^T X U_T`` of an ``n x T`` signal."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != graph_eigs.n:
        raise InvalidArgumentError(f"signal shape {x.shape} needs {graph_eigs.n} rows")
    return graph_eigs.eigenvectors.T @ x @ dft_matrix(x.shape[1])


def ijft(coeffs, graph_eigs: EigenSystem) -> np.ndarray:
    coeffs = np.asarray(coeffs)
    if coeffs.ndim != 2 or coeffs.shape[0] != graph_eigs.n:
        raise InvalidArgumentError(f"coefficient shape {coeffs.shape} needs {graph_eigs.n} rows")
    u = dft_matrix(coeffs.shape[1])
    return graph_eigs.eigenvectors @ coeffs @ u.conj().T
