"""Single-way spectral tools: eigensystems, GFT, spectral filters, DFT, eigenmaps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import symmetric_eig
from .errors import InvalidArgumentError, NumericalFailure


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        vecs = np.asarray(self.eigenvectors, dtype=float)
        if vals.ndim != 1 or vecs.shape != (vals.size, vals.size):
            raise InvalidArgumentError(
                f"eigenvector matrix {vecs.shape} does not match {vals.size} eigenvalues"
            )
        vals.flags.writeable = False
        vecs.flags.writeable = False
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


def eigendecompose(lap) -> EigenSystem:
    """Full eigensystem of a symmetric matrix (normally a graph Laplacian).

    Eigenvectors are sign-normalized so the largest-magnitude entry is
    positive.
    """
    vals, vecs = symmetric_eig(lap)
    return EigenSystem(vals, vecs)


def _check_len(es: EigenSystem, f: np.ndarray, what: str) -> np.ndarray:
    f = np.asarray(f)
    if f.shape[0] != es.n:
        raise InvalidArgumentError(f"{what} has length {f.shape[0]}, expected {es.n}")
    return f


def gft(es: EigenSystem, f) -> np.ndarray:
    """Graph Fourier coefficients ``Psi^T f``.

    ``f`` may also be a matrix, in which case each column is transformed.
    """
    f = _check_len(es, f, "signal")
    return es.eigenvectors.T @ f


def igft(es: EigenSystem, fhat) -> np.ndarray:
    fhat = _check_len(es, fhat, "coefficient vector")
    return es.eigenvectors @ fhat


def filter_response(h, eigenvalues: np.ndarray) -> np.ndarray:
    """Evaluate ``h`` on each eigenvalue, refusing non-finite output."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    try:
        resp = np.asarray(h(eigenvalues), dtype=float)
        if resp.shape != eigenvalues.shape:
            resp = np.broadcast_to(resp, eigenvalues.shape).astype(float)
    except (TypeError, ValueError):
        resp = np.array([float(h(lam)) for lam in eigenvalues.ravel()]).reshape(eigenvalues.shape)
    bad = ~np.isfinite(resp)
    if bad.any():
        lam = eigenvalues[bad].ravel()[0]
        raise NumericalFailure(f"filter is not finite at eigenvalue {lam!r}")
    return resp


def apply_spectral_filter(es: EigenSystem, h, f) -> np.ndarray:
    """``Psi h(Lambda) Psi^T f`` for a univariate response ``h``."""
    f = _check_len(es, f, "signal")
    resp = filter_response(h, es.eigenvalues)
    coeffs = es.eigenvectors.T @ f
    coeffs = coeffs * (resp if coeffs.ndim == 1 else resp[:, None])
    return es.eigenvectors @ coeffs


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix ``U[t, k] = exp(-2 pi i t k / n) / sqrt(n)`` (0-based)."""
    if n < 1:
        raise InvalidArgumentError(f"DFT size must be positive, got {n}")
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def laplacian_eigenmap(es: EigenSystem, d: int) -> np.ndarray:
    """Embed vertex ``i`` as ``(psi_1(i), ..., psi_d(i))``.

    The trivial eigenvector is skipped. The embedding is only meaningful
    for connected graphs, where that eigenvector is constant.
    """
    if d < 1 or d >= es.n:
        raise InvalidArgumentError(f"embedding dimension must satisfy 1 <= d < {es.n}, got {d}")
    return es.eigenvectors[:, 1 : d + 1].copy()
