"""Dense symmetric eigensolver: Householder tridiagonalization + implicit QL.

Both kernels are compiled with numba. The tridiagonal stage accumulates the
orthogonal transform, and the QL stage applies each Givens rotation to it, so
the result is a full eigensystem.
"""
from __future__ import annotations

import math

import numba
import numpy as np

from .errors import InvalidArgumentError, NumericalFailure

MAX_SWEEPS_PER_EIGENVALUE = 60


@numba.njit(cache=True)
def _tridiagonalize(a):
    """Reduce symmetric ``a`` in place; return (diag, offdiag).

    On exit ``a`` holds the orthogonal Q with ``Q^T A Q = T``. ``e[i]``
    couples rows ``i-1`` and ``i``; ``e[0] = 0``.
    """
    n = a.shape[0]
    d = np.zeros(n)
    e = np.zeros(n)
    for i in range(n - 1, 0, -1):
        l = i - 1
        h = 0.0
        if l > 0:
            scale = 0.0
            for k in range(l + 1):
                scale += abs(a[i, k])
            if scale == 0.0:
                e[i] = a[i, l]
            else:
                for k in range(l + 1):
                    a[i, k] /= scale
                    h += a[i, k] * a[i, k]
                f = a[i, l]
                g = -math.sqrt(h) if f >= 0.0 else math.sqrt(h)
                e[i] = scale * g
                h -= f * g
                a[i, l] = f - g
                f = 0.0
                for j in range(l + 1):
                    a[j, i] = a[i, j] / h
                    g = 0.0
                    for k in range(j + 1):
                        g += a[j, k] * a[i, k]
                    for k in range(j + 1, l + 1):
                        g += a[k, j] * a[i, k]
                    e[j] = g / h
                    f += e[j] * a[i, j]
                hh = f / (h + h)
                for j in range(l + 1):
                    f = a[i, j]
                    g = e[j] - hh * f
                    e[j] = g
                    for k in range(j + 1):
                        a[j, k] -= f * e[k] + g * a[i, k]
        else:
            e[i] = a[i, l]
        d[i] = h

    d[0] = 0.0
    e[0] = 0.0
    for i in range(n):
        if d[i] != 0.0:
            for j in range(i):
                g = 0.0
                for k in range(i):
                    g += a[i, k] * a[k, j]
                for k in range(i):
                    a[k, j] -= g * a[k, i]
        d[i] = a[i, i]
        a[i, i] = 1.0
        for j in range(i):
            a[j, i] = 0.0
            a[i, j] = 0.0
    return d, e


@numba.njit(cache=True)
def _implicit_ql(d, e, zt, max_sweeps):
    """Diagonalize the tridiagonal (d, e) in place.

    ``zt`` holds eigenvectors as rows and receives every rotation. Returns
    the total sweep count, or ``-(index + 1)`` for the eigenvalue that
    failed to converge.
    """
    n = d.shape[0]
    eps = np.finfo(np.float64).eps
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0
    total = 0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_sweeps:
                return -(l + 1)
            it += 1
            total += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    f = zt[i + 1, k]
                    zt[i + 1, k] = s * zt[i, k] + c * f
                    zt[i, k] = c * zt[i, k] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return total


def _fix_signs(vecs: np.ndarray) -> None:
    # largest-magnitude entry positive; near-ties resolved to the lowest index
    mags = np.abs(vecs)
    peak = mags.max(axis=0)
    lead = np.argmax(mags >= peak * (1.0 - 1e-9), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs *= signs


def symmetric_eig(matrix, symmetry_rtol: float = 1e-12):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.

    Raises
    ------
    InvalidArgumentError
        If the input is not square, not finite or not symmetric.
    NumericalFailure
        If an eigenvalue needs more than ``MAX_SWEEPS_PER_EIGENVALUE`` QL sweeps.
    """
    if hasattr(matrix, "toarray"):
        matrix = matrix.toarray()
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("matrix contains non-finite entries")
    n = a.shape[0]
    scale = np.abs(a).max() if n else 0.0
    asym = np.abs(a - a.T).max() if n else 0.0
    if asym > symmetry_rtol * max(scale, 1e-300) and asym > 0:
        raise InvalidArgumentError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    a = 0.5 * (a + a.T)
    if n == 1:
        return a[0].copy(), np.ones((1, 1))

    q = np.ascontiguousarray(a)
    d, e = _tridiagonalize(q)
    zt = np.ascontiguousarray(q.T)
    status = _implicit_ql(d, e, zt, MAX_SWEEPS_PER_EIGENVALUE)
    if status < 0:
        raise NumericalFailure(
            f"QL iteration did not converge for eigenvalue {-status - 1} "
            f"after {MAX_SWEEPS_PER_EIGENVALUE} sweeps",
            iterations=MAX_SWEEPS_PER_EIGENVALUE,
        )
    order = np.argsort(d, kind="stable")
    values = d[order]
    vectors = np.ascontiguousarray(zt[order].T)
    _fix_signs(vectors)
    return values, vectors
