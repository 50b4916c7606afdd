"""Dense tensors as numpy arrays: reshaping, Kronecker products, multilinear maps.

A tensor of order D is an ``ndarray`` with shape ``(n_1, ..., n_D)``. All
flattening is mode-1 major (Fortran order), so for matrices ``vec`` stacks
columns. Every function returns a new array.
"""
from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError


def _mode(t: np.ndarray, mode: int) -> int:
    # modes are 1-based in the public API
    if not 1 <= mode <= t.ndim:
        raise InvalidArgumentError(f"mode {mode} out of range for an order-{t.ndim} tensor")
    return mode - 1


def vec(t) -> np.ndarray:
    """Mode-1-major vectorization."""
    return np.asarray(t).reshape(-1, order="F").copy()


def vec_mode(t, mode: int) -> np.ndarray:
    """Mode-``mode``-major vectorization: ``mode`` varies fastest, then the rest in order."""
    t = np.asarray(t)
    k = _mode(t, mode)
    return np.moveaxis(t, k, 0).reshape(-1, order="F").copy()


def ten(x, mode: int, dims: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`vec_mode`: rebuild the tensor with shape ``dims``."""
    x = np.asarray(x)
    dims = tuple(int(n) for n in dims)
    if x.size != int(np.prod(dims)):
        raise InvalidArgumentError(f"vector of length {x.size} cannot fill a tensor of shape {dims}")
    if not 1 <= mode <= len(dims):
        raise InvalidArgumentError(f"mode {mode} out of range for {len(dims)} dims")
    k = mode - 1
    moved = (dims[k],) + dims[:k] + dims[k + 1 :]
    return np.moveaxis(x.reshape(moved, order="F"), 0, k).copy()


def mat(t, mode: int) -> np.ndarray:
    """Mode-``mode`` matricization, shape ``(n_mode, prod of other dims)``.

    Columns run over the remaining modes in ascending order with the
    earliest mode varying fastest.
    """
    t = np.asarray(t)
    k = _mode(t, mode)
    return np.moveaxis(t, k, 0).reshape(t.shape[k], -1, order="F")


def unmat(m, mode: int, dims: Sequence[int]) -> np.ndarray:
    """Fold a mode-``mode`` matricization back into a tensor of shape ``dims``."""
    dims = tuple(int(n) for n in dims)
    k = mode - 1
    moved = (dims[k],) + dims[:k] + dims[k + 1 :]
    return np.moveaxis(np.asarray(m).reshape(moved, order="F"), 0, k)


def kron(a, b) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a))
    b = np.atleast_2d(np.asarray(b))
    return np.kron(a, b)


def kron_decremental(mats: Sequence) -> np.ndarray:
    """``M_D (x) ... (x) M_1`` for the list ``[M_1, ..., M_D]``."""
    if not mats:
        raise InvalidArgumentError("need at least one matrix")
    return reduce(kron, reversed([np.atleast_2d(np.asarray(m)) for m in mats]))


def mode_product(t, m, mode: int) -> np.ndarray:
    """Apply matrix ``m`` (shape ``(p, n_mode)``) along one mode."""
    t = np.asarray(t)
    k = _mode(t, mode)
    if not sp.issparse(m):
        m = np.asarray(m)
    if m.ndim != 2 or m.shape[1] != t.shape[k]:
        raise InvalidArgumentError(
            f"operator for mode {mode} has shape {m.shape}, needs {t.shape[k]} columns"
        )
    dims = list(t.shape)
    dims[k] = m.shape[0]
    return unmat(m @ mat(t, mode), mode, dims)


def multilinear_apply(t, ops: Sequence, order: Sequence[int] | None = None) -> np.ndarray:
    """Apply one operator per mode without forming their Kronecker product.

    ``vec(result) == kron_decremental(ops) @ vec(t)``. ``None`` in ``ops``
    means identity for that mode. Operators may be rectangular; the result
    has shape ``(m_1, ..., m_D)``. ``order`` permutes the sequence in which
    modes are updated; the result does not depend on it.
    """
    y = np.asarray(t)
    if len(ops) != y.ndim:
        raise InvalidArgumentError(f"got {len(ops)} operators for an order-{y.ndim} tensor")
    modes = range(1, y.ndim + 1) if order is None else order
    for mode in modes:
        op = ops[mode - 1]
        if op is None:
            continue
        y = mode_product(y, op, mode)
    return np.array(y, copy=True)

