"""Graph-regularized recovery, compression and slice metrics."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidArgumentError, NumericalFailure
from .graph import Graph
from .product import _eig_list, imwgft, mwgft
from .spectral import EigenSystem, dft_matrix, eigendecompose
from .tensor import multilinear_apply


class SingularSystemError(NumericalFailure):
    """The completion system has no unique solution."""


@dataclass(frozen=True)
class MaskedMatrix:
    """Matrix with an observation mask; unobserved values are stored as 0."""

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        mask = np.asarray(self.mask).astype(bool)
        if values.ndim != 2 or values.shape != mask.shape:
            raise InvalidArgumentError(f"values {values.shape} and mask {mask.shape} must be equal-shape matrices")
        values[~mask] = 0.0
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("observed values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class RegularizationConfig:
    gamma_r: float = 0.0
    gamma_c: float = 0.0
    tol: float = 1e-8
    max_iter: int | None = None

    def __post_init__(self):
        if self.gamma_r < 0 or self.gamma_c < 0:
            raise InvalidArgumentError("regularization weights must be nonnegative")
        if not self.tol > 0:
            raise InvalidArgumentError("solver tolerance must be positive")


def _as_eigs(m) -> EigenSystem:
    return m if isinstance(m, EigenSystem) else eigendecompose(m)


def tv_tikhonov(y, lap_g, lap_t, cfg: RegularizationConfig) -> np.ndarray:
    """Closed-form minimizer of the time-vertex Tikhonov problem.

    Minimizes ``||Y - X||_F^2 + gamma_r tr(X^T L_G X) + gamma_c tr(X L_T X^T)``
    by dividing each joint Fourier coefficient by
    ``1 + gamma_r lambda^G_i + gamma_c lambda^T_j``. Laplacians may be
    given as matrices or precomputed eigensystems.
    """
    y = np.asarray(y, dtype=float)
    eg, et = _as_eigs(lap_g), _as_eigs(lap_t)
    if y.ndim != 2 or y.shape != (eg.n, et.n):
        raise InvalidArgumentError(f"signal shape {y.shape} does not match Laplacians ({eg.n}, {et.n})")
    gain = 1.0 + cfg.gamma_r * eg.eigenvalues[:, None] + cfg.gamma_c * et.eigenvalues[None, :]
    coeffs = mwgft(y, [eg, et])
    return imwgft(coeffs / gain, [eg, et])


def tikhonov_residual(x, y, lap_g, lap_t, cfg: RegularizationConfig) -> float:
    """``||X + gamma_r L_G X + gamma_c X L_T - Y||_F``."""
    r = x + cfg.gamma_r * (lap_g @ x) + cfg.gamma_c * (x @ lap_t) - y
    return float(np.linalg.norm(r))


def completion_objective(x, data: MaskedMatrix, lap_r, lap_c, cfg: RegularizationConfig) -> float:
    fit = np.sum((data.mask * (data.values - x)) ** 2)
    reg_r = np.sum(x * (lap_r @ x))
    reg_c = np.sum(x * (x @ lap_c))
    return float(fit + cfg.gamma_r * reg_r + cfg.gamma_c * reg_c)


def graph_reg_completion(data: MaskedMatrix, lap_r, lap_c, cfg: RegularizationConfig) -> np.ndarray:
    """Fill missing entries with row and column graph smoothness penalties.

    Solves ``(P + gamma_r I (x) L_r + gamma_c L_c (x) I) vec(X) = P vec(Y)``
    with Jacobi-preconditioned conjugate gradients, where ``P`` is the
    diagonal observation mask. The operator is applied as
    ``M * X + gamma_r L_r X + gamma_c X L_c`` and never formed.

    Raises
    ------
    SingularSystemError
        If nothing is observed.
    NumericalFailure
        If CG does not reach ``cfg.tol`` relative residual within
        ``cfg.max_iter`` iterations (default ``10 * n1 * n2``).
    """
    n1, n2 = data.shape
    if lap_r.shape != (n1, n1) or lap_c.shape != (n2, n2):
        raise InvalidArgumentError(
            f"Laplacians {lap_r.shape}, {lap_c.shape} do not match data shape {data.shape}"
        )
    if not data.mask.any():
        raise SingularSystemError("no observed entries; the completion system is singular")
    mask = data.mask.astype(float)
    gr, gc = cfg.gamma_r, cfg.gamma_c
    lap_c_t = lap_c.T

    def matvec(v):
        x = v.reshape(n1, n2, order="F")
        out = mask * x
        if gr:
            out = out + gr * (lap_r @ x)
        if gc:
            out = out + gc * (lap_c_t @ x.T).T
        return out.reshape(-1, order="F")

    n = n1 * n2
    op = spla.LinearOperator((n, n), matvec=matvec, dtype=float)
    diag_r = lap_r.diagonal() if sp.issparse(lap_r) else np.diag(lap_r)
    diag_c = lap_c.diagonal() if sp.issparse(lap_c) else np.diag(lap_c)
    diag = mask + gr * diag_r[:, None] + gc * diag_c[None, :]
    # zero diagonal only on unobserved entries nothing couples to; they stay 0
    diag[diag == 0] = 1.0
    inv_diag = (1.0 / diag).reshape(-1, order="F")
    precond = spla.LinearOperator((n, n), matvec=lambda v: inv_diag * v, dtype=float)

    b = (mask * data.values).reshape(-1, order="F")
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros((n1, n2))
    max_iter = cfg.max_iter if cfg.max_iter is not None else 10 * n
    sol, info = spla.cg(op, b, rtol=0.5 * cfg.tol, atol=0.0, maxiter=max_iter, M=precond)
    residual = float(np.linalg.norm(b - matvec(sol)) / bnorm)
    if info != 0 or residual > cfg.tol:
        raise NumericalFailure(
            f"conjugate gradients stopped at relative residual {residual:.3e} (tolerance {cfg.tol:.1e})",
            residual=residual,
            iterations=max_iter if info > 0 else None,
        )
    return sol.reshape(n1, n2, order="F")


# -- compression ---------------------------------------------------------------

def _mode_transforms(transform, ndim: int):
    """Normalize a transform description to forward/inverse operator lists.

    ``transform`` holds one entry per mode: an :class:`EigenSystem` (GFT),
    the string ``"dft"`` or ``None`` (identity). A :class:`ProductSpectrum`
    or plain list of eigensystems means the full MWGFT.
    """
    entries = _eig_list(transform) if not isinstance(transform, (list, tuple)) else list(transform)
    if len(entries) != ndim:
        raise InvalidArgumentError(f"transform lists {len(entries)} modes, tensor has {ndim}")
    fwd, inv = [], []
    for entry in entries:
        if entry is None:
            fwd.append(None)
            inv.append(None)
        elif isinstance(entry, EigenSystem):
            fwd.append(entry.eigenvectors.T)
            inv.append(entry.eigenvectors)
        elif entry == "dft":
            fwd.append("dft")
            inv.append("dft")
        else:
            raise InvalidArgumentError(f"unknown mode transform {entry!r}")
    return fwd, inv


def _resolve(ops, shape, inverse: bool):
    out = []
    for op, n in zip(ops, shape):
        if isinstance(op, str):
            u = dft_matrix(n)
            # coefficients along a DFT mode are U^T x; the inverse is conj(U)
            out.append(u.conj() if inverse else u.T)
        else:
            out.append(op)
    return out


def forward_transform(t, transform) -> np.ndarray:
    t = np.asarray(t)
    fwd, _ = _mode_transforms(transform, t.ndim)
    return multilinear_apply(t, _resolve(fwd, t.shape, inverse=False))


def inverse_transform(coeffs, transform) -> np.ndarray:
    coeffs = np.asarray(coeffs)
    _, inv = _mode_transforms(transform, coeffs.ndim)
    return multilinear_apply(coeffs, _resolve(inv, coeffs.shape, inverse=True))


def nearest_rank_threshold(sorted_mags: np.ndarray, p: float) -> float:
    """Nearest-rank ``p``-th percentile of ascending magnitudes; ``-inf`` at ``p=0``."""
    n = sorted_mags.size
    rank = int(np.ceil(p / 100.0 * n))
    return -np.inf if rank < 1 else float(sorted_mags[rank - 1])


def threshold_coefficients(coeffs: np.ndarray, p: float) -> np.ndarray:
    """Zero every coefficient whose magnitude is strictly below the ``p``-th percentile."""
    mags = np.abs(coeffs)
    cut = nearest_rank_threshold(np.sort(mags, axis=None), p)
    out = coeffs.copy()
    out[mags < cut] = 0
    return out


def compression_errors(t, transform, percentiles: Sequence[float]) -> np.ndarray:
    """Normalized compression error for each percentile.

    Coefficients below the percentile are dropped and the error is
    ``||X_p - X|| / ||X||``. Every supported transform is unitary, so
    the error equals the norm of the dropped coefficients; summing their
    squares in ascending order makes the curve exactly nondecreasing in
    ``p``. A zero tensor yields zeros and a ``RuntimeWarning``.
    """
    t = np.asarray(t, dtype=float)
    for p in percentiles:
        if not 0 <= p < 100:
            raise InvalidArgumentError(f"percentile must lie in [0, 100), got {p}")
    norm = np.linalg.norm(t)
    if norm == 0:
        warnings.warn("compression error of a zero tensor is defined as 0", RuntimeWarning, stacklevel=2)
        return np.zeros(len(percentiles))
    coeffs = forward_transform(t, transform)
    sq = np.sort(np.abs(coeffs) ** 2, axis=None)
    mags = np.sqrt(sq)
    energy = np.concatenate([[0.0], np.cumsum(sq)])
    out = []
    for p in percentiles:
        cut = nearest_rank_threshold(mags, p)
        dropped = int(np.searchsorted(mags, cut, side="left")) if np.isfinite(cut) else 0
        out.append(np.sqrt(energy[dropped]) / norm)
    return np.array(out)


def compression_error(t, transform, p: float) -> float:
    return float(compression_errors(t, transform, [p])[0])


def reconstruction_error(t, transform, p: float) -> float:
    """Compression error computed by explicit inverse transform of thresholded coefficients."""
    t = np.asarray(t, dtype=float)
    coeffs = forward_transform(t, transform)
    rec = inverse_transform(threshold_coefficients(coeffs, p), transform)
    return float(np.linalg.norm(rec - t) / np.linalg.norm(t))


# -- co-clustering and co-manifold metrics -------------------------------------

def coclust_objective(y, x, mode_graphs: Sequence[Graph], gamma: float) -> float:
    """Convex co-clustering criterion for an order-3 tensor.

    ``0.5 ||Y - X||_F^2 + gamma * sum_d sum_{(i,j) in E_d} w_ij ||X_i - X_j||_F``
    where ``X_i`` is the ``i``-th slice along mode ``d``.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim != 3 or y.shape != x.shape:
        raise InvalidArgumentError(f"need two order-3 tensors of equal shape, got {y.shape} and {x.shape}")
    if len(mode_graphs) != 3:
        raise InvalidArgumentError(f"need one graph per mode, got {len(mode_graphs)}")
    for d, g in enumerate(mode_graphs):
        if g.n != x.shape[d]:
            raise InvalidArgumentError(f"mode {d + 1} graph has {g.n} vertices, tensor has {x.shape[d]} slices")
    penalty = 0.0
    for d, g in enumerate(mode_graphs):
        slices = np.moveaxis(x, d, 0)
        for i, j, w in g.edges():
            penalty += w * np.linalg.norm(slices[i] - slices[j])
    return float(0.5 * np.sum((y - x) ** 2) + gamma * penalty)


def comanifold_slice_distance(t, mode: int, i: int, j: int, m_ops: Sequence) -> float:
    """L1 distance between two slices after multiscale transforms of the other modes.

    For ``mode=1`` this is ``||M2 (X_i - X_j) M3^T||_1``. ``m_ops`` lists the
    transforms for the remaining modes in ascending mode order; they may be
    rectangular.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 3:
        raise InvalidArgumentError(f"co-manifold metric needs an order-3 tensor, got order {t.ndim}")
    if not 1 <= mode <= 3:
        raise InvalidArgumentError(f"mode {mode} out of range")
    if len(m_ops) != 2:
        raise InvalidArgumentError("need transforms for exactly the two remaining modes")
    slices = np.moveaxis(t, mode - 1, 0)
    if not (0 <= i < slices.shape[0] and 0 <= j < slices.shape[0]):
        raise InvalidArgumentError(f"slice index out of range for mode {mode}")
    if i == j:
        return 0.0
    diff = slices[i] - slices[j]
    return float(np.abs(multilinear_apply(diff, list(m_ops))).sum())


# -- synthetic data --------------------------------------------------------------

def smooth_tensor(factor_eigs, tau, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance Gaussian noise passed through a separable heat kernel."""
    eigs = _eig_list(factor_eigs)
    taus = np.broadcast_to(np.asarray(tau, dtype=float), (len(eigs),))
    noise = rng.standard_normal(tuple(es.n for es in eigs))
    ops = [(es.eigenvectors * np.exp(-tk * es.eigenvalues)) @ es.eigenvectors.T for es, tk in zip(eigs, taus)]
    return multilinear_apply(noise, ops)


def rank_one_smooth(row_eigs: EigenSystem, col_eigs: EigenSystem) -> np.ndarray:
    """Outer product of the first nontrivial eigenvectors of two graphs."""
    return np.outer(row_eigs.eigenvectors[:, 1], col_eigs.eigenvectors[:, 1])


def random_mask(shape, missing_fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Boolean mask with exactly ``round(missing_fraction * size)`` entries hidden."""
    size = int(np.prod(shape))
    hidden = int(round(missing_fraction * size))
    mask = np.ones(size, dtype=bool)
    mask[rng.choice(size, hidden, replace=False)] = False
    return mask.reshape(shape)


def relative_error_on(x, truth, where) -> float:
    where = np.asarray(where, dtype=bool)
    return float(np.linalg.norm((x - truth)[where]) / np.linalg.norm(truth[where]))
