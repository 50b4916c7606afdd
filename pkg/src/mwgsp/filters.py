"""Multi-way spectral filters on Cartesian product graphs.

Three families are supported:

* joint filters ``h(lambda)`` of the product-graph eigenvalue
  ``lambda = sum_k lambda_k``;
* separable filters ``prod_k h_k(lambda_k)``, applied mode by mode;
* nonseparable filters ``h(lambda_1, ..., lambda_D)``.

Joint filters can also be approximated by a Chebyshev polynomial in the
product Laplacian, evaluated only through factor-wise mat-vecs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgumentError, NumericalFailure
from .product import ProductSpectrum, _check_dims, _eig_list, imwgft, kron_sum_matvec, mwgft
from .spectral import EigenSystem, filter_response
from .tensor import multilinear_apply


class FilterKind(enum.Enum):
    JOINT = "joint"
    SEPARABLE = "separable"
    NONSEPARABLE = "nonseparable"


@dataclass(frozen=True)
class FilterSpec:
    """A filter family plus its response function(s).

    ``text`` is the key-value serialization when the filter came from a
    named constructor; ad-hoc filters have none.
    """

    kind: FilterKind
    response: Callable | tuple
    text: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind is FilterKind.SEPARABLE:
            object.__setattr__(self, "response", tuple(self.response))


def _fmt(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def heat(tau) -> FilterSpec:
    """Separable heat kernel ``prod_k exp(-tau_k lambda_k)``; one tau per mode."""
    taus = [float(t) for t in np.atleast_1d(tau)]
    if any(t < 0 for t in taus):
        raise InvalidArgumentError("heat diffusion times must be nonnegative")
    hs = tuple((lambda lam, t=t: np.exp(-t * np.asarray(lam))) for t in taus)
    return FilterSpec(FilterKind.SEPARABLE, hs, f"kind=heat tau={_fmt(taus)}")


def joint_heat(tau: float) -> FilterSpec:
    tau = float(tau)
    if tau < 0:
        raise InvalidArgumentError("heat diffusion time must be nonnegative")
    return FilterSpec(FilterKind.JOINT, lambda lam: np.exp(-tau * np.asarray(lam)), f"kind=joint_heat tau={tau!r}")


def ideal_lowpass(cutoff: float) -> FilterSpec:
    """Keep joint frequencies ``lambda <= cutoff``, drop the rest."""
    cutoff = float(cutoff)
    return FilterSpec(
        FilterKind.JOINT,
        lambda lam: (np.asarray(lam) <= cutoff).astype(float),
        f"kind=lowpass cutoff={cutoff!r}",
    )


def polynomial(coeffs: Sequence[float]) -> FilterSpec:
    """Joint polynomial ``sum_i c_i lambda^i`` (coefficients lowest degree first)."""
    coeffs = [float(c) for c in coeffs]
    if not coeffs:
        raise InvalidArgumentError("polynomial filter needs at least one coefficient")
    poly = np.polynomial.Polynomial(coeffs)
    return FilterSpec(FilterKind.JOINT, lambda lam: poly(np.asarray(lam, dtype=float)), f"kind=poly coeffs={_fmt(coeffs)}")


def sampled(x: Sequence[float], y: Sequence[float]) -> FilterSpec:
    """Joint response given as a table, linearly interpolated (flat outside)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2 or np.any(np.diff(x) <= 0):
        raise InvalidArgumentError("sampled filter needs >= 2 strictly increasing x values with matching y")
    return FilterSpec(FilterKind.JOINT, lambda lam: np.interp(lam, x, y), f"kind=table x={_fmt(x)} y={_fmt(y)}")


def parse_filter_spec(text: str) -> FilterSpec:
    """Parse the one-line ``key=value`` filter format, e.g. ``kind=heat tau=0.5,1.0``."""
    fields = {}
    for token in text.split():
        if token.startswith("#"):
            break
        key, sep, value = token.partition("=")
        if not sep or not value:
            raise InvalidArgumentError(f"malformed filter token {token!r}")
        fields[key] = value
    kind = fields.pop("kind", None)

    def floats(key):
        if key not in fields:
            raise InvalidArgumentError(f"filter kind {kind!r} needs {key}=...")
        try:
            return [float(v) for v in fields.pop(key).split(",")]
        except ValueError as exc:
            raise InvalidArgumentError(f"bad number in {key}: {exc}") from None

    if kind == "heat":
        spec = heat(floats("tau"))
    elif kind == "joint_heat":
        (tau,) = floats("tau")
        spec = joint_heat(tau)
    elif kind == "lowpass":
        (cutoff,) = floats("cutoff")
        spec = ideal_lowpass(cutoff)
    elif kind == "poly":
        spec = polynomial(floats("coeffs"))
    elif kind == "table":
        spec = sampled(floats("x"), floats("y"))
    else:
        raise InvalidArgumentError(f"unknown filter kind {kind!r}")
    if fields:
        raise InvalidArgumentError(f"unknown filter keys: {sorted(fields)}")
    return spec


def apply_joint_filter(spectrum: ProductSpectrum, h, t) -> np.ndarray:
    """Scale each product-graph Fourier coefficient by ``h`` of its joint eigenvalue."""
    t = np.asarray(t)
    eigs = _eig_list(spectrum)
    _check_dims(t, eigs)
    grid = ProductSpectrum(tuple(eigs)).eigenvalue_grid()
    resp = filter_response(h, grid)
    return imwgft(mwgft(t, eigs) * resp, eigs)


def spectral_operator(es: EigenSystem, h) -> np.ndarray:
    """Dense ``Psi h(Lambda) Psi^T`` for one factor."""
    resp = filter_response(h, es.eigenvalues)
    return (es.eigenvectors * resp) @ es.eigenvectors.T


def apply_separable_filter(factor_eigs, hs: Sequence, t, order: Sequence[int] | None = None) -> np.ndarray:
    """Apply ``h_k`` along mode ``k`` for every mode; ``None`` means all-pass."""
    t = np.asarray(t)
    eigs = _eig_list(factor_eigs)
    _check_dims(t, eigs)
    if len(hs) != len(eigs):
        raise InvalidArgumentError(f"got {len(hs)} mode filters for {len(eigs)} modes")
    ops = [None if h is None else spectral_operator(es, h) for es, h in zip(eigs, hs)]
    return multilinear_apply(t, ops, order=order)


def apply_nonseparable_filter(factor_eigs, h, t) -> np.ndarray:
    """Scale the coefficient at multi-index ``(l_1, ..., l_D)`` by ``h(lambda_1, ..., lambda_D)``.

    ``h`` receives D broadcastable arrays of factor eigenvalues.
    """
    t = np.asarray(t)
    eigs = _eig_list(factor_eigs)
    _check_dims(t, eigs)
    grids = np.meshgrid(*[es.eigenvalues for es in eigs], indexing="ij")
    resp = np.broadcast_to(np.asarray(h(*grids), dtype=float), t.shape)
    bad = np.argwhere(~np.isfinite(resp))
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        raise NumericalFailure(f"nonseparable filter is not finite at multi-index {idx}")
    return imwgft(mwgft(t, eigs) * resp, eigs)


def apply_filter(spec: FilterSpec, factor_eigs, t) -> np.ndarray:
    """Exact spectral application of any :class:`FilterSpec`."""
    eigs = _eig_list(factor_eigs)
    if spec.kind is FilterKind.JOINT:
        return apply_joint_filter(ProductSpectrum(tuple(eigs)), spec.response, t)
    if spec.kind is FilterKind.SEPARABLE:
        return apply_separable_filter(eigs, spec.response, t)
    return apply_nonseparable_filter(eigs, spec.response, t)


def gershgorin_bound(m) -> float:
    """Upper bound on the spectrum of a symmetric matrix from its row sums."""
    if hasattr(m, "toarray"):
        m = m.toarray()
    m = np.asarray(m, dtype=float)
    radius = np.abs(m).sum(axis=1) - np.abs(np.diag(m))
    return float(np.max(np.diag(m) + radius))


def chebyshev_coefficients(h, order: int, lambda_max: float) -> np.ndarray:
    """Coefficients ``c_0..c_K`` of ``h`` on ``[0, lambda_max]`` by cosine quadrature.

    The approximant is ``c_0 / 2 + sum_{j>=1} c_j T_j(2 lambda / lambda_max - 1)``.
    """
    theta = np.pi * (np.arange(order + 1) + 0.5) / (order + 1)
    lam = (np.cos(theta) + 1.0) * lambda_max / 2.0
    vals = filter_response(h, lam)
    j = np.arange(order + 1)
    coeffs = 2.0 / (order + 1) * np.cos(np.outer(j, theta)) @ vals
    # quadrature leaves roundoff in coefficients that are exactly zero
    coeffs[np.abs(coeffs) <= 1e-14 * np.abs(coeffs).max(initial=0.0)] = 0.0
    return coeffs


def chebyshev_filter(factor_laplacians: Sequence, h, order: int, t, lambda_max: float | None = None,
                     factor_eigs=None) -> np.ndarray:
    """Polynomial approximation of the joint filter ``h(L)`` applied to ``t``.

    ``L`` is the Kronecker sum of ``factor_laplacians`` and is only touched
    through :func:`kron_sum_matvec`. The interval bound ``lambda_max`` is
    the sum of the factor spectral radii, taken from ``factor_eigs`` when
    given and from Gershgorin discs otherwise.
    """
    if order < 1:
        raise InvalidArgumentError(f"Chebyshev order must be >= 1, got {order}")
    t = np.asarray(t, dtype=float)
    dims = tuple(m.shape[0] for m in factor_laplacians)
    if t.shape != dims:
        raise InvalidArgumentError(f"tensor shape {t.shape} does not match factor sizes {dims}")
    if lambda_max is None:
        if factor_eigs is not None:
            lambda_max = sum(es.lambda_max for es in _eig_list(factor_eigs))
        else:
            lambda_max = sum(gershgorin_bound(m) for m in factor_laplacians)
    if not lambda_max > 0:
        raise InvalidArgumentError(f"spectral bound must be positive, got {lambda_max}")

    c = chebyshev_coefficients(h, order, lambda_max)
    scale = 2.0 / lambda_max

    def shifted(x):
        return scale * kron_sum_matvec(factor_laplacians, x) - x

    prev = t
    out = 0.5 * c[0] * t
    if order >= 1 and np.any(c[1:]):
        cur = shifted(t)
        out = out + c[1] * cur
        for j in range(2, order + 1):
            prev, cur = cur, 2.0 * shifted(cur) - prev
            out = out + c[j] * cur
    return out
