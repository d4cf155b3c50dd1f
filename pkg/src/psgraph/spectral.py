"""Eigendecomposition of symmetric shift operators, GFT/IGFT, filters, kernels.

Only symmetric shifts are supported; for directed graphs the combinatorial
Laplacian (graph module) is the sanctioned symmetrization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import ValidationError, as_finite_array, check_symmetric

SHIFT_ADJACENCY = "adjacency"
SHIFT_DIRECTED_LAPLACIAN = "directed-laplacian"


@dataclass(frozen=True)
class SpectralBasis:
    """Eigendecomposition of a symmetric shift operator.

    Attributes
    ----------
    eigenvalues : ndarray
        Ascending real eigenvalues.
    eigenvectors : ndarray
        Orthonormal eigenvectors as columns, sign-fixed so each column's
        first largest-magnitude component is positive.
    shift_kind : str
        Which shift produced the basis ("adjacency", "directed-laplacian",
        or "custom" for raw matrices).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    shift_kind: str = "custom"

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def _fix_signs(u: np.ndarray) -> np.ndarray:
    # first component of largest absolute value made positive, per column
    u = u.copy()
    for k in range(u.shape[1]):
        col = u[:, k]
        j = int(np.argmax(np.abs(col)))
        if col[j] < 0:
            u[:, k] = -col
    return u


def _order_degenerate(w: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # within a numerically repeated eigenvalue, order eigenvectors by the
    # first index of their largest-magnitude component
    n = w.shape[0]
    if n < 2:
        return w, u
    tol = max(1e-12, 1e-8 * float(np.max(np.abs(w))))
    order = list(range(n))
    start = 0
    for stop in range(1, n + 1):
        if stop == n or w[stop] - w[stop - 1] > tol:
            if stop - start > 1:
                block = sorted(order[start:stop],
                               key=lambda k: int(np.argmax(np.abs(u[:, k]))))
                order[start:stop] = block
            start = stop
    order = np.asarray(order)
    return w[order], u[:, order]


def eigendecompose(shift, shift_kind: str = "custom") -> SpectralBasis:
    """Full eigendecomposition of a symmetric shift operator.

    Eigenvalues ascend; eigenvectors are orthonormal with a deterministic
    sign convention so repeated runs produce identical bases.
    """
    s = check_symmetric(shift, tol=1e-10, name="shift")
    s = 0.5 * (s + s.T)
    w, u = np.linalg.eigh(s)
    u = _fix_signs(u)
    w, u = _order_degenerate(w, u)
    return SpectralBasis(eigenvalues=w, eigenvectors=u, shift_kind=shift_kind)


def _check_signal(basis: SpectralBasis, x, name):
    arr = as_finite_array(x, name=name)
    if arr.ndim not in (1, 2) or arr.shape[0] != basis.n:
        raise ValidationError(
            f"{name} has shape {arr.shape}, expected leading dimension {basis.n}")
    return arr


def gft(basis: SpectralBasis, x) -> np.ndarray:
    """Graph Fourier transform: project onto the eigenvector basis (U^T x)."""
    arr = _check_signal(basis, x, "signal")
    return basis.eigenvectors.T @ arr


def igft(basis: SpectralBasis, xhat) -> np.ndarray:
    """Inverse graph Fourier transform (U xhat)."""
    arr = _check_signal(basis, xhat, "spectrum")
    return basis.eigenvectors @ arr


def _response(basis: SpectralBasis, fn, name) -> np.ndarray:
    vals = np.asarray([float(fn(lam)) for lam in basis.eigenvalues])
    if vals.size and not np.all(np.isfinite(vals)):
        raise ValidationError(f"{name} is non-finite at some eigenvalue")
    return vals


def apply_filter(basis: SpectralBasis, h, x) -> np.ndarray:
    """Apply the graph filter U h(Lambda) U^T to a signal.

    ``h`` is a scalar function evaluated at each eigenvalue.
    """
    arr = _check_signal(basis, x, "signal")
    hv = _response(basis, h, "filter response")
    xhat = basis.eigenvectors.T @ arr
    shaped = hv[:, None] * xhat if arr.ndim == 2 else hv * xhat
    return basis.eigenvectors @ shaped


def spectral_kernel(basis: SpectralBasis, r) -> np.ndarray:
    """Kernel matrix K = sum_i r(lambda_i) u_i u_i^T.

    ``r`` must be nonnegative on the spectrum so K is symmetric PSD.
    """
    rv = _response(basis, r, "kernel response")
    if np.any(rv < 0):
        raise ValidationError("kernel response is negative at some eigenvalue")
    k = (basis.eigenvectors * rv) @ basis.eigenvectors.T
    return 0.5 * (k + k.T)
