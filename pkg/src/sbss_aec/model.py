"""Shared statistical machinery: prior weights, auxiliary norm, covariance recursion."""

from __future__ import annotations

import math

import numpy as np

from ._validation import check_square
from .exceptions import NumericError, StructuralError

HERMITIAN_TOL = 1e-12


def weight(r: float, beta: float, r_floor: float = 1e-6) -> float:
    """Generalized-Gaussian MM weight ``max(r, r_floor) ** (beta - 2)``."""
    return float(max(r, r_floor)) ** (beta - 2.0)


def aux_norm(filters, observations) -> float:
    """Norm across bins of the previous filters applied to current observations.

    Args:
        filters: ``(n_bins, dim)`` extraction filters from the previous frame.
        observations: ``(n_bins, dim)`` stacked observations of the current frame.
    """
    filters = np.asarray(filters)
    observations = np.asarray(observations)
    if filters.shape != observations.shape:
        raise StructuralError(
            f"filters {filters.shape} and observations {observations.shape} differ"
        )
    out = np.einsum("...k,...k->...", filters.conj(), observations)
    return float(np.sqrt(np.sum(out.real ** 2 + out.imag ** 2)))


def init_covariance(n_bins: int, dim: int, scale: float = 1e-3) -> np.ndarray:
    return np.tile(scale * np.eye(dim, dtype=np.complex128), (n_bins, 1, 1))


def init_filters(n_bins: int, dim: int) -> np.ndarray:
    """Identity demixing matrix, i.e. every filter equals ``e_1``."""
    w = np.zeros((n_bins, dim), dtype=np.complex128)
    w[:, 0] = 1.0
    return w


def update_covariance(V, y_tilde, phi: float, alpha: float) -> np.ndarray:
    """``alpha V + (1 - alpha) phi y y^H``, re-symmetrized.

    Works on a single ``(dim, dim)`` matrix or a ``(n_bins, dim, dim)`` batch
    with matching ``(n_bins, dim)`` observations.
    """
    if not math.isfinite(phi):
        raise NumericError(f"non-finite weight {phi}")
    V = check_square(V)
    y = np.asarray(y_tilde)
    if y.shape != V.shape[:-1]:
        raise StructuralError(f"observation {y.shape} does not match V {V.shape}")
    out = alpha * V + (1.0 - alpha) * phi * (y[..., :, None] * y[..., None, :].conj())
    return 0.5 * (out + np.swapaxes(out, -1, -2).conj())


def aux_value(w, V, first_element=None) -> float:
    """Per-bin auxiliary function value.

    Returns ``w^H V w``. The structured demixing matrix is unit upper
    triangular once the first element is normalized to one, so its log-det term
    vanishes; pass ``first_element`` to add ``-2 log|first_element|`` for an
    unnormalized filter (the EISS scale step).
    """
    V = check_square(V)
    w = np.asarray(w)
    if V.shape[-1] != w.shape[-1]:
        raise StructuralError(f"filter length {w.shape[-1]} does not match V {V.shape}")
    scale = max(1.0, float(np.max(np.abs(V))))
    if np.max(np.abs(V - V.conj().T)) > HERMITIAN_TOL * scale:
        raise NumericError("covariance is not Hermitian")
    value = float(np.real(w.conj() @ V @ w))
    if first_element is not None:
        value -= 2.0 * math.log(abs(first_element))
    return value


def objective(w, V) -> float:
    """``w^H V w - 2 log|w[0]|`` for any (unnormalized) filter."""
    return aux_value(w, V, first_element=np.asarray(w)[0])
