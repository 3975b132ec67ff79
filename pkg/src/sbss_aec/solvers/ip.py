"""Iterative projection: solve ``V w = e_1`` and normalize the first element."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .._validation import check_square
from ..exceptions import DegenerateFilterError, SolverError

RESIDUAL_TOL = 1e-8
JITTER = 1e-10
NORMALIZE_TOL = 1e-12


def _unit(n: int) -> np.ndarray:
    e1 = np.zeros(n, dtype=np.complex128)
    e1[0] = 1.0
    return e1


def ip_update(V) -> np.ndarray:
    """Unnormalized IP filter ``V^{-1} e_1`` via a Hermitian solve.

    Cholesky is tried first; indefinite (numerically) matrices fall back to a
    Bunch-Kaufman LDL^H solve.

    Raises:
        SolverError: if ``V`` is singular or the residual exceeds
            ``1e-8 * ||V||_inf``.
    """
    V = check_square(np.asarray(V, dtype=np.complex128))
    e1 = _unit(V.shape[0])
    try:
        w = scipy.linalg.cho_solve(scipy.linalg.cho_factor(V, lower=True), e1)
    except (np.linalg.LinAlgError, ValueError):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                w = scipy.linalg.solve(V, e1, assume_a="her")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SolverError(f"covariance is singular: {exc}") from exc
    norm = np.max(np.sum(np.abs(V), axis=1))
    resid = np.max(np.abs(V @ w - e1)) if np.all(np.isfinite(w)) else np.inf
    if not resid <= RESIDUAL_TOL * norm:
        raise SolverError(
            f"IP solve residual {resid:.3e} exceeds {RESIDUAL_TOL:g} * ||V|| = "
            f"{RESIDUAL_TOL * norm:.3e}"
        )
    return w


def ip_update_regularized(V, delta: float = JITTER) -> np.ndarray:
    """:func:`ip_update`, retried once with ``delta * trace(V) / n`` diagonal loading."""
    V = check_square(np.asarray(V, dtype=np.complex128))
    try:
        return ip_update(V)
    except SolverError:
        n = V.shape[0]
        load = delta * np.trace(V).real / n
        return ip_update(V + load * np.eye(n))


def normalize(w) -> np.ndarray:
    """Scale ``w`` so its first element is exactly one."""
    w = np.asarray(w, dtype=np.complex128)
    first = w[0]
    if not abs(first) > NORMALIZE_TOL * np.max(np.abs(w)):
        raise DegenerateFilterError(f"first element {first} too small to normalize")
    out = w / first
    out[0] = 1.0
    return out
