"""Element-wise iterative source steering (inverse-free) filter update.

The filter ``w`` is stored as the column whose Hermitian transpose extracts
the near-end estimate, ``S = w^H y``. The per-bin objective minimized by each
coordinate step is ``w^H V w - 2 log|w[0]|``.

Coefficients here are expressed for the stored ``w``. The update of the row
``w^H`` uses the complex conjugates, which gives the familiar
``u_k = w^H v_k / V[k, k]`` form.
"""

from __future__ import annotations

import math

import numpy as np

from .._validation import check_square
from ..exceptions import DegenerateFilterError, NumericError, StructuralError
from .ip import normalize


def eiss_coeff(w, V, k: int) -> complex:
    """Closed-form minimizer of the objective along coordinate ``k`` (1-based).

    ``k == 1`` is the scale step, ``u_1 = 1 - (w^H V w)^(-1/2)`` (real);
    otherwise ``u_k = (V w)[k] / V[k, k]``.

    Raises:
        NumericError: if the required quadratic form or diagonal entry is not
            strictly positive.
    """
    w = np.asarray(w)
    V = check_square(V)
    n = w.shape[0]
    if not 1 <= k <= n:
        raise StructuralError(f"coordinate {k} outside 1..{n}")
    if k == 1:
        q = float(np.real(w.conj() @ V @ w))
        if not (q > 0.0 and math.isfinite(q)):
            raise NumericError(f"quadratic form {q} is not positive")
        return complex(1.0 - q ** -0.5)
    d = float(np.real(V[k - 1, k - 1]))
    if not (d > 0.0 and math.isfinite(d)):
        raise NumericError(f"diagonal entry V[{k},{k}] = {d} is not positive")
    return complex(V[k - 1] @ w / d)


def eiss_apply(w, u: complex, k: int) -> np.ndarray:
    """Apply coefficient ``u`` for coordinate ``k`` (1-based) to a copy of ``w``."""
    out = np.array(w, dtype=np.complex128)
    if not 1 <= k <= out.shape[0]:
        raise StructuralError(f"coordinate {k} outside 1..{out.shape[0]}")
    if k == 1:
        out[1:] *= 1.0 - u
        out[0] -= u
    else:
        out[k - 1] -= u
    return out


def _coeff_or_zero(w, V, k):
    try:
        return eiss_coeff(w, V, k)
    except NumericError:
        return 0.0


def eiss_sweep(w, V, sequential: bool = True) -> np.ndarray:
    """One pass over coordinates ``1..n`` without normalization.

    With ``sequential=False`` every coefficient is computed from the filter at
    the start of the sweep (kept for A/B comparison only).
    """
    start = np.array(w, dtype=np.complex128)
    cur = start.copy()
    for k in range(1, start.shape[0] + 1):
        u = _coeff_or_zero(cur if sequential else start, V, k)
        cur = eiss_apply(cur, u, k)
    return cur


def eiss_update(w, V, n_sweeps: int = 1, sequential: bool = True) -> np.ndarray:
    """Full EISS update: ``n_sweeps`` sweeps, each followed by normalization.

    If a normalization degenerates, the last normalized filter is kept (the
    incoming one when ``n_sweeps == 1``).
    """
    w = np.asarray(w, dtype=np.complex128)
    V = check_square(V)
    cur = w
    for _ in range(n_sweeps):
        try:
            cur = normalize(eiss_sweep(cur, V, sequential=sequential))
        except DegenerateFilterError:
            break
    return np.array(cur)
