"""Compiled per-frame kernels shared by the streaming pipeline and the benchmark.

Every bin is processed by plain loops (no BLAS, no threading), so the run time
of :func:`run_frames` scales with the arithmetic of each solver. The kernels
mirror the numpy reference operations in :mod:`.ip`, :mod:`.eiss` and
:mod:`sbss_aec.model`; the test suite checks them against each other.
"""

import math

import numpy as np
from numba import njit

IP = 0
EISS = 1
IP_SOLVE = 2

NORMALIZE_TOL = 1e-12


@njit(cache=True, inline="always")
def _cov_update(V, y, phi, alpha):
    # upper triangle computed once and mirrored: exactly Hermitian
    n = y.shape[0]
    c = (1.0 - alpha) * phi
    for a in range(n):
        ya = c * y[a]
        V[a, a] = alpha * V[a, a].real + c * (y[a].real ** 2 + y[a].imag ** 2)
        for b in range(a + 1, n):
            v = alpha * V[a, b] + ya * y[b].conjugate()
            V[a, b] = v
            V[b, a] = v.conjugate()


@njit(cache=True, inline="always")
def _cholesky(V, L, inv_diag, load):
    """Lower Cholesky factor of ``V + load * I`` into ``L``; False if not PD.

    ``inv_diag`` receives the reciprocals of the (real) diagonal of ``L``.
    """
    n = V.shape[0]
    for j in range(n):
        s = V[j, j].real + load
        for k in range(j):
            s -= L[j, k].real ** 2 + L[j, k].imag ** 2
        if not s > 0.0:
            return False
        d = math.sqrt(s)
        inv = 1.0 / d
        L[j, j] = d
        inv_diag[j] = inv
        for i in range(j + 1, n):
            acc = V[i, j]
            for k in range(j):
                acc -= L[i, k] * L[j, k].conjugate()
            L[i, j] = acc * inv
    return True


@njit(cache=True, inline="always")
def _solve_e1(L, inv_diag, z, out):
    """Solve ``L L^H out = e_1`` given the Cholesky factor."""
    n = L.shape[0]
    z[0] = inv_diag[0]
    for i in range(1, n):
        acc = 0j
        for k in range(i):
            acc -= L[i, k] * z[k]
        z[i] = acc * inv_diag[i]
    for i in range(n - 1, -1, -1):
        acc = z[i]
        for k in range(i + 1, n):
            acc -= L[k, i].conjugate() * out[k]
        out[i] = acc * inv_diag[i]


@njit(cache=True, inline="always")
def _normalize_into(cand, w):
    """Copy ``cand / cand[0]`` into ``w``; leave ``w`` untouched if degenerate."""
    n = cand.shape[0]
    peak2 = 0.0
    for k in range(n):
        m2 = cand[k].real ** 2 + cand[k].imag ** 2
        if m2 > peak2:
            peak2 = m2
    first = cand[0]
    f2 = first.real ** 2 + first.imag ** 2
    if not (f2 > NORMALIZE_TOL ** 2 * peak2 and math.isfinite(peak2)):
        return False
    inv = first.conjugate() / f2
    for k in range(1, n):
        w[k] = cand[k] * inv
    w[0] = 1.0
    return True


@njit(cache=True, inline="always")
def _ip_bin(V, w, L, inv_diag, z, cand, jitter):
    n = V.shape[0]
    ok = _cholesky(V, L, inv_diag, 0.0)
    if not ok:
        tr = 0.0
        for k in range(n):
            tr += V[k, k].real
        load = jitter * tr / n
        if load > 0.0:
            ok = _cholesky(V, L, inv_diag, load)
    if not ok:
        return False
    _solve_e1(L, inv_diag, z, cand)
    return _normalize_into(cand, w)


@njit(cache=True, inline="always")
def _invert(V, A, Inv, load):
    """Gauss-Jordan inverse of ``V + load * I`` into ``Inv`` (partial pivoting).

    ``A`` is scratch. Returns False on a zero pivot or non-finite result.
    """
    n = V.shape[0]
    for a in range(n):
        for b in range(n):
            A[a, b] = V[a, b]
            Inv[a, b] = 0j
        A[a, a] += load
        Inv[a, a] = 1.0
    for c in range(n):
        piv = c
        best = A[c, c].real ** 2 + A[c, c].imag ** 2
        for r in range(c + 1, n):
            m2 = A[r, c].real ** 2 + A[r, c].imag ** 2
            if m2 > best:
                best = m2
                piv = r
        if not (best > 0.0 and math.isfinite(best)):
            return False
        if piv != c:
            for b in range(n):
                t = A[c, b]
                A[c, b] = A[piv, b]
                A[piv, b] = t
                t = Inv[c, b]
                Inv[c, b] = Inv[piv, b]
                Inv[piv, b] = t
        inv = A[c, c].conjugate() / best
        for b in range(n):
            A[c, b] *= inv
            Inv[c, b] *= inv
        for r in range(n):
            if r != c:
                f = A[r, c]
                if f != 0j:
                    for b in range(n):
                        A[r, b] -= f * A[c, b]
                        Inv[r, b] -= f * Inv[c, b]
    return True


@njit(cache=True, inline="always")
def _ip_inverse_bin(V, w, A, Inv, cand, jitter):
    n = V.shape[0]
    ok = _invert(V, A, Inv, 0.0)
    if not ok:
        tr = 0.0
        for k in range(n):
            tr += V[k, k].real
        load = jitter * tr / n
        if load > 0.0:
            ok = _invert(V, A, Inv, load)
    if not ok:
        return False
    for k in range(n):
        cand[k] = Inv[k, 0]
    return _normalize_into(cand, w)


@njit(cache=True, inline="always")
def _eiss_sweeps(V, w, Vw, cand, n_sweeps, have_vw):
    """EISS sweeps on one bin. ``Vw`` must hold ``V @ w`` if ``have_vw``."""
    n = V.shape[0]
    for k in range(n):
        cand[k] = w[k]
    for sweep in range(n_sweeps):
        if sweep > 0 or not have_vw:
            for a in range(n):
                acc = 0j
                for b in range(n):
                    acc += V[a, b] * cand[b]
                Vw[a] = acc
        q = 0.0
        for a in range(n):
            q += cand[a].real * Vw[a].real + cand[a].imag * Vw[a].imag
        if q > 0.0 and math.isfinite(q):
            u1 = 1.0 - 1.0 / math.sqrt(q)
            shift = u1 * (cand[0] - 1.0)
            scale = 1.0 - u1
            for a in range(n):
                cand[a] *= scale
                Vw[a] = scale * Vw[a] + shift * V[0, a].conjugate()
            # first element becomes w0 - u1 rather than (1 - u1) * w0
            cand[0] += shift
        for k in range(1, n):
            d = V[k, k].real
            if d > 0.0:
                u = Vw[k] * (1.0 / d)
                cand[k] -= u
                # column k of V read as the conjugated (contiguous) row k
                for a in range(n):
                    Vw[a] -= u * V[k, a].conjugate()
        if not _normalize_into(cand, w):
            return False
        if sweep + 1 < n_sweeps:
            for k in range(n):
                cand[k] = w[k]
    return True


@njit(cache=True, inline="always")
def _eiss_bin(V, w, Vw, cand, n_sweeps):
    return _eiss_sweeps(V, w, Vw, cand, n_sweeps, False)


@njit(cache=True, inline="always")
def _cov_update_matvec(V, y, phi, alpha, w, Vw):
    """:func:`_cov_update` fused with ``Vw = V_new @ w`` in one pass over the rows."""
    n = y.shape[0]
    c = (1.0 - alpha) * phi
    for a in range(n):
        ya = c * y[a]
        d = alpha * V[a, a].real + c * (y[a].real ** 2 + y[a].imag ** 2)
        V[a, a] = d
        acc = d * w[a]
        for b in range(a):
            acc += V[a, b] * w[b]
        for b in range(a + 1, n):
            v = alpha * V[a, b] + ya * y[b].conjugate()
            V[a, b] = v
            V[b, a] = v.conjugate()
            acc += v * w[b]
        Vw[a] = acc


@njit(cache=True)
def run_frames(V, w, Yt, alpha, beta, r_floor, solver, n_sweeps, jitter, S_out, trace):
    """Process ``Yt.shape[0]`` frames in place.

    Per frame: auxiliary norm from the current filters, prior weight,
    covariance update, solver update per bin, then output with the updated
    filters. ``trace`` is filled when its first dimension equals the frame
    count. Returns the number of (bin, frame) updates that kept the previous
    filter.
    """
    n_frames, n_bins, n = Yt.shape
    record = trace.shape[0] == n_frames
    L = np.zeros((n, n), dtype=np.complex128)
    Inv = np.zeros((n, n), dtype=np.complex128)
    inv_diag = np.zeros(n)
    z = np.zeros(n, dtype=np.complex128)
    vec = np.zeros(n, dtype=np.complex128)
    cand = np.zeros(n, dtype=np.complex128)
    held = 0
    for j in range(n_frames):
        acc = 0.0
        for i in range(n_bins):
            s = 0j
            for k in range(n):
                s += w[i, k].conjugate() * Yt[j, i, k]
            acc += s.real ** 2 + s.imag ** 2
        r = math.sqrt(acc)
        phi = max(r, r_floor) ** (beta - 2.0)
        for i in range(n_bins):
            Vi = V[i]
            wi = w[i]
            if solver == EISS:
                _cov_update_matvec(Vi, Yt[j, i], phi, alpha, wi, vec)
                ok = _eiss_sweeps(Vi, wi, vec, cand, n_sweeps, True)
            else:
                _cov_update(Vi, Yt[j, i], phi, alpha)
                if solver == IP:
                    ok = _ip_inverse_bin(Vi, wi, L, Inv, cand, jitter)
                else:
                    ok = _ip_bin(Vi, wi, L, inv_diag, z, cand, jitter)
            if not ok:
                held += 1
            s = 0j
            for k in range(n):
                s += w[i, k].conjugate() * Yt[j, i, k]
            S_out[j, i] = s
            if record:
                for k in range(n):
                    trace[j, i, k] = w[i, k]
    return held


@njit(cache=True)
def apply_filters(trace, Yt, out):
    """``out[j, i] = trace[j, i]^H Yt[j, i]`` (no adaptation)."""
    n_frames, n_bins, n = Yt.shape
    for j in range(n_frames):
        for i in range(n_bins):
            s = 0j
            for k in range(n):
                s += trace[j, i, k].conjugate() * Yt[j, i, k]
            out[j, i] = s
