"""Deliberately naive reference implementations used as test oracles.

Nothing here imports the package's numerical code. Loops are explicit and
DFTs are built from complex exponentials so that agreement with the package
is evidence, not tautology.
"""

from __future__ import annotations

import math

import numpy as np


def periodic_hann(n):
    return np.array([0.5 - 0.5 * math.cos(2 * math.pi * k / n) for k in range(n)])


def dft_matrix(n):
    """One-sided forward DFT as an explicit ``(n//2 + 1, n)`` matrix."""
    k = np.arange(n // 2 + 1)[:, None]
    t = np.arange(n)[None, :]
    return np.exp(-2j * np.pi * k * t / n)


def stft(x, frame_len, hop):
    """Frame ``j`` covers ``[j*hop - (frame_len - hop), ... + frame_len)`` of ``x``."""
    n_frames = -(-len(x) // hop)
    lead = frame_len - hop
    win = periodic_hann(frame_len)
    F = dft_matrix(frame_len)
    out = np.zeros((frame_len // 2 + 1, n_frames), dtype=complex)
    for j in range(n_frames):
        frame = np.zeros(frame_len)
        for t in range(frame_len):
            src = j * hop - lead + t
            if 0 <= src < len(x):
                frame[t] = x[src]
        out[:, j] = F @ (frame * win)
    return out


def inverse_rfft(spectrum, n):
    """Real inverse DFT from a one-sided spectrum, scaled by ``1/n``."""
    full = np.zeros(n, dtype=complex)
    half = len(spectrum)
    full[:half] = spectrum
    for k in range(half, n):
        full[k] = np.conj(spectrum[n - k])
    t = np.arange(n)
    return np.array(
        [np.sum(full * np.exp(2j * np.pi * np.arange(n) * tt / n)).real / n for tt in t]
    )


def stack(mic, refs, i, j, ctf_len):
    """Brute-force gather of the stacked observation for bin ``i``, frame ``j``."""
    order = len(refs)
    y = [mic[i, j]]
    for p in range(order):
        for lag in range(ctf_len):
            y.append(refs[p][i, j - lag] if j - lag >= 0 else 0.0)
    return np.array(y, dtype=complex)


def quad_form(w, V):
    n = len(w)
    total = 0j
    for a in range(n):
        for b in range(n):
            total += np.conj(w[a]) * V[a, b] * w[b]
    return total.real


def cov_update(V, y, phi, alpha):
    n = len(y)
    out = np.empty_like(V, dtype=complex)
    for a in range(n):
        for b in range(n):
            out[a, b] = alpha * V[a, b] + (1 - alpha) * phi * y[a] * np.conj(y[b])
    return out


def aux_norm(filters, obs):
    total = 0.0
    for w, y in zip(filters, obs):
        s = sum(np.conj(w[k]) * y[k] for k in range(len(w)))
        total += abs(s) ** 2
    return math.sqrt(total)


def ip_normalized(V):
    """Normalized first column of the explicit inverse."""
    col = np.linalg.inv(V)[:, 0]
    return col / col[0]


def eiss_objective(w, V):
    return quad_form(w, V) - 2 * math.log(abs(w[0]))


def ctf_echo(ref, filters):
    """``E[i, j] = sum_p sum_l A[p, i, l] X[p, i, j - l]`` by explicit loops."""
    order, n_bins, n_frames = ref.shape
    ctf_len = filters.shape[2]
    out = np.zeros((n_bins, n_frames), dtype=complex)
    for p in range(order):
        for i in range(n_bins):
            for j in range(n_frames):
                for lag in range(ctf_len):
                    if j - lag >= 0:
                        out[i, j] += filters[p, i, lag] * ref[p, i, j - lag]
    return out


def pipeline_spectra(Y, refs, ctf_len, alpha, beta, r_floor, v0, solver, n_sweeps=1):
    """Per-frame, per-bin reference loop on precomputed spectra.

    IP uses ``numpy.linalg.solve``; EISS follows the coordinate recipe with
    coefficients recomputed from scratch at every step. Returns the output
    spectrum and the filter trace.
    """
    n_bins, n_frames = Y.shape
    dim = len(refs) * ctf_len + 1
    V = np.array([v0 * np.eye(dim, dtype=complex) for _ in range(n_bins)])
    W = np.zeros((n_bins, dim), dtype=complex)
    W[:, 0] = 1
    out = np.zeros_like(Y, dtype=complex)
    trace = np.zeros((n_frames, n_bins, dim), dtype=complex)
    for j in range(n_frames):
        obs = [stack(Y, refs, i, j, ctf_len) for i in range(n_bins)]
        r = aux_norm(W, obs)
        phi = max(r, r_floor) ** (beta - 2)
        for i in range(n_bins):
            V[i] = alpha * V[i] + (1 - alpha) * phi * np.outer(obs[i], np.conj(obs[i]))
            if solver == "ip":
                w = np.linalg.solve(V[i], np.eye(dim)[:, 0])
                W[i] = w / w[0]
            else:
                w = W[i].copy()
                for _ in range(n_sweeps):
                    q = quad_form(w, V[i])
                    u1 = 1 - 1 / math.sqrt(q)
                    w[1:] *= 1 - u1
                    w[0] -= u1
                    for k in range(1, dim):
                        w[k] -= (V[i][k] @ w) / V[i][k, k].real
                    w = w / w[0]
                W[i] = w
            out[i, j] = np.conj(W[i]) @ obs[i]
            trace[j, i] = W[i]
    return out, trace


def random_pd(rng, n, m=None, ridge=0.0):
    """Complex Wishart-type Hermitian positive-definite matrix."""
    m = 2 * n if m is None else m
    X = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / math.sqrt(2)
    V = X @ X.conj().T / m + ridge * np.eye(n)
    return 0.5 * (V + V.conj().T)


def windowed_db(num, den, win):
    """Per-window power ratio in dB by explicit loops (no cap)."""
    out = []
    for start in range(0, len(num) - win + 1, win):
        pn = sum(v * v for v in num[start:start + win])
        pd = sum(v * v for v in den[start:start + win])
        out.append(10 * math.log10(pn / pd))
    return np.array(out)
