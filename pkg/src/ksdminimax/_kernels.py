"""Hot loops of Stein Gram assembly, in a numba and a pure-numpy flavour.

All kernels take points ``X`` with their target scores ``S`` (same shape) and
evaluate the Langevin-Stein kernel for the Gaussian RBF base kernel,

    K0(x, y) = k(x, y) * (<s_x, s_y> + 2g <s_x - s_y, x - y> + 2g d - 4g^2 |x - y|^2)

with ``k(x, y) = exp(-g |x - y|^2)``. Entries are independent, so results do
not depend on the numba thread count; sums are reduced per row and then
across rows in index order.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit, prange

# Rows per numpy chunk are picked so a chunk holds about this many floats.
_CHUNK_ELEMS = 1 << 21


@njit(cache=True, nogil=True, parallel=True)
def _block_nb(X, S, Y, T, gamma):
    nx, d = X.shape
    ny = Y.shape[0]
    out = np.empty((nx, ny))
    c0 = 2.0 * gamma * d
    for i in prange(nx):
        for j in range(ny):
            r2 = 0.0
            dot = 0.0
            cross = 0.0
            for c in range(d):
                dx = X[i, c] - Y[j, c]
                r2 += dx * dx
                dot += S[i, c] * T[j, c]
                cross += (S[i, c] - T[j, c]) * dx
            out[i, j] = math.exp(-gamma * r2) * (
                dot + 2.0 * gamma * cross + c0 - 4.0 * gamma * gamma * r2
            )
    return out


@njit(cache=True, nogil=True, parallel=True)
def _block_sym_nb(X, S, gamma):
    n, d = X.shape
    out = np.empty((n, n))
    c0 = 2.0 * gamma * d
    for i in prange(n):
        sii = 0.0
        for c in range(d):
            sii += S[i, c] * S[i, c]
        out[i, i] = sii + c0
        for j in range(i + 1, n):
            r2 = 0.0
            dot = 0.0
            cross = 0.0
            for c in range(d):
                dx = X[i, c] - X[j, c]
                r2 += dx * dx
                dot += S[i, c] * S[j, c]
                cross += (S[i, c] - S[j, c]) * dx
            v = math.exp(-gamma * r2) * (dot + 2.0 * gamma * cross + c0 - 4.0 * gamma * gamma * r2)
            out[i, j] = v
            out[j, i] = v
    return out


@njit(cache=True, nogil=True, parallel=True)
def _vsum_nb(X, S, gamma):
    n, d = X.shape
    rows = np.empty(n)
    c0 = 2.0 * gamma * d
    for i in prange(n):
        acc = 0.0
        for j in range(i + 1, n):
            r2 = 0.0
            dot = 0.0
            cross = 0.0
            for c in range(d):
                dx = X[i, c] - X[j, c]
                r2 += dx * dx
                dot += S[i, c] * S[j, c]
                cross += (S[i, c] - S[j, c]) * dx
            acc += math.exp(-gamma * r2) * (dot + 2.0 * gamma * cross + c0 - 4.0 * gamma * gamma * r2)
        sii = 0.0
        for c in range(d):
            sii += S[i, c] * S[i, c]
        rows[i] = 2.0 * acc + sii + c0
    total = 0.0
    for i in range(n):
        total += rows[i]
    return total


def _block_np(X, S, Y, T, gamma):
    nx, d = X.shape
    ny = Y.shape[0]
    out = np.empty((nx, ny))
    step = max(1, _CHUNK_ELEMS // max(1, ny * d))
    for a in range(0, nx, step):
        b = min(nx, a + step)
        diff = X[a:b, None, :] - Y[None, :, :]
        r2 = np.einsum("ijc,ijc->ij", diff, diff)
        dot = S[a:b] @ T.T
        cross = np.einsum("ijc,ijc->ij", S[a:b, None, :] - T[None, :, :], diff)
        out[a:b] = np.exp(-gamma * r2) * (dot + 2.0 * gamma * cross + 2.0 * gamma * d - 4.0 * gamma**2 * r2)
    return out


def _block_sym_np(X, S, gamma):
    out = _block_np(X, S, X, S, gamma)
    # Mirror the upper triangle so the result is exactly symmetric.
    iu = np.triu_indices(out.shape[0], 1)
    out.T[iu] = out[iu]
    return out


def _vsum_np(X, S, gamma):
    n, d = X.shape
    step = max(1, _CHUNK_ELEMS // max(1, n * d))
    total = 0.0
    for a in range(0, n, step):
        b = min(n, a + step)
        total += float(_block_np(X[a:b], S[a:b], X, S, gamma).sum())
    return total


NUMBA_IMPL = {"block": _block_nb, "block_sym": _block_sym_nb, "vsum": _vsum_nb}
NUMPY_IMPL = {"block": _block_np, "block_sym": _block_sym_np, "vsum": _vsum_np}
_ACTIVE = NUMBA_IMPL if USE_NUMBA else NUMPY_IMPL


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def stein_block(X, S, Y, T, gamma):
    """``[K0(X[i], Y[j])]`` as an ``(len(X), len(Y))`` array."""
    return _ACTIVE["block"](_c(X), _c(S), _c(Y), _c(T), float(gamma))


def stein_block_sym(X, S, gamma):
    """Symmetric ``[K0(X[i], X[j])]``; only the upper triangle is evaluated."""
    return _ACTIVE["block_sym"](_c(X), _c(S), float(gamma))


def stein_vsum(X, S, gamma):
    """``sum_{i,j} K0(X[i], X[j])`` without materialising the Gram matrix."""
    return float(_ACTIVE["vsum"](_c(X), _c(S), float(gamma)))
