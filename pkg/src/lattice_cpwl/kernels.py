"""Hot loops of the projection solver, in numba and pure-numpy flavours.

Coefficient arrays are laid out ``c[i, j]`` for ``k = kmin + (i, j)``.  Cell
``(i, j)`` is the reference square with lower-left corner ``(i, j)``; it splits
along its diagonal into a lower triangle (``u1 >= u2``; corners (0,0), (1,0),
(1,1)) and an upper triangle (``u2 >= u1``; corners (0,0), (0,1), (1,1)).

Every kernel returns per-row partial results that callers reduce with
``np.sum``, so the answer does not depend on the number of numba threads.
The backend is picked by :func:`lattice_cpwl._accel.requested_backend` at
call time.
"""

from __future__ import annotations

import numpy as np

from ._accel import njit, prange, requested_backend

C0 = 0.5
C1 = 1.0 / 12.0


# ---------------------------------------------------------------- numba
@njit(parallel=True)
def _stencil_nb(c, scale, out):
    n1, n2 = c.shape
    for i in prange(n1):
        for j in range(n2):
            acc = C0 * c[i, j]
            nb = 0.0
            if i > 0:
                nb += c[i - 1, j]
            if i + 1 < n1:
                nb += c[i + 1, j]
            if j > 0:
                nb += c[i, j - 1]
            if j + 1 < n2:
                nb += c[i, j + 1]
            if i > 0 and j > 0:
                nb += c[i - 1, j - 1]
            if i + 1 < n1 and j + 1 < n2:
                nb += c[i + 1, j + 1]
            out[i, j] = scale * (acc + C1 * nb)
    return out


@njit(parallel=True)
def _rhs_gather_nb(p_lo, p_up, b):
    m1, m2 = p_lo.shape[0], p_lo.shape[1]
    n1, n2 = m1 + 1, m2 + 1
    for i in prange(n1):
        for j in range(n2):
            acc = 0.0
            if i < m1 and j < m2:
                acc += p_lo[i, j, 0] + p_up[i, j, 0]
            if i > 0 and j < m2:
                acc += p_lo[i - 1, j, 1]
            if j > 0 and i < m1:
                acc += p_up[i, j - 1, 1]
            if i > 0 and j > 0:
                acc += p_lo[i - 1, j - 1, 2] + p_up[i - 1, j - 1, 2]
            b[i, j] = acc
    return b


@njit(parallel=True)
def _cell_error_nb(f_lo, f_up, c, lam_lo, lam_up, w, mask, row0):
    m1, m2, nq = f_lo.shape
    out = np.zeros(m1)
    for ii in prange(m1):
        i = ii + row0
        acc = 0.0
        for j in range(m2):
            if not mask[ii, j]:
                continue
            c00 = c[i, j]
            c10 = c[i + 1, j]
            c01 = c[i, j + 1]
            c11 = c[i + 1, j + 1]
            cell = 0.0
            for q in range(nq):
                s = c00 * lam_lo[0, q] + c10 * lam_lo[1, q] + c11 * lam_lo[2, q]
                e = f_lo[ii, j, q] - s
                cell += w[q] * e * e
                s = c00 * lam_up[0, q] + c01 * lam_up[1, q] + c11 * lam_up[2, q]
                e = f_up[ii, j, q] - s
                cell += w[q] * e * e
            acc += cell
        out[ii] = acc
    return out


@njit(parallel=True)
def _expansion_nb(c, k1min, k2min, u1, u2, out):
    n1, n2 = c.shape
    for p in prange(u1.size):
        a = np.floor(u1[p])
        b = np.floor(u2[p])
        s = u1[p] - a
        t = u2[p] - b
        i = int(a) - k1min
        j = int(b) - k2min
        if s >= t:
            w0, w1, w2 = 1.0 - s, s - t, t
            di, dj = 1, 0
        else:
            w0, w1, w2 = 1.0 - t, t - s, s
            di, dj = 0, 1
        acc = 0.0
        if 0 <= i < n1 and 0 <= j < n2:
            acc += w0 * c[i, j]
        if 0 <= i + di < n1 and 0 <= j + dj < n2:
            acc += w1 * c[i + di, j + dj]
        if 0 <= i + 1 < n1 and 0 <= j + 1 < n2:
            acc += w2 * c[i + 1, j + 1]
        out[p] = acc
    return out


# ---------------------------------------------------------------- numpy
def _stencil_np(c, scale, out):
    p = np.pad(c, 1)
    nb = (
        p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] + p[:-2, :-2] + p[2:, 2:]
    )
    out[...] = scale * (C0 * c + C1 * nb)
    return out


def _rhs_gather_np(p_lo, p_up, b):
    b[...] = 0.0
    b[:-1, :-1] += p_lo[:, :, 0] + p_up[:, :, 0]
    b[1:, :-1] += p_lo[:, :, 1]
    b[:-1, 1:] += p_up[:, :, 1]
    b[1:, 1:] += p_lo[:, :, 2] + p_up[:, :, 2]
    return b


def _cell_error_np(f_lo, f_up, c, lam_lo, lam_up, w, mask, row0):
    m1, m2, _ = f_lo.shape
    c00 = c[row0 : row0 + m1, :m2, None]
    c10 = c[row0 + 1 : row0 + 1 + m1, :m2, None]
    c01 = c[row0 : row0 + m1, 1 : m2 + 1, None]
    c11 = c[row0 + 1 : row0 + 1 + m1, 1 : m2 + 1, None]
    s_lo = c00 * lam_lo[0] + c10 * lam_lo[1] + c11 * lam_lo[2]
    s_up = c00 * lam_up[0] + c01 * lam_up[1] + c11 * lam_up[2]
    e = ((f_lo - s_lo) ** 2 + (f_up - s_up) ** 2) @ w
    return np.where(mask, e, 0.0).sum(axis=1)


def _expansion_np(c, k1min, k2min, u1, u2, out):
    n1, n2 = c.shape
    a = np.floor(u1)
    b = np.floor(u2)
    s = u1 - a
    t = u2 - b
    i = a.astype(np.int64) - k1min
    j = b.astype(np.int64) - k2min
    lower = s >= t
    w0 = np.where(lower, 1.0 - s, 1.0 - t)
    w1 = np.where(lower, s - t, t - s)
    w2 = np.where(lower, t, s)
    di = lower.astype(np.int64)
    dj = 1 - di

    def take(ii, jj):
        ok = (ii >= 0) & (ii < n1) & (jj >= 0) & (jj < n2)
        return np.where(ok, c[np.clip(ii, 0, n1 - 1), np.clip(jj, 0, n2 - 1)], 0.0)

    out[...] = w0 * take(i, j) + w1 * take(i + di, j + dj) + w2 * take(i + 1, j + 1)
    return out


# ---------------------------------------------------------------- dispatch
def _pick(nb, np_):
    return nb if requested_backend() == "numba" else np_


def stencil_apply(c: np.ndarray, scale: float, out: np.ndarray | None = None) -> np.ndarray:
    """``out = scale * (c/2 + (sum of the six neighbours)/12)`` with zero padding."""
    c = np.ascontiguousarray(c, dtype=float)
    if out is None:
        out = np.empty_like(c)
    return _pick(_stencil_nb, _stencil_np)(c, float(scale), out)


def rhs_gather(p_lo: np.ndarray, p_up: np.ndarray) -> np.ndarray:
    """Collect per-triangle corner moments ``(m1, m2, 3)`` into nodal sums ``(m1+1, m2+1)``."""
    p_lo = np.ascontiguousarray(p_lo, dtype=float)
    p_up = np.ascontiguousarray(p_up, dtype=float)
    b = np.empty((p_lo.shape[0] + 1, p_lo.shape[1] + 1))
    return _pick(_rhs_gather_nb, _rhs_gather_np)(p_lo, p_up, b)


def cell_error(f_lo, f_up, c, lam_lo, lam_up, w, mask, row0: int = 0) -> np.ndarray:
    """Per-row sums of ``sum_q w_q (f - s)^2`` over both triangles of masked cells.

    ``f_lo``/``f_up`` hold ``f`` at the quadrature points of cell rows
    ``row0 .. row0 + m1 - 1``; ``c`` is the full coefficient array.
    """
    args = (
        np.ascontiguousarray(f_lo, dtype=float),
        np.ascontiguousarray(f_up, dtype=float),
        np.ascontiguousarray(c, dtype=float),
        np.ascontiguousarray(lam_lo, dtype=float),
        np.ascontiguousarray(lam_up, dtype=float),
        np.ascontiguousarray(w, dtype=float),
        np.ascontiguousarray(mask, dtype=np.bool_),
        int(row0),
    )
    return _pick(_cell_error_nb, _cell_error_np)(*args)


def expansion_eval(c: np.ndarray, kmin, u1, u2) -> np.ndarray:
    """``sum_k c[k] phi(u - k)`` at reference coordinates ``u`` (flat arrays)."""
    u1 = np.ascontiguousarray(u1, dtype=float).ravel()
    u2 = np.ascontiguousarray(u2, dtype=float).ravel()
    out = np.empty(u1.size)
    c = np.ascontiguousarray(c, dtype=float)
    return _pick(_expansion_nb, _expansion_np)(c, int(kmin[0]), int(kmin[1]), u1, u2, out)
