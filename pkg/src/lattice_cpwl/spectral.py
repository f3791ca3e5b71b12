"""Fourier-domain error machinery for the Cartesian CPWL box spline.

The orthogonal-projection error kernel ``1 - |phi_hat|^2 / A_phi`` is O(|w|^4)
at the origin, so evaluating it literally loses every significant digit once
``|w|`` drops below ~1e-3.  :func:`error_kernel` uses the identity

    A_phi - phi_hat^2 = sum_i g(t_i) - sum_{i<j} p(t_i) p(t_j) + p(t_1) p(t_2) p(t_3)

with ``t = (w1/2, w2/2, (w1+w2)/2)``, ``p(t) = 1 - sinc(t)^2`` and
``g(t) = p(t) - sin(t)^2 / 3 = O(t^4)``; both helpers switch to their Taylor
series for small arguments, so no subtraction of nearly equal numbers remains.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .boxspline import _out, _split, fourier_cartesian

# six neighbours at 1/12 (a[k] = a[-k]) plus 1/2 at the origin
STENCIL_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1))
STENCIL_CENTER = 0.5
STENCIL_NEIGHBOR = 1.0 / 12.0

_SERIES_CUTOFF = 0.5

# Taylor coefficients in t^2: p(t) = sum P[n] t^(2n+2), g(t) = sum G[n] t^(2n+4)
_P_COEFFS = [
    Fraction(1, 3), Fraction(-2, 45), Fraction(1, 315), Fraction(-2, 14175),
    Fraction(2, 467775), Fraction(-4, 42567525), Fraction(1, 638512875),
    Fraction(-2, 97692469875), Fraction(2, 9280784638125),
]
_G_COEFFS = [
    Fraction(1, 15), Fraction(-11, 945), Fraction(13, 14175), Fraction(-4, 93555),
    Fraction(34, 25540515), Fraction(-19, 638512875), Fraction(1, 1993723875),
    Fraction(-184, 27842353914375), Fraction(2, 28584816685425),
]
_P = np.array([float(c) for c in _P_COEFFS])
_G = np.array([float(c) for c in _G_COEFFS])


def _horner(coeffs, s):
    acc = np.zeros_like(s)
    for c in coeffs[::-1]:
        acc = acc * s + c
    return acc


def _p(t):
    """``1 - sinc(t)^2``."""
    small = np.abs(t) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, t)
    direct = 1.0 - (np.sin(safe) / safe) ** 2
    s = t * t
    return np.where(small, s * _horner(_P, s), direct)


def _g(t):
    """``1 - sin(t)^2 (1/t^2 + 1/3)``."""
    small = np.abs(t) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, t)
    sn = np.sin(safe)
    direct = 1.0 - sn * sn * (1.0 / (safe * safe) + 1.0 / 3.0)
    s = t * t
    return np.where(small, s * s * _horner(_G, s), direct)


def autocorrelation(k) -> float:
    """Sampled autocorrelation ``a[k] = (phi * phi(-.))(k)``."""
    k = (int(k[0]), int(k[1]))
    if k == (0, 0):
        return STENCIL_CENTER
    if k in STENCIL_OFFSETS:
        return STENCIL_NEIGHBOR
    return 0.0


def autocorrelation_stencil() -> dict[tuple[int, int], float]:
    """Nonzero entries of the autocorrelation sequence."""
    out = {(0, 0): STENCIL_CENTER}
    out.update({k: STENCIL_NEIGHBOR for k in STENCIL_OFFSETS})
    return out


def a_phi(omega):
    """``1/2 + (cos w1 + cos w2 + cos(w1 + w2)) / 6``."""
    w1, w2, scalar = _split(omega)
    v = 0.5 + (np.cos(w1) + np.cos(w2) + np.cos(w1 + w2)) / 6.0
    return _out(v, scalar)


def a_phi_bruteforce(omega, K: int, chunk: int = 64):
    """Alias sum ``sum_{|k|_inf <= K} |phi_hat(w + 2 pi k)|^2``.

    Terms are accumulated in a fixed order (rows of ``k1``), so the result
    does not depend on ``chunk``.
    """
    if K < 0:
        raise ValueError("truncation radius K must be >= 0")
    w1, w2, scalar = _split(omega)
    w1 = np.atleast_1d(w1)[..., None]
    w2 = np.atleast_1d(w2)[..., None]
    shifts = 2.0 * np.pi * np.arange(-K, K + 1)
    total = np.zeros(w1.shape[:-1])
    for k1 in shifts:
        row = np.zeros(w1.shape[:-1])
        for start in range(0, shifts.size, chunk):
            k2 = shifts[start : start + chunk]
            pts = np.stack(np.broadcast_arrays(w1 + k1, w2 + k2), axis=-1)
            row += np.sum(fourier_cartesian(pts) ** 2, axis=-1)
        total += row
    return _out(total[0] if scalar else total, scalar)


def error_kernel(omega):
    """Orthogonal-projection error kernel ``1 - phi_hat(w)^2 / A_phi(w)`` in ``[0, 1]``."""
    w1, w2, scalar = _split(omega)
    t1, t2, t3 = 0.5 * w1, 0.5 * w2, 0.5 * (w1 + w2)
    p1, p2, p3 = _p(t1), _p(t2), _p(t3)
    num = _g(t1) + _g(t2) + _g(t3) - (p1 * p2 + p1 * p3 + p2 * p3) + p1 * p2 * p3
    den = 0.5 + (np.cos(w1) + np.cos(w2) + np.cos(w1 + w2)) / 6.0
    v = num / den
    # roundoff can leave values a hair outside [0, 1]
    v = np.where((v < 0.0) & (v > -1e-14), 0.0, v)
    v = np.where((v > 1.0) & (v < 1.0 + 1e-14), 1.0, v)
    return _out(v, scalar)


def error_kernel_direct(omega):
    """Literal ``1 - phi_hat^2 / A_phi``; loses accuracy for small ``|w|``."""
    return 1.0 - np.asarray(fourier_cartesian(omega)) ** 2 / np.asarray(a_phi(omega))


def quadratic_form(omega):
    """``w1^2 + w1 w2 + w2^2``."""
    w1, w2, scalar = _split(omega)
    return _out(w1 * w1 + w1 * w2 + w2 * w2, scalar)


def taylor_dominant(omega, T: float):
    """Leading Taylor term ``T^4 / 720 * (w1^2 + w1 w2 + w2^2)^2`` of ``error_kernel(T w)``."""
    if not T > 0:
        raise ValueError("T must be positive")
    q = np.asarray(quadratic_form(omega))
    v = T**4 / 720.0 * q * q
    return float(v) if np.ndim(v) == 0 else v
