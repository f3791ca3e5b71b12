"""CPWL box splines in the spatial and Fourier domains.

Points are passed as array-likes whose last axis has length 2; a single point
returns a Python float, a batch returns an array of the leading shape.
"""

from __future__ import annotations

import numpy as np

from .lattice import LatticeSpec

SINC_SERIES_THRESHOLD = 1e-4


def _split(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ValueError(f"expected points with a trailing axis of length 2, got shape {x.shape}")
    return x[..., 0], x[..., 1], x.ndim == 1


def _out(v, scalar):
    return float(v) if scalar else v


def sinc(t):
    """Unnormalized ``sin(t)/t`` with the removable singularity handled by series."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < SINC_SERIES_THRESHOLD
    safe = np.where(small, 1.0, t)
    t2 = t * t
    return np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(safe) / safe)


def cartesian_profile(u1, u2):
    """``max(1 + min(u1, u2, 0) - max(u1, u2, 0), 0)`` on arrays."""
    lo = np.minimum(np.minimum(u1, u2), 0.0)
    hi = np.maximum(np.maximum(u1, u2), 0.0)
    return np.maximum(1.0 + lo - hi, 0.0)


def eval_cartesian(x):
    """Cartesian CPWL box spline ``phi``.

    Continuous, piecewise linear on the six triangles of the hexagon
    ``{|x1| <= 1, |x2| <= 1, |x1 - x2| <= 1}``, with values in ``[0, 1]``.
    """
    x1, x2, scalar = _split(x)
    return _out(cartesian_profile(x1, x2), scalar)


def eval(spec: LatticeSpec, x):
    """Box spline ``B_Xi(x) = phi(Xi^-1 x)``."""
    x1, x2, scalar = _split(x)
    u1, u2 = spec.to_reference(x1, x2)
    return _out(cartesian_profile(u1, u2), scalar)


def fourier_cartesian(omega):
    """``phi_hat(w) = sinc((w1 + w2)/2) sinc(w1/2) sinc(w2/2)``."""
    w1, w2, scalar = _split(omega)
    v = sinc(0.5 * (w1 + w2)) * sinc(0.5 * w1) * sinc(0.5 * w2)
    return _out(v, scalar)


def fourier(spec: LatticeSpec, omega):
    """``|det Xi| * prod_r sinc(xi_r . w / 2)`` over ``xi1, xi2, xi1 + xi2``."""
    w1, w2, scalar = _split(omega)
    v = np.full(np.broadcast(w1, w2).shape, spec.abs_det)
    for d in spec.directions:
        v = v * sinc(0.5 * (d[0] * w1 + d[1] * w2))
    return _out(v, scalar)


class BoxSpline:
    """Box spline ``B_Xi`` bound to a lattice; callable in space, ``.hat`` in frequency."""

    def __init__(self, spec: LatticeSpec):
        self.spec = spec

    def __call__(self, x):
        return eval(self.spec, x)

    def hat(self, omega):
        return fourier(self.spec, omega)

    def __repr__(self):
        return f"BoxSpline({self.spec!r})"
