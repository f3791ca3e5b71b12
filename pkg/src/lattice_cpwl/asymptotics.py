"""Asymptotic error constants of CPWL approximation on a lattice.

For ``Xi`` built from angles ``theta1, theta2`` and stepsize ``T`` the dominant
error of the L2 projection is

    T^2 / (12 sqrt 5) * || alpha f_x1x1 + gamma f_x1x2 + beta f_x2x2 ||_L2

and ``C = sqrt(alpha^2 + beta^2 + gamma^2)`` bounds it in terms of the
Frobenius norm of the Hessian.  ``C`` is smallest (``sqrt(1.5)``) for
hexagonal lattices.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLattice, QuadratureUnderResolved
from .functions import TestFunction
from .lattice import SIN_DELTA_TOL, TWO_PI, LatticeSpec
from .quadrature import QuadSettings, integrate_box, integrate_disk

SQRT_720 = 12.0 * math.sqrt(5.0)
PLOT_CLIP = 10.0


@dataclass(frozen=True)
class AsymConstants:
    alpha: float
    beta: float
    gamma: float
    c_const: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


def _abg_arrays(theta1, theta2):
    c1, s1 = np.cos(theta1), np.sin(theta1)
    c2, s2 = np.cos(theta2), np.sin(theta2)
    d = np.abs(np.sin(theta2 - theta1))
    alpha = (c1 * c1 + c1 * c2 + c2 * c2) / d
    beta = (s1 * s1 + s1 * s2 + s2 * s2) / d
    gamma = (np.sin(2.0 * theta1) + np.sin(theta1 + theta2) + np.sin(2.0 * theta2)) / d
    return alpha, beta, gamma


def abg(theta1: float, theta2: float) -> AsymConstants:
    """``alpha, beta, gamma`` and ``C = sqrt(alpha^2 + beta^2 + gamma^2)`` for two angles."""
    if abs(math.sin(theta2 - theta1)) <= SIN_DELTA_TOL:
        raise DegenerateLattice(f"degenerate lattice: sin(theta2 - theta1) = {math.sin(theta2 - theta1):.3g}")
    a, b, g = (float(v) for v in _abg_arrays(theta1, theta2))
    return AsymConstants(a, b, g, math.sqrt(a * a + b * b + g * g))


def error_constant(theta1, theta2):
    """Vectorized ``C(theta1, theta2)``; ``nan`` where the lattice is degenerate."""
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    bad = np.abs(np.sin(theta2 - theta1)) <= SIN_DELTA_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        a, b, g = _abg_arrays(theta1, theta2)
        c = np.sqrt(a * a + b * b + g * g)
    return np.where(bad, np.nan, c)


def _constants(spec: LatticeSpec) -> AsymConstants:
    return abg(spec.theta1, spec.theta2)


def _require_support(f: TestFunction):
    if f.effective_support is None:
        raise QuadratureUnderResolved(
            f"{f.id} has no finite effective support; use the Fourier-side evaluation instead"
        )
    return f.effective_support


def asym_error_spatial(f: TestFunction, spec: LatticeSpec, quad: QuadSettings | None = None) -> float:
    """Dominant error term evaluated in space by adaptive tensor quadrature."""
    k = _constants(spec)

    def integrand(x1, x2):
        h11, h12, h22 = f.hessian(x1, x2)
        v = k.alpha * h11 + k.gamma * h12 + k.beta * h22
        return v * v

    if f.laplacian_norm == 0.0 and f.hessian_norm == 0.0:
        return 0.0
    val = integrate_box(integrand, _require_support(f), quad)
    return spec.stepsize**2 / SQRT_720 * math.sqrt(max(val, 0.0))


def _fourier_integral(f: TestFunction, weight, quad: QuadSettings | None) -> float:
    if f.fourier is None or f.fourier_support is None:
        raise ValueError(f"{f.id} has no Fourier representation")

    def integrand(w1, w2):
        fh = f.fourier(w1, w2)
        return weight(w1, w2) * (fh.real**2 + fh.imag**2 if np.iscomplexobj(fh) else fh * fh)

    kind, extent = f.fourier_support
    if kind == "box":
        return integrate_box(integrand, extent, quad)
    if kind == "disk":
        return integrate_disk(integrand, extent, quad)
    raise ValueError(f"unknown Fourier support kind {kind!r}")


def asym_error_fourier(f: TestFunction, spec: LatticeSpec, quad: QuadSettings | None = None) -> float:
    """Same quantity from ``T^4/(2880 pi^2) int ((alpha z1^2 + gamma z1 z2 + beta z2^2) f_hat)^2``."""
    k = _constants(spec)

    def weight(z1, z2):
        q = k.alpha * z1 * z1 + k.gamma * z1 * z2 + k.beta * z2 * z2
        return q * q

    val = _fourier_integral(f, weight, quad)
    return math.sqrt(spec.stepsize**4 / (2880.0 * math.pi**2) * val)


def hessian_frobenius_norm(f: TestFunction, quad: QuadSettings | None = None) -> float:
    """``||H_f||_{F,L2}``: analytic when registered, else spatial or Fourier quadrature."""
    if f.hessian_norm is not None:
        return f.hessian_norm
    if f.effective_support is not None:

        def integrand(x1, x2):
            h11, h12, h22 = f.hessian(x1, x2)
            return h11 * h11 + 2.0 * h12 * h12 + h22 * h22

        return math.sqrt(integrate_box(integrand, f.effective_support, quad))
    val = _fourier_integral(f, lambda z1, z2: (z1 * z1 + z2 * z2) ** 2, quad)
    return math.sqrt(val) / (2.0 * math.pi)


def upper_bound(f: TestFunction, spec: LatticeSpec, quad: QuadSettings | None = None) -> float:
    """Hoelder bound ``C T^2 ||H_f||_{F,L2} / (12 sqrt 5)``."""
    k = _constants(spec)
    return k.c_const * spec.stepsize**2 * hessian_frobenius_norm(f, quad) / SQRT_720


_DISK_DENOM = {"cartesian": 7680.0, "hexagonal": 11520.0}


def fourier_disk_asym(kind: str, c: float, omega_max: float, T: float) -> float:
    """Closed-form dominant error for the Fourier-disk function on the two presets."""
    if omega_max <= 0 or T <= 0:
        raise ValueError("omega_max and T must be positive")
    try:
        denom = _DISK_DENOM[kind]
    except KeyError:
        raise ValueError(f"kind must be 'cartesian' or 'hexagonal', got {kind!r}") from None
    return T * T * abs(c) * omega_max**3 / math.sqrt(denom * math.pi)


@dataclass
class SweepTable:
    """``M(theta1, delta) = C(theta1, theta1 + delta)`` on a tensor grid.

    ``values[i, j]`` belongs to ``theta1[i]`` and ``delta[j]``.
    """

    theta1: np.ndarray
    delta: np.ndarray
    values: np.ndarray

    @property
    def min(self) -> float:
        return float(np.nanmin(self.values))

    @property
    def argmin(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.nanargmin(self.values), self.values.shape)
        return float(self.theta1[i]), float(self.delta[j])

    def near_minimum(self, atol: float) -> tuple[np.ndarray, np.ndarray]:
        """``(theta1, delta)`` of all samples within ``atol`` of the minimum."""
        i, j = np.nonzero(self.values <= self.min + atol)
        return self.theta1[i], self.delta[j]

    def to_csv(self, stream=None, plot: bool = False) -> str:
        """``theta1,delta,M`` rows, 17 significant digits.

        With ``plot=True`` values ``>= 10`` are written as empty fields.
        """
        buf = stream if stream is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta1", "delta", "M"])
        for i, t in enumerate(self.theta1):
            for j, d in enumerate(self.delta):
                m = self.values[i, j]
                cell = "" if plot and not (m < PLOT_CLIP) else f"{m:.17g}"
                w.writerow([f"{t:.17g}", f"{d:.17g}", cell])
        return buf.getvalue() if stream is None else ""


def sweep_axis(lo: float, hi: float, steps: int) -> np.ndarray:
    """``steps`` interior samples ``lo + (hi - lo) (j + 1) / (steps + 1)``."""
    if steps < 2:
        raise ValueError("need at least 2 steps per axis")
    return lo + (hi - lo) * np.arange(1, steps + 1) / (steps + 1)


def sweep_landscape(theta1_range=(0.0, TWO_PI), delta_range=(0.0, TWO_PI), steps=500) -> SweepTable:
    """Tabulate ``M(theta1, delta)`` on open interior grids of both ranges.

    ``steps`` is an int or a ``(n_theta1, n_delta)`` pair.  Samples with
    ``|sin delta| <= 1e-9`` are dropped.  With the default ranges, ``steps + 1``
    divisible by 3 puts ``2 pi/3`` and ``4 pi/3`` exactly on the delta grid.
    """
    n1, n2 = (steps, steps) if np.ndim(steps) == 0 else steps
    t1 = sweep_axis(*theta1_range, n1)
    d = sweep_axis(*delta_range, n2)
    d = d[np.abs(np.sin(d)) > SIN_DELTA_TOL]
    T1, D = np.meshgrid(t1, d, indexing="ij")
    return SweepTable(t1, d, error_constant(T1, T1 + D))
