"""Registry of analytic test functions.

Every entry provides point values and the three distinct Hessian entries;
most also provide the Fourier transform ``f_hat(w) = int f(x) exp(-j w.x) dx``
and analytic norms.  The registry is closed: :func:`make_function` rejects
unknown ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import special

# amplitude ratio below which a Gaussian tail is treated as zero
TAIL = 1e-14
_TAIL_RADIUS = math.sqrt(2.0 * math.log(1.0 / TAIL))  # ~8.03 standard deviations
# extra room so that Hessian entries (x^2/s^4 factors) are also below the tail level
_SUPPORT_PAD = 1.08
_BAND_PAD = 1.15

Bounds = tuple[tuple[float, float], tuple[float, float]]


@dataclass(frozen=True)
class TestFunction:
    """Analytic test function bundle.

    ``hessian(x1, x2)`` returns ``(f_x1x1, f_x1x2, f_x2x2)``.
    ``effective_support`` is a box outside which ``|f|`` (and its Hessian) is
    below ~1e-14, or ``None`` when no such box exists.  ``fourier_support`` is
    ``("box", bounds)`` or ``("disk", radius)`` bounding the numerical support
    of ``f_hat``.
    """

    __test__ = False  # not a pytest class

    id: str
    value: Callable
    hessian: Callable
    fourier: Optional[Callable] = None
    effective_support: Optional[Bounds] = None
    fourier_support: Optional[tuple] = None
    laplacian_norm: Optional[float] = None
    hessian_norm: Optional[float] = None
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, x1, x2):
        return self.value(x1, x2)

    def hessian_matrix(self, x1, x2) -> np.ndarray:
        a, b, c = (np.asarray(v, dtype=float) for v in self.hessian(x1, x2))
        a, b, c = np.broadcast_arrays(a, b, c)
        return np.stack([np.stack([a, b], -1), np.stack([b, c], -1)], -2)


def _square(half: float, center=(0.0, 0.0)) -> Bounds:
    return ((center[0] - half, center[0] + half), (center[1] - half, center[1] + half))


def gaussian(sigma: float = 0.25, amplitude: float = 1.0, center=(0.0, 0.0)) -> TestFunction:
    """Isotropic Gaussian ``A exp(-|x - c|^2 / (2 sigma^2))``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    cx, cy = float(center[0]), float(center[1])
    s2 = sigma * sigma

    def value(x1, x2):
        r2 = (x1 - cx) ** 2 + (x2 - cy) ** 2
        return amplitude * np.exp(-r2 / (2.0 * s2))

    def hessian(x1, x2):
        y1, y2 = x1 - cx, x2 - cy
        f = value(x1, x2)
        return (f * (y1 * y1 / s2 - 1.0) / s2, f * y1 * y2 / (s2 * s2), f * (y2 * y2 / s2 - 1.0) / s2)

    def fourier(w1, w2):
        g = amplitude * 2.0 * math.pi * s2 * np.exp(-0.5 * s2 * (w1 * w1 + w2 * w2))
        if cx == 0.0 and cy == 0.0:
            return g
        return g * np.exp(-1j * (w1 * cx + w2 * cy))

    half = _TAIL_RADIUS * _SUPPORT_PAD * sigma
    band = _TAIL_RADIUS * _BAND_PAD / sigma
    norm = abs(amplitude) * math.sqrt(2.0 * math.pi) / sigma
    return TestFunction(
        id="gaussian",
        value=value,
        hessian=hessian,
        fourier=fourier,
        effective_support=_square(half, (cx, cy)),
        fourier_support=("box", _square(band)),
        laplacian_norm=norm,
        hessian_norm=norm,
        params=dict(sigma=sigma, amplitude=amplitude, center=(cx, cy)),
    )


def anisotropic_gaussian(
    sigma1: float = 0.3, sigma2: float = 0.15, angle: float = 0.4, amplitude: float = 1.0, center=(0.0, 0.0)
) -> TestFunction:
    """Rotated Gaussian ``A exp(-(x-c)^T P (x-c) / 2)`` with principal widths ``sigma1, sigma2``."""
    if sigma1 <= 0 or sigma2 <= 0:
        raise ValueError("widths must be positive")
    c, s = math.cos(angle), math.sin(angle)
    R = np.array([[c, -s], [s, c]])
    cov = R @ np.diag([sigma1**2, sigma2**2]) @ R.T
    P = R @ np.diag([sigma1**-2, sigma2**-2]) @ R.T
    p11, p12, p22 = P[0, 0], P[0, 1], P[1, 1]
    s11, s12, s22 = cov[0, 0], cov[0, 1], cov[1, 1]
    cx, cy = float(center[0]), float(center[1])

    def value(x1, x2):
        y1, y2 = x1 - cx, x2 - cy
        return amplitude * np.exp(-0.5 * (p11 * y1 * y1 + 2.0 * p12 * y1 * y2 + p22 * y2 * y2))

    def hessian(x1, x2):
        y1, y2 = x1 - cx, x2 - cy
        f = value(x1, x2)
        g1 = p11 * y1 + p12 * y2
        g2 = p12 * y1 + p22 * y2
        return (f * (g1 * g1 - p11), f * (g1 * g2 - p12), f * (g2 * g2 - p22))

    def fourier(w1, w2):
        g = amplitude * 2.0 * math.pi * sigma1 * sigma2 * np.exp(
            -0.5 * (s11 * w1 * w1 + 2.0 * s12 * w1 * w2 + s22 * w2 * w2)
        )
        if cx == 0.0 and cy == 0.0:
            return g
        return g * np.exp(-1j * (w1 * cx + w2 * cy))

    r = _TAIL_RADIUS * _SUPPORT_PAD
    hx, hy = r * math.sqrt(s11), r * math.sqrt(s22)
    # frequency-side ellipse w^T cov w = band^2
    b = _TAIL_RADIUS * _BAND_PAD
    bx, by = b * math.sqrt(p11), b * math.sqrt(p22)
    return TestFunction(
        id="anisotropic_gaussian",
        value=value,
        hessian=hessian,
        fourier=fourier,
        effective_support=((cx - hx, cx + hx), (cy - hy, cy + hy)),
        fourier_support=("box", ((-bx, bx), (-by, by))),
        params=dict(sigma1=sigma1, sigma2=sigma2, angle=angle, amplitude=amplitude, center=(cx, cy)),
    )


def windowed_sinusoid(a: float = 6.0, b: float = 4.0, width: float = 0.35) -> TestFunction:
    """Separable ``cos(a x1) cos(b x2) exp(-|x|^2 / (2 width^2))``."""
    if width <= 0:
        raise ValueError("width must be positive")
    s2 = width * width

    def _factor(x, k):
        e = np.exp(-x * x / (2.0 * s2))
        cs, sn = np.cos(k * x), np.sin(k * x)
        u = cs * e
        du = (-k * sn - x * cs / s2) * e
        d2u = (cs * (x * x / (s2 * s2) - k * k - 1.0 / s2) + 2.0 * k * x * sn / s2) * e
        return u, du, d2u

    def value(x1, x2):
        return _factor(x1, a)[0] * _factor(x2, b)[0]

    def hessian(x1, x2):
        u, du, d2u = _factor(x1, a)
        v, dv, d2v = _factor(x2, b)
        return (d2u * v, du * dv, u * d2v)

    def fourier(w1, w2):
        g = lambda p, q: 2.0 * math.pi * s2 * np.exp(-0.5 * s2 * (p * p + q * q))
        return 0.25 * (g(w1 - a, w2 - b) + g(w1 - a, w2 + b) + g(w1 + a, w2 - b) + g(w1 + a, w2 + b))

    half = _TAIL_RADIUS * _SUPPORT_PAD * width
    bx = abs(a) + _TAIL_RADIUS * _BAND_PAD / width
    by = abs(b) + _TAIL_RADIUS * _BAND_PAD / width
    return TestFunction(
        id="windowed_sinusoid",
        value=value,
        hessian=hessian,
        fourier=fourier,
        effective_support=_square(half),
        fourier_support=("box", ((-bx, bx), (-by, by))),
        params=dict(a=a, b=b, width=width),
    )


def fourier_disk(c: float = 1.0, omega_max: float = 1.0) -> TestFunction:
    """Band-limited ``f`` with ``f_hat = c`` on the disk ``|w| <= omega_max``.

    In space ``f(r) = c omega_max J1(omega_max r) / (2 pi r)``; it decays only
    like ``r^-3/2`` so it has no finite effective support.
    """
    if omega_max <= 0:
        raise ValueError("omega_max must be positive")
    w = float(omega_max)
    K = c * w / (2.0 * math.pi)

    def value(x1, x2):
        r = np.hypot(x1, x2)
        z = w * r
        small = z < 1e-3
        zs = np.where(small, 1.0, z)
        out = K * w * special.j1(zs) / zs
        return np.where(small, K * w * (0.5 - z * z / 16.0), out)

    def hessian(x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        r = np.hypot(x1, x2)
        z = w * r
        small = z < 1e-3
        zs = np.where(small, 1.0, z)
        j1, j2 = special.j1(zs), special.jv(2, zs)
        # radial profile g(r): g'/r and g'' in units of K w^3
        gp_r = np.where(small, -(1.0 / 8.0 - z * z / 96.0), -j2 / (zs * zs))
        gpp = np.where(small, -(1.0 / 8.0 - z * z / 32.0), -(zs * j1 - 3.0 * j2) / (zs * zs))
        scale = K * w**3
        rs = np.where(r > 0, r, 1.0)
        n1, n2 = np.where(r > 0, x1 / rs, 1.0), np.where(r > 0, x2 / rs, 0.0)
        d = gpp - gp_r
        return (scale * (gp_r + d * n1 * n1), scale * d * n1 * n2, scale * (gp_r + d * n2 * n2))

    def fourier(w1, w2):
        return np.where(w1 * w1 + w2 * w2 <= w * w, c, 0.0)

    norm = abs(c) * w**3 / math.sqrt(12.0 * math.pi)
    return TestFunction(
        id="fourier_disk",
        value=value,
        hessian=hessian,
        fourier=fourier,
        effective_support=None,
        fourier_support=("disk", w),
        laplacian_norm=norm,
        hessian_norm=norm,
        params=dict(c=c, omega_max=w),
    )


def affine(a0: float = 0.3, a1: float = -1.2, a2: float = 0.7) -> TestFunction:
    """``a0 + a1 x1 + a2 x2``; zero Hessian, no Fourier transform."""

    def value(x1, x2):
        return a0 + a1 * np.asarray(x1, float) + a2 * np.asarray(x2, float)

    def hessian(x1, x2):
        z = np.zeros(np.broadcast(np.asarray(x1), np.asarray(x2)).shape)
        return (z, z, z)

    return TestFunction(
        id="affine",
        value=value,
        hessian=hessian,
        laplacian_norm=0.0,
        hessian_norm=0.0,
        params=dict(a0=a0, a1=a1, a2=a2),
    )


def compose_linear(f: TestFunction, D) -> TestFunction:
    """``g(x) = f(D x)`` for an invertible 2x2 ``D`` (Hessian ``D^T H_f(Dx) D``)."""
    D = np.asarray(D, dtype=float)
    det = float(np.linalg.det(D))
    Dinv = np.linalg.inv(D)

    def value(x1, x2):
        return f.value(D[0, 0] * x1 + D[0, 1] * x2, D[1, 0] * x1 + D[1, 1] * x2)

    def hessian(x1, x2):
        h11, h12, h22 = f.hessian(D[0, 0] * x1 + D[0, 1] * x2, D[1, 0] * x1 + D[1, 1] * x2)
        # (D^T H D)_ij = sum_ab D_ai H_ab D_bj
        def ent(i, j):
            return (
                D[0, i] * h11 * D[0, j]
                + D[0, i] * h12 * D[1, j]
                + D[1, i] * h12 * D[0, j]
                + D[1, i] * h22 * D[1, j]
            )

        return (ent(0, 0), ent(0, 1), ent(1, 1))

    fourier = None
    if f.fourier is not None:
        DinvT = Dinv.T

        def fourier(w1, w2):
            return f.fourier(DinvT[0, 0] * w1 + DinvT[0, 1] * w2, DinvT[1, 0] * w1 + DinvT[1, 1] * w2) / abs(det)

    support = None
    if f.effective_support is not None:
        (x0, x1), (y0, y1) = f.effective_support
        cx = np.array([x0, x1, x1, x0])
        cy = np.array([y0, y0, y1, y1])
        u = Dinv @ np.vstack([cx, cy])
        support = ((u[0].min(), u[0].max()), (u[1].min(), u[1].max()))
    fsupport = None
    if f.fourier_support is not None and f.fourier_support[0] == "box":
        (x0, x1), (y0, y1) = f.fourier_support[1]
        cx = np.array([x0, x1, x1, x0])
        cy = np.array([y0, y0, y1, y1])
        u = D.T @ np.vstack([cx, cy])
        fsupport = ("box", ((u[0].min(), u[0].max()), (u[1].min(), u[1].max())))
    return TestFunction(
        id=f"{f.id}@linear",
        value=value,
        hessian=hessian,
        fourier=fourier,
        effective_support=support,
        fourier_support=fsupport,
        params=dict(base=f.id, D=D.tolist(), **f.params),
    )


def from_callable(id: str, value: Callable, effective_support: Bounds | None = None) -> TestFunction:
    """Wrap a plain callable (e.g. an element of the search space) without derivatives."""

    def hessian(x1, x2):
        raise NotImplementedError(f"{id} has no analytic Hessian")

    return TestFunction(id=id, value=value, hessian=hessian, effective_support=effective_support)


REGISTRY: dict[str, Callable[..., TestFunction]] = {
    "gaussian": gaussian,
    "anisotropic_gaussian": anisotropic_gaussian,
    "windowed_sinusoid": windowed_sinusoid,
    "fourier_disk": fourier_disk,
    "affine": affine,
}


def make_function(name: str, **params) -> TestFunction:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown test function {name!r}; choose from {sorted(REGISTRY)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name!r}: {exc}") from None


def with_support(f: TestFunction, bounds: Bounds) -> TestFunction:
    """Copy of ``f`` with an explicit integration window (e.g. for affine functions)."""
    return replace(f, effective_support=bounds)
