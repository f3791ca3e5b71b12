"""Grid matrices of 2D regular lattices parameterized by two angles and a stepsize.

The grid matrix is

    Xi = T / sqrt(|sin(theta2 - theta1)|) * [[cos theta1, cos theta2],
                                             [sin theta1, sin theta2]]

so that ``|det Xi| = T**2`` for every admissible pair of angles.  Its columns
``xi1, xi2`` (together with ``xi3 = xi1 + xi2``) are the edge directions of the
triangulation underlying every CPWL function of the search space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import DegenerateLattice

TWO_PI = 2.0 * math.pi
SIN_DELTA_TOL = 1e-9


def _reduce_angle(theta: float) -> float:
    t = math.fmod(float(theta), TWO_PI)
    if t < 0.0:
        t += TWO_PI
    # fmod can return 2*pi - tiny for inputs just below a multiple of 2*pi
    return 0.0 if t >= TWO_PI else t


@dataclass(frozen=True)
class LatticeSpec:
    """An immutable lattice ``{Xi k : k in Z^2}``.

    Attributes
    ----------
    theta1, theta2 : float
        Generator angles in radians, reduced to ``[0, 2*pi)``.
    stepsize : float
        The stepsize ``T``; ``|det xi| == T**2``.
    xi, xi_inv : ndarray
        The 2x2 grid matrix and its inverse (read-only arrays).
    """

    theta1: float
    theta2: float
    stepsize: float
    xi: np.ndarray = field(repr=False, compare=False)
    xi_inv: np.ndarray = field(repr=False, compare=False)

    @property
    def delta(self) -> float:
        """Angle difference ``theta2 - theta1`` reduced to ``[0, 2*pi)``."""
        return _reduce_angle(self.theta2 - self.theta1)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.xi))

    @property
    def abs_det(self) -> float:
        return self.stepsize**2

    @property
    def directions(self) -> np.ndarray:
        """The three box-spline directions as rows ``xi1, xi2, xi1 + xi2``."""
        x1 = self.xi[:, 0]
        x2 = self.xi[:, 1]
        return np.array([x1, x2, x1 + x2])

    def to_reference(self, x1, x2):
        """Map physical coordinates to lattice (index) coordinates ``Xi^-1 x``."""
        m = self.xi_inv
        return m[0, 0] * x1 + m[0, 1] * x2, m[1, 0] * x1 + m[1, 1] * x2

    def to_physical(self, u1, u2):
        m = self.xi
        return m[0, 0] * u1 + m[0, 1] * u2, m[1, 0] * u1 + m[1, 1] * u2

    def with_stepsize(self, T: float) -> "LatticeSpec":
        return build_grid(self.theta1, self.theta2, T)


def build_grid(theta1: float, theta2: float, T: float) -> LatticeSpec:
    """Build the grid matrix for angles ``theta1, theta2`` and stepsize ``T``.

    Raises
    ------
    DegenerateLattice
        If ``|sin(theta2 - theta1)| <= 1e-9``.
    ValueError
        If ``T`` is not a positive finite number.
    """
    T = float(T)
    if not (T > 0.0 and math.isfinite(T)):
        raise ValueError(f"stepsize must be positive and finite, got {T}")
    t1 = _reduce_angle(theta1)
    t2 = _reduce_angle(theta2)
    s = math.sin(t2 - t1)
    if abs(s) <= SIN_DELTA_TOL:
        raise DegenerateLattice(
            f"degenerate lattice: |sin(theta2 - theta1)| = {abs(s):.3g} <= {SIN_DELTA_TOL:g}"
        )
    scale = T / math.sqrt(abs(s))
    xi = scale * np.array([[math.cos(t1), math.cos(t2)], [math.sin(t1), math.sin(t2)]])
    # closed-form inverse: det = scale**2 * sin(t2 - t1)
    det = scale * scale * s
    xi_inv = np.array([[xi[1, 1], -xi[0, 1]], [-xi[1, 0], xi[0, 0]]]) / det
    xi.setflags(write=False)
    xi_inv.setflags(write=False)
    return LatticeSpec(theta1=t1, theta2=t2, stepsize=T, xi=xi, xi_inv=xi_inv)


PRESETS = {
    "cartesian": (0.0, math.pi / 2.0),
    "hexagonal": (0.0, 2.0 * math.pi / 3.0),
}


def preset(kind: str, T: float = 1.0) -> LatticeSpec:
    """``'cartesian'`` (T*I) or ``'hexagonal'`` (T*D_hex) lattice."""
    try:
        t1, t2 = PRESETS[kind]
    except KeyError:
        raise ValueError(f"unknown lattice preset {kind!r}; expected one of {sorted(PRESETS)}") from None
    return build_grid(t1, t2, T)


@dataclass(frozen=True)
class IndexBox:
    """Inclusive rectangular index set ``kmin <= k <= kmax`` in Z^2."""

    kmin: tuple[int, int]
    kmax: tuple[int, int]

    def __post_init__(self):
        kmin = (int(self.kmin[0]), int(self.kmin[1]))
        kmax = (int(self.kmax[0]), int(self.kmax[1]))
        if kmin[0] > kmax[0] or kmin[1] > kmax[1]:
            raise ValueError(f"empty index box {kmin}..{kmax}")
        object.__setattr__(self, "kmin", kmin)
        object.__setattr__(self, "kmax", kmax)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.kmax[0] - self.kmin[0] + 1, self.kmax[1] - self.kmin[1] + 1)

    @property
    def size(self) -> int:
        n1, n2 = self.shape
        return n1 * n2

    def contains(self, k) -> bool:
        return self.kmin[0] <= k[0] <= self.kmax[0] and self.kmin[1] <= k[1] <= self.kmax[1]

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Index arrays ``(K1, K2)`` of shape ``self.shape`` (``ij`` layout)."""
        k1 = np.arange(self.kmin[0], self.kmax[0] + 1)
        k2 = np.arange(self.kmin[1], self.kmax[1] + 1)
        return np.meshgrid(k1, k2, indexing="ij")

    def __iter__(self) -> Iterator[tuple[int, int]]:
        for a in range(self.kmin[0], self.kmax[0] + 1):
            for b in range(self.kmin[1], self.kmax[1] + 1):
                yield (a, b)


def _box_bounds(box) -> tuple[float, float, float, float]:
    (x0, x1), (y0, y1) = box
    if not (x0 <= x1 and y0 <= y1):
        raise ValueError(f"empty box {box}")
    return float(x0), float(x1), float(y0), float(y1)


def covering_index_box(spec: LatticeSpec, box, margin: float = 0.0) -> IndexBox:
    """Smallest index box whose lattice points cover ``box`` dilated by ``margin``.

    ``box`` is ``((xmin, xmax), (ymin, ymax))``; the rectangle's preimage under
    ``Xi`` is a parallelogram and the returned box is its integer hull.
    """
    x0, x1, y0, y1 = _box_bounds(box)
    x0, x1, y0, y1 = x0 - margin, x1 + margin, y0 - margin, y1 + margin
    cx = np.array([x0, x1, x1, x0])
    cy = np.array([y0, y0, y1, y1])
    u1, u2 = spec.to_reference(cx, cy)
    return IndexBox(
        (math.floor(u1.min()), math.floor(u2.min())),
        (math.ceil(u1.max()), math.ceil(u2.max())),
    )


def lattice_points(spec: LatticeSpec, box) -> list[tuple[tuple[int, int], tuple[float, float]]]:
    """All ``(k, Xi k)`` with ``Xi k`` inside the closed rectangle ``box``.

    Ordering is row-major in ``k`` (``k1`` outer, ``k2`` inner).
    """
    x0, x1, y0, y1 = _box_bounds(box)
    ib = covering_index_box(spec, box)
    K1, K2 = ib.indices()
    px, py = spec.to_physical(K1.astype(float), K2.astype(float))
    # absorb the rounding of Xi k so that boundary points count as inside
    tol = 1e-12 * max(1.0, abs(x0), abs(x1), abs(y0), abs(y1))
    inside = (px >= x0 - tol) & (px <= x1 + tol) & (py >= y0 - tol) & (py <= y1 + tol)
    out = []
    for a, b in zip(*np.nonzero(inside)):
        out.append(((int(K1[a, b]), int(K2[a, b])), (float(px[a, b]), float(py[a, b]))))
    return out
