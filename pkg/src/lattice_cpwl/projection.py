"""Minimum-L2 projection onto the CPWL search space of a lattice.

The Gram matrix of the translates ``B_Xi(. - Xi k)`` is the 7-point stencil
``|det Xi| * a[k - l]``; the right-hand side ``<f, B_Xi(. - Xi k)>`` is
assembled triangle by triangle, where every basis function is affine.  The
infinite index set is truncated to the region dilated by a few lattice cells;
registry functions decay below 1e-14 outside their effective support, so the
truncation error is far below every tolerance used here.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .asymptotics import asym_error_spatial
from .errors import QuadratureUnderResolved, SolverDiverged
from .functions import TestFunction
from .lattice import IndexBox, LatticeSpec, build_grid, covering_index_box
from .quadrature import triangle_rule

log = logging.getLogger(__name__)

DEFAULT_ORDER = 6
DEFAULT_MARGIN = 2
CG_RTOL = 1e-12
# points per f-evaluation batch
_BATCH = 1 << 21


@dataclass
class CoefficientGrid:
    """Expansion ``s = sum_k coeffs[k] B_Xi(. - Xi k)`` over a rectangular index box."""

    spec: LatticeSpec
    index_box: IndexBox
    coeffs: np.ndarray
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != self.index_box.shape:
            raise ValueError(f"coefficient shape {self.coeffs.shape} != index box shape {self.index_box.shape}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients must be finite")

    def __getitem__(self, k) -> float:
        if not self.index_box.contains(k):
            return 0.0
        return float(self.coeffs[k[0] - self.index_box.kmin[0], k[1] - self.index_box.kmin[1]])

    def evaluate(self, x1, x2):
        """Evaluate the CPWL expansion at physical points."""
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        u1, u2 = self.spec.to_reference(x1, x2)
        return kernels.expansion_eval(self.coeffs, self.index_box.kmin, u1, u2).reshape(x1.shape)

    __call__ = evaluate

    @classmethod
    def zeros(cls, spec: LatticeSpec, index_box: IndexBox) -> "CoefficientGrid":
        return cls(spec, index_box, np.zeros(index_box.shape))

    @classmethod
    def impulse(cls, spec: LatticeSpec, index_box: IndexBox, k0) -> "CoefficientGrid":
        cg = cls.zeros(spec, index_box)
        cg.coeffs[k0[0] - index_box.kmin[0], k0[1] - index_box.kmin[1]] = 1.0
        return cg


def _cell_diameter(spec: LatticeSpec) -> float:
    x1, x2 = spec.xi[:, 0], spec.xi[:, 1]
    return float(max(np.linalg.norm(x1 + x2), np.linalg.norm(x1 - x2)))


def index_box_for(spec: LatticeSpec, region, margin: float = DEFAULT_MARGIN) -> IndexBox:
    """Index box covering ``region`` dilated by ``margin`` lattice cells."""
    return covering_index_box(spec, region, margin * _cell_diameter(spec))


def gram_apply(spec: LatticeSpec, c: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Gram matrix-vector product ``G c`` with ``G[k, l] = |det Xi| a[k - l]``."""
    return kernels.stencil_apply(c, spec.abs_det, out)


def conjugate_gradient(apply, b: np.ndarray, rtol: float = CG_RTOL, maxiter: int | None = None):
    """Plain CG for an SPD operator on arrays of any shape.

    Returns ``(x, iterations)``.  Raises :class:`SolverDiverged` when the
    relative residual is still above ``rtol`` after ``maxiter`` steps
    (default ``10 * b.size``).
    """
    maxiter = 10 * b.size if maxiter is None else maxiter
    x = np.zeros_like(b)
    bnorm = math.sqrt(float(np.vdot(b, b)))
    if bnorm == 0.0:
        return x, 0
    r = b.copy()
    p = r.copy()
    rr = float(np.vdot(r, r))
    Ap = np.empty_like(b)
    for it in range(1, maxiter + 1):
        apply(p, Ap)
        alpha = rr / float(np.vdot(p, Ap))
        x += alpha * p
        r -= alpha * Ap
        rr_new = float(np.vdot(r, r))
        if math.sqrt(rr_new) <= rtol * bnorm:
            return x, it
        p *= rr_new / rr
        p += r
        rr = rr_new
    raise SolverDiverged(f"CG did not reach rtol={rtol:g} in {maxiter} iterations")


class _TriangleQuad:
    """Quadrature data on both triangles of a reference cell."""

    def __init__(self, order: int):
        a, b, w = triangle_rule(order)
        # lower triangle: u1 >= u2 ; upper: swap coordinates
        self.lo = (a, b)
        self.up = (b, a)
        self.w = np.asarray(w)
        self.lam_lo = np.array([1.0 - a, a - b, b])
        self.lam_up = np.array([1.0 - a, a - b, b])  # same values at the swapped points

    def points(self, spec: LatticeSpec, kmin, rows: slice, ncols: int, which: str):
        """Physical coordinates ``(m1, ncols, nq)`` of the quadrature points of cell rows."""
        l1, l2 = self.lo if which == "lo" else self.up
        i = np.arange(rows.start, rows.stop, dtype=float)[:, None, None] + kmin[0]
        j = np.arange(ncols, dtype=float)[None, :, None] + kmin[1]
        u1 = i + l1[None, None, :]
        u2 = j + l2[None, None, :]
        return spec.to_physical(u1, u2)


def _row_batches(m1: int, m2: int, nq: int):
    step = max(1, _BATCH // max(1, m2 * nq))
    for s in range(0, m1, step):
        yield slice(s, min(m1, s + step))


def assemble_rhs(f: TestFunction, spec: LatticeSpec, index_box: IndexBox, order: int = DEFAULT_ORDER) -> np.ndarray:
    """``b[k] = <f, B_Xi(. - Xi k)>`` for every ``k`` in the index box.

    Basis functions centered outside the box still see their full support
    only if ``f`` vanishes near the box boundary; callers pick the box so that
    this holds.
    """
    tq = _TriangleQuad(order)
    n1, n2 = index_box.shape
    m1, m2 = n1 - 1, n2 - 1
    if m1 < 1 or m2 < 1:
        raise ValueError("index box must span at least one cell in each direction")
    wl = spec.abs_det * tq.w
    p_lo = np.empty((m1, m2, 3))
    p_up = np.empty((m1, m2, 3))
    mom_lo = (tq.lam_lo * wl).T  # (nq, 3)
    mom_up = (tq.lam_up * wl).T
    for rows in _row_batches(m1, m2, tq.w.size):
        x1, x2 = tq.points(spec, index_box.kmin, rows, m2, "lo")
        p_lo[rows] = np.asarray(f.value(x1, x2), dtype=float) @ mom_lo
        x1, x2 = tq.points(spec, index_box.kmin, rows, m2, "up")
        p_up[rows] = np.asarray(f.value(x1, x2), dtype=float) @ mom_up
    return kernels.rhs_gather(p_lo, p_up)


def solve_coefficients(spec: LatticeSpec, b: np.ndarray, rtol: float = CG_RTOL) -> tuple[np.ndarray, int]:
    return conjugate_gradient(lambda p, out: gram_apply(spec, p, out), b, rtol=rtol)


def project(
    f: TestFunction,
    spec: LatticeSpec,
    region=None,
    margin: float = DEFAULT_MARGIN,
    order: int = DEFAULT_ORDER,
    rtol: float = CG_RTOL,
) -> CoefficientGrid:
    """Least-squares projection of ``f`` onto the lattice's CPWL space.

    ``region`` defaults to ``f.effective_support``; the index box covers it
    dilated by ``margin`` lattice cells.
    """
    region = region if region is not None else f.effective_support
    if region is None:
        raise ValueError(f"{f.id} has no effective support; pass an explicit region")
    ibox = index_box_for(spec, region, margin)
    b = assemble_rhs(f, spec, ibox, order)
    c, iters = solve_coefficients(spec, b, rtol)
    log.debug("projected %s on %s: %d unknowns, %d CG iterations", f.id, ibox, ibox.size, iters)
    return CoefficientGrid(spec, ibox, c, info=dict(cg_iterations=iters, region=region, order=order))


def _cell_mask(spec: LatticeSpec, ibox: IndexBox, region) -> np.ndarray:
    (x0, x1), (y0, y1) = region
    n1, n2 = ibox.shape
    i = np.arange(n1 - 1)[:, None] + ibox.kmin[0] + 0.5
    j = np.arange(n2 - 1)[None, :] + ibox.kmin[1] + 0.5
    cx, cy = spec.to_physical(i, j)
    return (cx >= x0) & (cx <= x1) & (cy >= y0) & (cy <= y1)


def measure_error(f: TestFunction, cg: CoefficientGrid, region=None, order: int = DEFAULT_ORDER) -> float:
    """``||f - s||_L2`` over the lattice cells whose centers lie in ``region``.

    Integrates triangle by triangle, where ``s`` is affine, with an
    ``order x order`` collapsed Gauss rule per triangle.  ``region`` defaults
    to the one recorded by :func:`project`.
    """
    region = region if region is not None else cg.info.get("region", f.effective_support)
    if region is None:
        raise ValueError("no measurement region")
    spec, ibox = cg.spec, cg.index_box
    tq = _TriangleQuad(order)
    n1, n2 = ibox.shape
    m1, m2 = n1 - 1, n2 - 1
    mask = _cell_mask(spec, ibox, region)
    partial = []
    for rows in _row_batches(m1, m2, tq.w.size):
        if not mask[rows].any():
            continue
        f_lo = np.asarray(f.value(*tq.points(spec, ibox.kmin, rows, m2, "lo")), dtype=float)
        f_up = np.asarray(f.value(*tq.points(spec, ibox.kmin, rows, m2, "up")), dtype=float)
        partial.append(
            kernels.cell_error(f_lo, f_up, cg.coeffs, tq.lam_lo, tq.lam_up, tq.w, mask[rows], rows.start)
        )
    total = float(np.sum(np.concatenate(partial))) if partial else 0.0
    return math.sqrt(spec.abs_det * total)


def inner_with_basis(g, spec: LatticeSpec, k, order: int = DEFAULT_ORDER) -> float:
    """``<g, B_Xi(. - Xi k)>`` over the six triangles of the translate's support."""
    ibox = IndexBox((k[0] - 1, k[1] - 1), (k[0] + 1, k[1] + 1))
    f = g if isinstance(g, TestFunction) else TestFunction("callable", g, None)
    b = assemble_rhs(f, spec, ibox, order)
    return float(b[1, 1])


# ---------------------------------------------------------------- rate studies
EXACT_TOL = 1e-8


@dataclass
class RateRow:
    T: float
    eps_measured: float
    eps_asym: float
    ratio: float
    slope: float  # nan for the first row or when undefined


@dataclass
class RateReport:
    function_id: str
    theta1: float
    theta2: float
    rows: list[RateRow]

    @property
    def exact_reproduction(self) -> bool:
        return all(r.eps_measured <= EXACT_TOL for r in self.rows)

    @property
    def final_slope(self) -> float:
        return self.rows[-1].slope

    @property
    def fitted_slope(self) -> float:
        """Least-squares slope of ``log eps`` against ``log T`` over all rows."""
        T = np.log([r.T for r in self.rows])
        e = np.log([r.eps_measured for r in self.rows])
        return float(np.polyfit(T, e, 1)[0])

    def to_csv(self, stream=None) -> str:
        buf = stream if stream is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["T", "eps_measured", "eps_asym", "ratio", "slope"])
        exact = self.exact_reproduction
        for r in self.rows:
            if exact:
                slope = "exact"
            else:
                slope = "" if math.isnan(r.slope) else f"{r.slope:.17g}"
            ratio = "" if math.isnan(r.ratio) else f"{r.ratio:.17g}"
            w.writerow([f"{r.T:.17g}", f"{r.eps_measured:.17g}", f"{r.eps_asym:.17g}", ratio, slope])
        return buf.getvalue() if stream is None else ""


def rate_study(
    f: TestFunction,
    theta1: float,
    theta2: float,
    T_list,
    region=None,
    margin: float = DEFAULT_MARGIN,
    order: int = DEFAULT_ORDER,
    measure_region=None,
) -> RateReport:
    """Project ``f`` for each stepsize in ``T_list`` and compare with the dominant term.

    ``measure_region`` (default: the projection region) restricts the error
    measurement, e.g. to stay clear of the truncated boundary for functions
    that do not decay.
    """
    T_list = [float(t) for t in T_list]
    if len(T_list) < 4:
        raise ValueError("a rate study needs at least 4 stepsizes")
    if any(not 0.0 < t < 1.0 for t in T_list):
        raise ValueError("stepsizes must lie in (0, 1)")
    if any(b >= a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("stepsizes must be strictly decreasing")
    rows: list[RateRow] = []
    for T in T_list:
        spec = build_grid(theta1, theta2, T)
        cg = project(f, spec, region=region, margin=margin, order=order)
        eps = measure_error(f, cg, region=measure_region, order=order)
        try:
            asym = asym_error_spatial(f, spec)
        except QuadratureUnderResolved:
            asym = float("nan")
        ratio = eps / asym if asym > 0 else float("nan")
        slope = float("nan")
        if rows and eps > EXACT_TOL and rows[-1].eps_measured > EXACT_TOL:
            prev = rows[-1]
            slope = math.log(prev.eps_measured / eps) / math.log(prev.T / T)
        rows.append(RateRow(T, eps, asym, ratio, slope))
        log.info("T=%.6g eps=%.6e asym=%.6e ratio=%.6f", T, eps, asym, ratio)
    return RateReport(f.id, theta1, theta2, rows)
