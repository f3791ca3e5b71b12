"""Exact two-hidden-layer ReLU networks for CPWL functions on a Cartesian grid.

The Cartesian box spline is ``ReLU(1 - ReLU(x1 - x2) - ReLU(x2) - ReLU(-x1))``.
A function ``s = sum_k c[k] phi(x/T - k)`` on ``(0, 1)^2`` therefore needs
three first-layer units and one second-layer unit per interior lattice point,
``4 (1/T - 1)^2`` neurons in all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boxspline import _out, _split, cartesian_profile
from .errors import InvalidStepsize
from .lattice import IndexBox, preset
from .projection import CoefficientGrid

FORMAT_TAG = "# lattice_cpwl relu-network v1"


def relu(x):
    return np.maximum(x, 0.0)


def relu_eval_cartesian(x):
    """Cartesian box spline through its ReLU composition."""
    x1, x2, scalar = _split(x)
    v = relu(1.0 - relu(x1 - x2) - relu(x2) - relu(-x1))
    return _out(v, scalar)


@dataclass(frozen=True)
class ReluNetwork:
    """Two hidden ReLU layers and a linear read-out.

    ``w1 (3N, 2)``, ``b1 (3N,)``: first layer.  Second-layer unit ``n`` reads
    first-layer units ``in2[n]`` with weights ``w2[n]`` and bias ``b2[n]``.
    ``out`` holds the read-out weights (no bias).
    """

    w1: np.ndarray
    b1: np.ndarray
    in2: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    out: np.ndarray

    @property
    def neuron_count(self) -> int:
        return int(self.w1.shape[0] + self.w2.shape[0])

    @property
    def basis_count(self) -> int:
        return int(self.w2.shape[0])

    def __call__(self, x):
        return forward(self, x)


def stepsize_count(T: float) -> int:
    """``n = 1/T`` for stepsizes of the form ``1/n`` with ``n >= 2``."""
    if not T > 0:
        raise InvalidStepsize(f"stepsize must be positive, got {T}")
    n = round(1.0 / T)
    if n < 2 or abs(1.0 / T - n) > 1e-9 * n:
        raise InvalidStepsize(f"1/T must be an integer >= 2, got 1/T = {1.0 / T:.12g}")
    return int(n)


def interior_box(n: int) -> IndexBox:
    return IndexBox((1, 1), (n - 1, n - 1))


def random_interior_grid(T: float, rng: np.random.Generator) -> CoefficientGrid:
    """Cartesian coefficient grid with normal coefficients on the interior points of ``(0,1)^2``."""
    n = stepsize_count(T)
    box = interior_box(n)
    return CoefficientGrid(preset("cartesian", 1.0 / n), box, rng.standard_normal(box.shape))


def build_network(cg: CoefficientGrid) -> ReluNetwork:
    """Network computing the expansion ``cg`` on ``(0, 1)^2``.

    ``cg.spec`` must be the Cartesian lattice ``T I`` with ``1/T`` an integer
    ``n >= 2``; its coefficients must vanish outside the interior points
    ``{1, ..., n-1}^2``.
    """
    spec = cg.spec
    n = stepsize_count(spec.stepsize)
    cart = preset("cartesian", 1.0 / n)
    if not np.allclose(spec.xi, cart.xi, rtol=0, atol=1e-12 / n):
        raise ValueError("build_network needs a Cartesian lattice T*I")
    inner = interior_box(n)
    K1, K2 = cg.index_box.indices()
    outside = ~((K1 >= 1) & (K1 <= n - 1) & (K2 >= 1) & (K2 <= n - 1))
    if np.any(cg.coeffs[outside] != 0.0):
        raise ValueError("coefficients outside the interior lattice points of (0,1)^2 are not representable")
    k1, k2 = (a.ravel().astype(float) for a in inner.indices())
    N = k1.size
    inv = float(n)
    w1 = np.zeros((3 * N, 2))
    b1 = np.zeros(3 * N)
    # per basis function: (x1 - x2)/T - k1 + k2, x2/T - k2, -x1/T + k1
    w1[0::3] = (inv, -inv)
    b1[0::3] = k2 - k1
    w1[1::3] = (0.0, inv)
    b1[1::3] = -k2
    w1[2::3] = (-inv, 0.0)
    b1[2::3] = k1
    in2 = np.arange(3 * N).reshape(N, 3)
    w2 = -np.ones((N, 3))
    b2 = np.ones(N)
    out = np.array([cg[(int(a), int(b))] for a, b in zip(k1, k2)])
    return ReluNetwork(w1, b1, in2, w2, b2, out)


def forward(net: ReluNetwork, x):
    """Forward pass; ``x`` has a trailing axis of length 2."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = x.reshape(-1, 2)
    h = relu(pts @ net.w1.T + net.b1)
    z = relu(net.b2 + np.einsum("pnk,nk->pn", h[:, net.in2], net.w2))
    y = z @ net.out
    return float(y[0]) if scalar else y.reshape(x.shape[:-1])


def spline_sum(cg: CoefficientGrid, x):
    """Direct ``sum_k c[k] phi(x/T - k)`` for a Cartesian grid (oracle for :func:`forward`)."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = x.reshape(-1, 2)
    T = cg.spec.stepsize
    K1, K2 = cg.index_box.indices()
    acc = np.zeros(pts.shape[0])
    for a, b, c in zip(K1.ravel(), K2.ravel(), cg.coeffs.ravel()):
        if c != 0.0:
            acc += c * cartesian_profile(pts[:, 0] / T - a, pts[:, 1] / T - b)
    return float(acc[0]) if scalar else acc.reshape(x.shape[:-1])


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def export_network(net: ReluNetwork) -> str:
    """Flat text form, one unit per line.

    ``L1 idx w_x1 w_x2 bias``; ``L2 idx in_a in_b in_c w_a w_b w_c bias``;
    ``OUT idx weight``.  Numbers use 17 significant digits.
    """
    lines = [FORMAT_TAG, f"# neurons {net.neuron_count} layer1 {net.w1.shape[0]} layer2 {net.w2.shape[0]}"]
    for i, (w, b) in enumerate(zip(net.w1, net.b1)):
        lines.append(f"L1 {i} {_fmt(w[0])} {_fmt(w[1])} {_fmt(b)}")
    for i in range(net.w2.shape[0]):
        ins = " ".join(str(int(j)) for j in net.in2[i])
        ws = " ".join(_fmt(v) for v in net.w2[i])
        lines.append(f"L2 {i} {ins} {ws} {_fmt(net.b2[i])}")
    for i, v in enumerate(net.out):
        lines.append(f"OUT {i} {_fmt(v)}")
    return "\n".join(lines) + "\n"


def load_network(text: str) -> ReluNetwork:
    """Parse the output of :func:`export_network`."""
    l1, l2, out = [], [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        kind, idx = tok[0], int(tok[1])
        if kind == "L1":
            l1.append((idx, [float(t) for t in tok[2:5]]))
        elif kind == "L2":
            l2.append((idx, [int(t) for t in tok[2:5]], [float(t) for t in tok[5:8]], float(tok[8])))
        elif kind == "OUT":
            out.append((idx, float(tok[2])))
        else:
            raise ValueError(f"unknown record {kind!r}")
    l1.sort(key=lambda r: r[0])
    l2.sort(key=lambda r: r[0])
    out.sort(key=lambda r: r[0])
    w1 = np.array([r[1][:2] for r in l1]).reshape(-1, 2)
    b1 = np.array([r[1][2] for r in l1])
    in2 = np.array([r[1] for r in l2], dtype=np.int64).reshape(-1, 3)
    w2 = np.array([r[2] for r in l2]).reshape(-1, 3)
    b2 = np.array([r[3] for r in l2])
    o = np.array([r[1] for r in out])
    if len(o) != len(b2) or (in2.size and in2.max() >= len(b1)):
        raise ValueError("inconsistent network description")
    return ReluNetwork(w1, b1, in2, w2, b2, o)


def stepsize_for_neurons(M: int) -> float:
    """Stepsize whose interior grid uses ``M = 4 (1/T - 1)^2`` neurons: ``1 / (sqrt(M)/2 + 1)``."""
    if M < 4:
        raise ValueError("need at least 4 neurons")
    return 1.0 / (0.5 * math.sqrt(M) + 1.0)
