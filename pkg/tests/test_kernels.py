"""numba and numpy backends must agree to rounding."""

import numpy as np
import pytest

from lattice_cpwl import functions as F
from lattice_cpwl.asymptotics import asym_error_spatial
from lattice_cpwl import kernels as K
from lattice_cpwl._accel import requested_backend
from lattice_cpwl.lattice import preset
from lattice_cpwl.projection import measure_error, project


def _both(fn, *args):
    out = {}
    for name in ("numba", "numpy"):
        with pytest.MonkeyPatch.context() as mp:
            mp.setenv("LATTICE_CPWL_BACKEND", name)
            assert requested_backend() == name
            out[name] = fn(*args)
    return out["numba"], out["numpy"]


def test_backend_env(monkeypatch):
    monkeypatch.delenv("LATTICE_CPWL_BACKEND", raising=False)
    assert requested_backend() == "numba"
    monkeypatch.setenv("LATTICE_CPWL_BACKEND", "numpy")
    assert requested_backend() == "numpy"


def test_stencil_parity(rng):
    c = rng.standard_normal((37, 23))
    a, b = _both(K.stencil_apply, c, 0.7)
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-15)


def test_stencil_matches_dense(rng):
    c = rng.standard_normal((5, 6))
    dense = np.zeros_like(c)
    for i in range(5):
        for j in range(6):
            for (di, dj), w in [((0, 0), 0.5)] + [(o, 1 / 12) for o in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)]]:
                if 0 <= i + di < 5 and 0 <= j + dj < 6:
                    dense[i, j] += w * c[i + di, j + dj]
    np.testing.assert_allclose(K.stencil_apply(c, 1.0), dense, rtol=1e-14)


def test_rhs_gather_parity(rng):
    p_lo, p_up = rng.standard_normal((2, 9, 14, 3))
    a, b = _both(K.rhs_gather, p_lo, p_up)
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-15)
    # total mass is preserved
    assert a.sum() == pytest.approx(p_lo.sum() + p_up.sum(), rel=1e-12)


def test_cell_error_parity(rng):
    f_lo, f_up = rng.standard_normal((2, 6, 8, 10))
    c = rng.standard_normal((10, 9))
    lam_lo, lam_up = rng.uniform(0, 1, (2, 3, 10))
    w = rng.uniform(0, 1, 10)
    mask = rng.random((6, 8)) < 0.7
    a, b = _both(K.cell_error, f_lo, f_up, c, lam_lo, lam_up, w, mask, 2)
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_expansion_parity(rng):
    c = rng.standard_normal((12, 15))
    u1, u2 = rng.uniform(-5, 20, (2, 5000))
    a, b = _both(K.expansion_eval, c, (-3, 2), u1, u2)
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-15)


def test_project_parity():
    f = F.gaussian(0.25)
    spec = preset("hexagonal", 1 / 16)

    def run():
        cg = project(f, spec)
        return cg.coeffs, measure_error(f, cg)

    (ca, ea), (cb, eb) = _both(run)
    np.testing.assert_allclose(ca, cb, rtol=1e-10, atol=1e-14)
    assert ea == pytest.approx(eb, rel=1e-10)


def test_backend_fixture_projection(backend):
    f = F.gaussian(0.25)
    spec = preset("cartesian", 1 / 8)
    assert measure_error(f, project(f, spec)) == pytest.approx(asym_error_spatial(f, spec), rel=0.25)
