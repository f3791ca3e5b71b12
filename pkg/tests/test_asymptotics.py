import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_specs
from lattice_cpwl import asymptotics as A
from lattice_cpwl import functions as F
from lattice_cpwl.errors import DegenerateLattice, QuadratureUnderResolved
from lattice_cpwl.lattice import build_grid, preset

SQ15 = math.sqrt(1.5)


def test_abg_examples():
    k = A.abg(0, math.pi / 2)
    assert k.as_tuple() == pytest.approx((1, 1, 1), abs=1e-15)
    assert k.c_const == pytest.approx(math.sqrt(3), abs=1e-15)
    k = A.abg(0, 2 * math.pi / 3)
    assert k.as_tuple() == pytest.approx((math.sqrt(3) / 2, math.sqrt(3) / 2, 0), abs=1e-15)
    assert k.c_const == pytest.approx(SQ15, abs=1e-15)
    k = A.abg(math.pi / 4, 3 * math.pi / 4)
    assert k.as_tuple() == pytest.approx((0.5, 1.5, 0), abs=1e-15)
    assert k.c_const == pytest.approx(math.sqrt(2.5), abs=1e-15)


def test_abg_degenerate():
    with pytest.raises(DegenerateLattice):
        A.abg(0.3, 0.3 + math.pi)


def _abg_from_matrix(theta1, theta2):
    # expand q(D^T z) with q(w) = w1^2 + w1 w2 + w2^2 and D = Xi/T
    D = build_grid(theta1, theta2, 1.0).xi
    a, b = D[:, 0], D[:, 1]  # columns: D^T z = (a.z, b.z)
    Q = np.outer(a, a) + 0.5 * (np.outer(a, b) + np.outer(b, a)) + np.outer(b, b)
    return Q[0, 0], Q[1, 1], 2 * Q[0, 1]


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0.05, 2 * math.pi - 0.05).filter(lambda d: abs(math.sin(d)) > 0.05))
def test_abg_is_the_quadratic_form_after_change_of_variables(t1, d):
    k = A.abg(t1, t1 + d)
    assert k.as_tuple() == pytest.approx(_abg_from_matrix(t1, t1 + d), rel=1e-10, abs=1e-10)
    assert k.alpha > 0 and k.beta > 0
    assert k.alpha + k.beta == pytest.approx((2 + math.cos(d)) / abs(math.sin(d)), rel=1e-12)
    assert k.c_const >= SQ15 - 1e-12


def test_pi_shift_invariance(rng):
    for t1, d in rng.uniform(0, 2 * math.pi, (1000, 2)):
        if abs(math.sin(d)) < 1e-3:
            continue
        assert A.abg(t1 + math.pi, t1 + d + math.pi).c_const == pytest.approx(A.abg(t1, t1 + d).c_const, rel=1e-12)


def test_hexagonal_angles_are_optimal_for_every_rotation(rng):
    t1 = rng.uniform(0, 2 * math.pi, 2000)
    for d in (2 * math.pi / 3, 4 * math.pi / 3):
        np.testing.assert_allclose(A.error_constant(t1, t1 + d), SQ15, atol=1e-12)


def test_rotation_changes_C():
    # C is not rotation invariant; recorded, not a defect
    assert A.abg(0, math.pi / 2).c_const == pytest.approx(math.sqrt(3))
    assert A.abg(math.pi / 4, 3 * math.pi / 4).c_const == pytest.approx(math.sqrt(2.5))


def test_error_constant_vectorized_degenerate():
    v = A.error_constant(np.array([0.0, 0.0]), np.array([math.pi, math.pi / 2]))
    assert math.isnan(v[0]) and v[1] == pytest.approx(math.sqrt(3))


def test_asym_spatial_affine_is_zero():
    assert A.asym_error_spatial(F.affine(), preset("hexagonal", 0.1)) == 0.0
    assert A.upper_bound(F.affine(), preset("hexagonal", 0.1)) == 0.0


def test_hexagonal_laplacian_formula():
    f = F.gaussian(0.25)
    for T in (0.5, 0.1):
        spec = preset("hexagonal", T)
        assert A.asym_error_spatial(f, spec) == pytest.approx(T**2 / (8 * math.sqrt(15)) * f.laplacian_norm, rel=1e-9)


def test_cartesian_structure_single_entry():
    # only f_x1x2 nonzero: the Cartesian integrand reduces to gamma^2 f_x1x2^2 with gamma = 1
    g = F.gaussian(0.3)

    def hessian(x1, x2):
        h = g.value(x1, x2)
        z = np.zeros_like(h)
        return z, h, z

    f = F.TestFunction("mixed-only", g.value, hessian, effective_support=g.effective_support)
    ref = math.sqrt(math.pi * 0.3**2)  # ||g||_L2 for a unit Gaussian of width 0.3
    for kind, gamma in (("cartesian", 1.0), ("hexagonal", 0.0)):
        spec = preset(kind, 0.2)
        expected = 0.2**2 / (12 * math.sqrt(5)) * abs(gamma) * ref
        assert A.asym_error_spatial(f, spec) == pytest.approx(expected, rel=1e-9, abs=1e-15)


@pytest.mark.parametrize(
    "f", [F.gaussian(0.25), F.anisotropic_gaussian(), F.windowed_sinusoid(), F.gaussian(0.3, center=(0.2, -0.1))], ids=lambda f: f.id
)
def test_parseval_spatial_vs_fourier(f):
    for spec in [preset("cartesian", 0.1), preset("hexagonal", 0.1)] + random_specs(4, 17, T=0.1):
        assert A.asym_error_spatial(f, spec) == pytest.approx(A.asym_error_fourier(f, spec), rel=1e-6)


def test_gaussian_cartesian_parseval_tight():
    f = F.gaussian(0.25)
    spec = preset("cartesian", 1.0)
    assert A.asym_error_fourier(f, spec) == pytest.approx(A.asym_error_spatial(f, spec), rel=1e-9)


def test_disk_has_no_spatial_route():
    with pytest.raises(QuadratureUnderResolved):
        A.asym_error_spatial(F.fourier_disk(), preset("cartesian", 1.0))


def test_fourier_disk_closed_forms():
    cart = A.fourier_disk_asym("cartesian", 1, 1, 1)
    hexa = A.fourier_disk_asym("hexagonal", 1, 1, 1)
    assert cart == pytest.approx(1 / math.sqrt(7680 * math.pi), rel=1e-15)
    assert hexa == pytest.approx(1 / math.sqrt(11520 * math.pi), rel=1e-15)
    assert cart == pytest.approx(6.4379e-3, abs=1e-7)
    assert hexa == pytest.approx(5.2565e-3, abs=1e-7)
    assert hexa / cart == pytest.approx(math.sqrt(2 / 3), abs=1e-12)
    assert A.fourier_disk_asym("cartesian", -2, 1, 1) == pytest.approx(2 * cart)
    with pytest.raises(ValueError):
        A.fourier_disk_asym("square", 1, 1, 1)


@pytest.mark.parametrize("kind", ["cartesian", "hexagonal"])
@pytest.mark.parametrize("c, wmax, T", [(1, 1, 1), (2.5, 3.0, 0.1), (-1, 0.5, 0.01)])
def test_fourier_disk_quadrature_matches_closed_form(kind, c, wmax, T):
    got = A.asym_error_fourier(F.fourier_disk(c, wmax), preset(kind, T))
    assert got == pytest.approx(A.fourier_disk_asym(kind, c, wmax, T), rel=1e-6)


def test_upper_bound_examples():
    f = F.gaussian(0.25)
    spec = preset("hexagonal", 0.1)
    assert A.upper_bound(f, spec) > A.asym_error_spatial(f, spec)
    d = F.fourier_disk(1, 1)
    assert A.upper_bound(d, preset("cartesian", 1)) >= A.fourier_disk_asym("cartesian", 1, 1, 1)


def test_hessian_norm_routes_agree():
    f = F.gaussian(0.25)
    stripped = F.TestFunction("g", f.value, f.hessian, effective_support=f.effective_support)
    assert A.hessian_frobenius_norm(stripped) == pytest.approx(f.hessian_norm, rel=1e-8)
    fourier_only = F.TestFunction("g", f.value, f.hessian, fourier=f.fourier, fourier_support=f.fourier_support)
    assert A.hessian_frobenius_norm(fourier_only) == pytest.approx(f.hessian_norm, rel=1e-8)


def test_sweep_examples():
    t = A.sweep_landscape(steps=500)
    assert t.min == pytest.approx(SQ15, abs=1e-12)
    for d in (2 * math.pi / 3, 4 * math.pi / 3):
        j = np.argmin(np.abs(t.delta - d))
        assert abs(t.delta[j] - d) < 1e-12
        np.testing.assert_allclose(t.values[:, j], SQ15, atol=1e-12)
    assert float(A.error_constant(0.0, math.pi / 2)) == pytest.approx(math.sqrt(3))
    _, deltas = t.near_minimum(1e-9)
    assert np.all(np.minimum(np.abs(deltas - 2 * math.pi / 3), np.abs(deltas - 4 * math.pi / 3)) < 1e-9)


def test_sweep_excludes_degenerate_columns():
    t = A.sweep_landscape(steps=5)  # grid contains delta = pi
    assert np.all(np.abs(np.sin(t.delta)) > 1e-9)
    assert t.values.shape == (5, 4)
    with pytest.raises(ValueError):
        A.sweep_landscape(steps=1)


def test_sweep_csv_and_clipping():
    t = A.sweep_landscape(steps=2)
    text = t.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "theta1,delta,M" and len(lines) == 5
    t = A.sweep_landscape(steps=50)
    plot = t.to_csv(plot=True)
    raw = t.to_csv()
    rows_plot = [r.split(",") for r in plot.strip().split("\n")[1:]]
    rows_raw = [r.split(",") for r in raw.strip().split("\n")[1:]]
    assert any(r[2] == "" for r in rows_plot)
    for rp, rr in zip(rows_plot, rows_raw):
        if rp[2] == "":
            assert float(rr[2]) >= 10
        else:
            assert rp[2] == rr[2] and float(rr[2]) < 10
    assert t.values.max() > 10  # raw values never clipped


def test_sweep_csv_round_trip():
    t = A.sweep_landscape(steps=8)
    buf = io.StringIO()
    t.to_csv(buf)
    data = np.genfromtxt(io.StringIO(buf.getvalue()), delimiter=",", names=True)
    np.testing.assert_array_equal(data["M"].reshape(t.values.shape), t.values)
