import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqkit.constraints import analyze
from eqkit.errors import DimensionMismatch
from eqkit.flows import (AffineField, FlowCurve, closed_form_flow, fields_from_theta, lie_bracket,
                         on_surface_defect, rk4_flow, tangency_defect)
from eqkit.geometry import make_rng
from shapes import E1, E2, E3, ZERO3, catalogue

SHAPES = catalogue()


def random_field(rng, dim, kind=None):
    kind = kind or ("dilation" if rng.random() < 0.3 else "screw")
    c = rng.uniform(-1, 1, dim)
    if kind == "dilation":
        return AffineField.dilation(rng.uniform(-0.3, 0.3), c)
    return AffineField.screw(rng.uniform(-1, 1, 1 if dim == 2 else 3), rng.uniform(-0.6, 0.6), c)


def test_helix():
    t = np.linspace(0, 10, 101)
    pts = closed_form_flow(AffineField.screw(E3, 0.0, E3), E1, t).points
    assert np.allclose(pts, np.column_stack([np.cos(t), np.sin(t), t]), atol=1e-12)


def test_dilation_closed_form():
    f = AffineField.dilation(0.5, [1.0, 0.0])
    t = np.array([0.0, 1.0, 2.0])
    pts = closed_form_flow(f, [1.0, 1.0], t).points
    # x' = x/2 + c: x(t) = e^{t/2} x0 + 2 (e^{t/2} - 1) c
    want = np.exp(t / 2)[:, None] * [1.0, 1.0] + (2 * np.expm1(t / 2))[:, None] * [1.0, 0.0]
    assert np.allclose(pts, want, rtol=1e-14)


def test_zero_rate_translation():
    pts = closed_form_flow(AffineField.dilation(0.0, [1.0, 2.0]), [0.0, 0.0], [0.0, 3.0]).points
    assert pts.tolist() == [[0.0, 0.0], [3.0, 6.0]]


def test_planar_rotation():
    f = AffineField.screw(1.0, 0.0, [0.0, 0.0])
    pts = closed_form_flow(f, [1.0, 0.0], [np.pi / 2]).points
    assert np.allclose(pts, [[0.0, 1.0]], atol=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_closed_form_matches_rk4(seed):
    rng = make_rng(seed)
    f = random_field(rng, 2 + seed % 2)
    x0 = rng.uniform(-1, 1, f.dim)
    rk = rk4_flow(f, x0, 10.0, 2000)
    cf = closed_form_flow(f, x0, rk.times)
    assert np.max(np.abs(rk.points - cf.points)) <= 1e-6 * max(1.0, np.abs(cf.points).max())


def test_field_validation():
    with pytest.raises(DimensionMismatch):
        AffineField.dilation(1.0, [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(ValueError):
        AffineField("shear", [0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        closed_form_flow(AffineField.dilation(1.0, [0.0, 0.0]), [0.0, 0.0, 0.0], [0.0])
    with pytest.raises(ValueError):
        rk4_flow(AffineField.dilation(1.0, [0.0, 0.0]), [0.0, 0.0], 1.0, 0)
    with pytest.raises(ValueError):
        FlowCurve(np.array([0.0, 0.0]), np.zeros((2, 2)), "rk4")


def test_fields_from_theta():
    theta = np.arange(11, dtype=float)
    dil, scr = fields_from_theta(theta, 3)
    assert dil.alpha == 0.0 and dil.c.tolist() == [5, 6, 7]
    assert scr.beta == 1.0 and scr.lam.tolist() == [2, 3, 4] and scr.c.tolist() == [8, 9, 10]
    assert scr.rate == 0.5


@pytest.mark.parametrize("name", ["disk", "annulus", "sphere", "cylinder", "coaxial", "spheroid",
                                  "torus", "helical", "elliptic_cylinder", "slab3", "plane"])
def test_nullspace_fields_preserve_the_surface(name):
    shape = SHAPES[name]
    fam = analyze(shape, "specular")
    rng = make_rng(1)
    theta = rng.uniform(-1, 1, fam.null_dim) @ fam.basis
    starts = shape.sample(6, seed=2).points
    t = np.linspace(0, 1.0, 21)
    for fld in fields_from_theta(theta, shape.dim):
        for x0 in starts:
            curve = closed_form_flow(fld, x0, t)
            if np.all(np.isfinite(shape.g(curve.points))):
                assert on_surface_defect(curve, shape) <= 1e-8


def test_wrong_axis_leaves_torus():
    torus = SHAPES["torus"]
    curve = closed_form_flow(AffineField.screw(E1, 0.0, ZERO3), torus.sample(1, seed=0).points[0],
                             np.linspace(0, 1, 11))
    assert on_surface_defect(curve, torus) >= 1e-2


def _bracket_matrix(f1, f2):
    # independent oracle: [F1, F2](x) = DF1 F2(x) - DF2 F1(x)
    return lambda x: f1.matrix @ f2(x) - f2.matrix @ f1(x)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bracket_against_jacobian_oracle(seed):
    rng = make_rng(seed)
    f1, f2 = (AffineField.screw(rng.uniform(-1, 1, 3), 0.0, rng.uniform(-1, 1, 3)) for _ in range(2))
    x = rng.uniform(-2, 2, 3)
    assert np.allclose(lie_bracket(f1, f2)(x), _bracket_matrix(f1, f2)(x), atol=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-2, 2), st.floats(-2, 2))
def test_bracket_antisymmetric_and_bilinear(seed, a, b):
    rng = make_rng(seed)
    f, g, h = (AffineField.screw(rng.uniform(-1, 1, 3), 0.0, rng.uniform(-1, 1, 3)) for _ in range(3))
    x = rng.uniform(-2, 2, 3)
    assert np.allclose(lie_bracket(f, g)(x), -lie_bracket(g, f)(x), atol=1e-14)
    combo = AffineField.screw(a * g.lam + b * h.lam, 0.0, a * g.c + b * h.c)
    assert np.allclose(lie_bracket(f, combo)(x),
                       a * lie_bracket(f, g)(x) + b * lie_bracket(f, h)(x), atol=1e-13)


def test_bracket_needs_3d_screws():
    with pytest.raises(ValueError):
        lie_bracket(AffineField.dilation(1.0, ZERO3), AffineField.screw(E3, 0.0, ZERO3))
    with pytest.raises(DimensionMismatch):
        lie_bracket(AffineField.screw(1.0, 0.0, [0.0, 0.0]), AffineField.screw(1.0, 0.0, [0.0, 0.0]))


def test_tangency_defect_inputs():
    sph = SHAPES["sphere"]
    f1 = AffineField.screw(E3, 0.0, -np.cross(E3, sph.center))
    f2 = AffineField.screw(E1, 0.0, -np.cross(E1, sph.center))
    s = sph.sample(64, seed=0)
    assert tangency_defect(f1, f2, sph, s) <= 1e-9
    assert tangency_defect(f1, f2, sph, s.points) <= 1e-9
    off = AffineField.screw(E2, 0.0, np.cross(E2, -E1))
    assert tangency_defect(AffineField.screw(E3, 0.0, ZERO3), off, SHAPES["torus"]) >= 1e-2
