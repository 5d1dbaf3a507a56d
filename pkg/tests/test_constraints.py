import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqkit.constraints import (GAP_WARNING, analyze, assemble, boundary_residual, constraint_rows,
                               forward_check, normalization_transform, nullspace, residual_ratio,
                               theta_labels, theta_size, theta_slices)
from eqkit.geometry import Annulus, Ball, Cylinder, Ellipsoid, Torus, make_rng
from shapes import E3, ZERO3, catalogue

SHAPES = catalogue()
SPECULAR = {"line": 4, "slab2": 2, "disk": 1, "annulus": 1, "ellipse": 0, "plane": 7, "slab3": 5,
            "sphere": 3, "cylinder": 3, "coaxial": 3, "spheroid": 1, "torus": 1, "helical": 1,
            "elliptic_cylinder": 2, "triaxial": 0, "implicit_disk": 1, "implicit_torus": 1}


def test_theta_layout():
    assert theta_size(2) == 7 and theta_size(3) == 11
    assert theta_labels(2) == ["alpha", "beta", "lambda", "w1_x", "w1_y", "w2_x", "w2_y"]
    sl = theta_slices(3)
    assert [sl[k] for k in ("lambda", "w1", "w2")] == [slice(2, 5), slice(5, 8), slice(8, 11)]


@pytest.mark.parametrize("bc, per_sample", [("specular", lambda d: 2), ("bounce_back", lambda d: 2 * d)])
@pytest.mark.parametrize("dim", [2, 3])
def test_row_counts(bc, per_sample, dim):
    rng = make_rng(0)
    x, n = rng.standard_normal((5, dim)), rng.standard_normal((5, dim))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    assert constraint_rows(x, n, bc).shape == (5 * per_sample(dim), theta_size(dim))


def test_unknown_bc():
    with pytest.raises(ValueError):
        constraint_rows(np.zeros((1, 2)), np.array([[1.0, 0.0]]), "diffuse")


@pytest.mark.parametrize("name", SPECULAR)
def test_specular_dimensions_stable_in_sample_count(name):
    dims = {n: analyze(SHAPES[name], "specular", n, 42).null_dim for n in (128, 256, 512)}
    assert set(dims.values()) == {SPECULAR[name]}


@pytest.mark.parametrize("name", SPECULAR)
def test_bounce_back_is_always_trivial(name):
    assert analyze(SHAPES[name], "bounce_back", 256, 42).null_dim == 0


@pytest.mark.parametrize("seed", [0, 1, 99, 2**40])
def test_seed_invariance(seed):
    for name in ("annulus", "cylinder", "torus", "ellipse"):
        assert analyze(SHAPES[name], "specular", 256, seed).null_dim == SPECULAR[name]


@pytest.mark.parametrize("name", SPECULAR)
def test_forward_check_on_fresh_samples(name):
    fam = analyze(SHAPES[name], "specular", 256, 42)
    assert forward_check(fam, SHAPES[name].sample(256, seed=4242)) <= 1e-10


@pytest.mark.parametrize("name", SPECULAR)
def test_basis_is_orthonormal(name):
    b = analyze(SHAPES[name], "specular").basis
    assert np.allclose(b @ b.T, np.eye(len(b)), atol=1e-12)


def test_disk_rotation_about_its_center():
    y, a = np.array([0.5, -0.25]), 0.7
    jy = np.array([-y[1], y[0]])
    theta = np.concatenate([[0, 0, a], [0, 0], -a * jy])
    assert boundary_residual(theta, SHAPES["disk"].sample(256, seed=1), "specular") <= 1e-12


def test_cylinder_generators():
    cyl = SHAPES["cylinder"]
    axis, y = cyl.axis_dir, cyl.axis_point
    s = cyl.sample(256, seed=1)
    for z_scale, l1, l2 in [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (0.4, -0.3, 0.8)]:
        z = z_scale * axis
        theta = np.concatenate([[0, 0], z, l1 * axis, -np.cross(z, y) + l2 * axis])
        assert boundary_residual(theta, s, "specular") <= 1e-12


def test_sphere_generators():
    sph = SHAPES["sphere"]
    y = sph.center
    s = sph.sample(256, seed=1)
    for z in np.eye(3).tolist() + [[0.3, -0.2, 0.9]]:
        theta = np.concatenate([[0, 0], z, ZERO3, -np.cross(z, y)])
        assert boundary_residual(theta, s, "specular") <= 1e-12


def test_ellipse_rotation_is_rejected():
    theta = np.array([0, 0, 1.0, 0, 0, 0, 0])
    assert boundary_residual(theta, SHAPES["ellipse"].sample(256, seed=1), "specular") > 1e-2


def test_residual_ratio_edge_cases():
    assert residual_ratio(np.eye(3), np.zeros(3)) == 0.0
    assert residual_ratio(np.zeros((2, 3)), np.ones(3)) == 0.0
    assert residual_ratio(np.eye(2), np.array([3.0, 4.0])) == 1.0


def test_normalization_transform_is_invertible():
    T = normalization_transform(np.array([1.0, -2.0, 0.5]), 3.0, 3)
    assert np.linalg.cond(T) < 1e3


def test_gap_ratio_and_warning():
    fam = analyze(SHAPES["disk"], "specular")
    assert fam.gap_ratio > GAP_WARNING and not fam.gap_warning
    # a slightly squashed disk is nearly symmetric: the gap collapses
    near = Ellipsoid((0.0, 0.0), (1.0, 1.0 - 1e-6))
    fam = analyze(near, "specular", tol=1e-9)
    assert fam.singular_values[-1] < 1e-5 * fam.singular_values[0]


def test_singular_values_padded():
    fam = nullspace(assemble(SHAPES["sphere"].sample(3, seed=0), "specular", 3))
    assert fam.singular_values.shape == (11,)


rotation_angles = st.tuples(st.floats(0, 2 * np.pi), st.floats(0, np.pi), st.floats(0, 2 * np.pi))
shifts = st.lists(st.floats(-5, 5), min_size=3, max_size=3).map(np.array)


def _rotation(a, b, c):
    def rz(t):
        return np.array([[np.cos(t), -np.sin(t), 0], [np.sin(t), np.cos(t), 0], [0, 0, 1]])

    def ry(t):
        return np.array([[np.cos(t), 0, np.sin(t)], [0, 1, 0], [-np.sin(t), 0, np.cos(t)]])
    return rz(a) @ ry(b) @ rz(c)


@settings(max_examples=25, deadline=None)
@given(rotation_angles, shifts)
def test_rigid_motion_invariance_3d(angles, shift):
    R = _rotation(*angles)
    moved = {
        "cylinder": (Cylinder(shift, R @ E3, 1.0, 2.0), 3),
        "torus": (Torus(shift, R @ E3, 2.0, 0.5), 1),
        "triaxial": (Ellipsoid(shift, (1.0, 1.3, 1.7), rotation=R), 0),
        "sphere": (Ball(shift, 0.8), 3),
    }
    for shape, want in moved.values():
        fam = analyze(shape, "specular")
        assert fam.null_dim == want
        assert forward_check(fam, shape.sample(128, seed=7)) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 2 * np.pi), shifts.map(lambda s: s[:2]), st.floats(0.2, 5))
def test_rigid_motion_invariance_2d(angle, shift, scale):
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s], [s, c]])
    assert analyze(Ellipsoid(shift, (2 * scale, scale), rotation=R), "specular").null_dim == 0
    fam = analyze(Annulus(shift, 0.5 * scale, scale), "specular")
    assert fam.null_dim == 1
    assert forward_check(fam, Annulus(shift, 0.5 * scale, scale).sample(64, seed=3)) <= 1e-10
