"""Domain shapes, boundary sampling, outward normals and wall laws.

Every shape describes its domain as ``{g < 0}`` for a smooth level-set
function ``g`` whose gradient points out of the domain on the boundary.
Built-in shapes sample their boundary through an explicit parametrization;
:class:`Implicit` projects bounding-box points onto ``g = 0`` by Newton steps.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import dsl
from .errors import DegenerateGradient, DimensionMismatch, ProjectionFailed

NEWTON_ITERATIONS = 50
NEWTON_RTOL = 1e-12


def make_rng(seed):
    """Counter-based generator so any seed, or spawned child, is reproducible."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _unit(v, name="vector"):
    v = np.asarray(v, dtype=float).ravel()
    n = np.linalg.norm(v)
    if not n > 0:
        raise ValueError(f"{name} must be nonzero")
    return v / n


def orthonormal_frame(axis):
    """Right-handed frame ``(e1, e2, axis)`` for a unit 3-vector ``axis``."""
    axis = _unit(axis)
    helper = np.eye(3)[np.argmin(np.abs(axis))]
    e1 = np.cross(helper, axis)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(axis, e1), axis


def tangent_basis(n):
    """Orthonormal basis of the hyperplane orthogonal to ``n``, shape (d-1, d)."""
    n = _unit(n)
    if n.size == 2:
        return np.array([[-n[1], n[0]]])
    e1, e2, _ = orthonormal_frame(n)
    return np.array([e1, e2])


def _rotate2(theta, q):
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([c * q[..., 0] - s * q[..., 1], s * q[..., 0] + c * q[..., 1]], axis=-1)


class BoundarySamples:
    """Points on the boundary with their unit outward normals, as (N, d) arrays."""

    def __init__(self, points, normals):
        self.points = np.asarray(points, dtype=float)
        self.normals = np.asarray(normals, dtype=float)
        if self.points.ndim != 2 or self.points.shape != self.normals.shape:
            raise ValueError(f"points {self.points.shape} and normals {self.normals.shape} "
                             "must both be (N, d)")

    def __len__(self):
        return self.points.shape[0]

    def __getitem__(self, i):
        return BoundarySample(self.points[i], self.normals[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def dim(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class BoundarySample:
    x: np.ndarray
    n: np.ndarray


class Shape:
    """Base class.  Subclasses implement ``level`` and ``_sample``."""

    dim: int
    bounded = False
    kind = "shape"

    def level(self, x):
        """Return ``(g, grad g)`` at points ``x`` of shape (N, d)."""
        raise NotImplementedError

    def g(self, x):
        return self.level(np.atleast_2d(np.asarray(x, dtype=float)))[0]

    def normal(self, x):
        """Unit outward normal ``grad g / |grad g|`` at one point or a batch."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected {self.dim}-vectors, got {x.shape[-1]}")
        _, grad = self.level(np.atleast_2d(x))
        norm = np.linalg.norm(grad, axis=-1)
        if np.any(~(norm >= 1e-12)):
            raise DegenerateGradient("level-set gradient vanishes at the requested point")
        n = grad / norm[:, None]
        return n[0] if x.ndim == 1 else n

    def sample(self, count, seed=0):
        if count < 1:
            raise ValueError("count must be at least 1")
        pts, nrm = self._sample(int(count), make_rng(seed))
        return BoundarySamples(pts, nrm)

    def _sample(self, count, rng):
        raise NotImplementedError

    @cached_property
    def scale(self):
        """Characteristic length: RMS of |x| over a fixed boundary sample."""
        pts = self._sample(256, make_rng(0))[0]
        return float(np.sqrt(np.mean(np.sum(pts * pts, axis=-1))))

    def on_surface_residual(self, x):
        return np.abs(self.g(x)) / self.scale

    def contains(self, x, tol=0.0):
        return self.g(x) <= tol * self.scale


def sample_boundary(domain, count, seed=0):
    return domain.sample(count, seed)


def specular_reflect(v, n):
    """Mirror ``v`` across the plane orthogonal to the unit normal ``n``."""
    v = np.asarray(v, dtype=float)
    n = np.asarray(n, dtype=float)
    return v - 2.0 * np.sum(v * n, axis=-1, keepdims=True) * n


def bounce_back(v):
    return -np.asarray(v, dtype=float)


def _sphere_directions(rng, count, dim):
    if dim == 2:
        phi = rng.uniform(0.0, 2.0 * np.pi, count)
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    u = rng.standard_normal((count, dim))
    return u / np.linalg.norm(u, axis=-1, keepdims=True)


class HalfSpace(Shape):
    """``{x . n < offset}``; sampled on a square patch of half-width ``extent``."""

    kind = "half_space"

    def __init__(self, normal, offset, extent=1.0):
        self.n = _unit(normal, "normal")
        self.dim = self.n.size
        self.offset = float(offset)
        self.extent = float(extent)

    def level(self, x):
        return x @ self.n - self.offset, np.broadcast_to(self.n, x.shape).copy()

    def _sample(self, count, rng):
        tb = tangent_basis(self.n)
        coef = rng.uniform(-self.extent, self.extent, (count, self.dim - 1))
        pts = self.offset * self.n + coef @ tb
        return pts, np.broadcast_to(self.n, pts.shape).copy()


class Slab(HalfSpace):
    """Region between the parallel planes ``x . n = x1`` and ``x . n = x2``."""

    kind = "slab"

    def __init__(self, normal, x1, x2, extent=1.0):
        super().__init__(normal, 0.0, extent)
        if x1 == x2:
            raise ValueError("slab planes must be distinct")
        self.x1, self.x2 = sorted((float(x1), float(x2)))

    def level(self, x):
        s = x @ self.n
        w = self.x2 - self.x1
        g = (s - self.x1) * (s - self.x2) / w
        return g, ((2.0 * s - self.x1 - self.x2) / w)[:, None] * self.n

    def _sample(self, count, rng):
        tb = tangent_basis(self.n)
        upper = rng.random(count) < 0.5
        coef = rng.uniform(-self.extent, self.extent, (count, self.dim - 1))
        offs = np.where(upper, self.x2, self.x1)
        pts = offs[:, None] * self.n + coef @ tb
        nrm = np.where(upper[:, None], 1.0, -1.0) * self.n
        return pts, nrm


class Ball(Shape):
    """Disk (d=2) or ball (d=3)."""

    kind = "ball"
    bounded = True

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float).ravel()
        self.dim = self.center.size
        if not radius > 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)

    def level(self, x):
        q = x - self.center
        r = np.linalg.norm(q, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return r - self.radius, q / r[:, None]

    def _sample(self, count, rng):
        u = _sphere_directions(rng, count, self.dim)
        return self.center + self.radius * u, u

    @property
    def bbox(self):
        return self.center - self.radius, self.center + self.radius


class Annulus(Shape):
    """Annulus (d=2) or spherical shell (d=3) between two concentric spheres."""

    kind = "annulus"
    bounded = True

    def __init__(self, center, r_inner, r_outer):
        self.center = np.asarray(center, dtype=float).ravel()
        self.dim = self.center.size
        if not 0 < r_inner < r_outer:
            raise ValueError("need 0 < r_inner < r_outer")
        self.r_inner, self.r_outer = float(r_inner), float(r_outer)

    def level(self, x):
        q = x - self.center
        r = np.linalg.norm(q, axis=-1)
        w = self.r_outer - self.r_inner
        g = (r - self.r_inner) * (r - self.r_outer) / w
        with np.errstate(invalid="ignore", divide="ignore"):
            grad = ((2.0 * r - self.r_inner - self.r_outer) / w / r)[:, None] * q
        return g, grad

    def _sample(self, count, rng):
        u = _sphere_directions(rng, count, self.dim)
        outer = rng.random(count) < 0.5
        r = np.where(outer, self.r_outer, self.r_inner)
        return self.center + r[:, None] * u, np.where(outer[:, None], u, -u)

    @property
    def bbox(self):
        return self.center - self.r_outer, self.center + self.r_outer


class _Axial(Shape):
    dim = 3

    def __init__(self, axis_point, axis_dir, half_length):
        self.axis_point = np.asarray(axis_point, dtype=float).ravel()
        if self.axis_point.size != 3:
            raise DimensionMismatch("axial shapes are three-dimensional")
        self.e1, self.e2, self.axis_dir = orthonormal_frame(axis_dir)
        self.half_length = float(half_length)

    def _split(self, x):
        q = x - self.axis_point
        h = q @ self.axis_dir
        return q - h[:, None] * self.axis_dir, h


class Cylinder(_Axial):
    """Solid circular cylinder, infinite along its axis."""

    kind = "cylinder"

    def __init__(self, axis_point, axis_dir, radius, half_length=1.0):
        super().__init__(axis_point, axis_dir, half_length)
        if not radius > 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)

    def level(self, x):
        p, _ = self._split(x)
        r = np.linalg.norm(p, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return r - self.radius, p / r[:, None]

    def _sample(self, count, rng):
        phi = rng.uniform(0.0, 2.0 * np.pi, count)
        h = rng.uniform(-self.half_length, self.half_length, count)
        u = np.cos(phi)[:, None] * self.e1 + np.sin(phi)[:, None] * self.e2
        return self.axis_point + self.radius * u + h[:, None] * self.axis_dir, u


class CoaxialCylinders(_Axial):
    """Region between two coaxial circular cylinders."""

    kind = "coaxial_cylinders"

    def __init__(self, axis_point, axis_dir, r_inner, r_outer, half_length=1.0):
        super().__init__(axis_point, axis_dir, half_length)
        if not 0 < r_inner < r_outer:
            raise ValueError("need 0 < r_inner < r_outer")
        self.r_inner, self.r_outer = float(r_inner), float(r_outer)

    def level(self, x):
        p, _ = self._split(x)
        r = np.linalg.norm(p, axis=-1)
        w = self.r_outer - self.r_inner
        g = (r - self.r_inner) * (r - self.r_outer) / w
        with np.errstate(invalid="ignore", divide="ignore"):
            grad = ((2.0 * r - self.r_inner - self.r_outer) / w / r)[:, None] * p
        return g, grad

    def _sample(self, count, rng):
        phi = rng.uniform(0.0, 2.0 * np.pi, count)
        h = rng.uniform(-self.half_length, self.half_length, count)
        outer = rng.random(count) < 0.5
        r = np.where(outer, self.r_outer, self.r_inner)
        u = np.cos(phi)[:, None] * self.e1 + np.sin(phi)[:, None] * self.e2
        pts = self.axis_point + r[:, None] * u + h[:, None] * self.axis_dir
        return pts, np.where(outer[:, None], u, -u)


class Ellipsoid(Shape):
    """Ellipse (d=2) or ellipsoid (d=3), optionally rotated: ``x = c + R (a * u)``."""

    kind = "ellipsoid"
    bounded = True

    def __init__(self, center, semi_axes, rotation=None):
        self.center = np.asarray(center, dtype=float).ravel()
        self.dim = self.center.size
        self.semi_axes = np.asarray(semi_axes, dtype=float).ravel()
        if self.semi_axes.size != self.dim or np.any(self.semi_axes <= 0):
            raise ValueError("semi_axes must be positive and match the dimension")
        self.rotation = np.eye(self.dim) if rotation is None else np.asarray(rotation, dtype=float)
        if not np.allclose(self.rotation.T @ self.rotation, np.eye(self.dim), atol=1e-12):
            raise ValueError("rotation must be orthogonal")

    def level(self, x):
        q = (x - self.center) @ self.rotation / self.semi_axes
        r = np.linalg.norm(q, axis=-1)
        amin = self.semi_axes.min()
        with np.errstate(invalid="ignore", divide="ignore"):
            grad = (amin * q / self.semi_axes / r[:, None]) @ self.rotation.T
        return amin * (r - 1.0), grad

    def _sample(self, count, rng):
        u = _sphere_directions(rng, count, self.dim)
        pts = self.center + (u * self.semi_axes) @ self.rotation.T
        n = (u / self.semi_axes) @ self.rotation.T
        return pts, n / np.linalg.norm(n, axis=-1, keepdims=True)

    @property
    def bbox(self):
        half = np.sqrt(np.sum((self.rotation * self.semi_axes) ** 2, axis=1))
        return self.center - half, self.center + half


class Torus(Shape):
    """Solid torus: tube of radius ``minor_r`` around a circle of radius ``major_r``."""

    kind = "torus"
    dim = 3
    bounded = True

    def __init__(self, center, axis_dir, major_r, minor_r):
        self.center = np.asarray(center, dtype=float).ravel()
        self.e1, self.e2, self.axis_dir = orthonormal_frame(axis_dir)
        if not 0 < minor_r < major_r:
            raise ValueError("need 0 < minor_r < major_r")
        self.major_r, self.minor_r = float(major_r), float(minor_r)

    def level(self, x):
        q = x - self.center
        h = q @ self.axis_dir
        p = q - h[:, None] * self.axis_dir
        rho = np.linalg.norm(p, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            radial = p / rho[:, None]
            d = q - self.major_r * radial
            dist = np.linalg.norm(d, axis=-1)
            return dist - self.minor_r, d / dist[:, None]

    def _sample(self, count, rng):
        phi = rng.uniform(0.0, 2.0 * np.pi, count)
        psi = rng.uniform(0.0, 2.0 * np.pi, count)
        radial = np.cos(phi)[:, None] * self.e1 + np.sin(phi)[:, None] * self.e2
        n = np.cos(psi)[:, None] * radial + np.sin(psi)[:, None] * self.axis_dir
        return self.center + self.major_r * radial + self.minor_r * n, n

    @property
    def bbox(self):
        r = self.major_r + self.minor_r
        return self.center - r, self.center + r


class Implicit(Shape):
    """Domain ``{expr < 0}`` restricted to an axis-aligned bounding box."""

    kind = "implicit"
    bounded = True

    def __init__(self, expr, bbox):
        lo, hi = (np.asarray(b, dtype=float).ravel() for b in bbox)
        if lo.size != hi.size or np.any(lo >= hi):
            raise ValueError("bbox must be a nonempty box (lo < hi componentwise)")
        if isinstance(expr, str):
            expr = dsl.parse(expr, lo.size)
        if expr.dim != lo.size:
            raise DimensionMismatch(f"expression is {expr.dim}-dimensional, bbox is {lo.size}")
        self.expr = expr
        self.dim = lo.size
        self.lo, self.hi = lo, hi

    @property
    def bbox(self):
        return self.lo, self.hi

    @cached_property
    def scale(self):
        # known before any sample exists, so the Newton tolerance can use it
        corners = np.array(np.meshgrid(*zip(self.lo, self.hi))).reshape(self.dim, -1).T
        return float(np.sqrt(np.mean(np.sum(corners ** 2, axis=-1))))

    def level(self, x):
        return dsl.eval_grad(self.expr, x, errors="nan")

    def project(self, x):
        """Newton-project points onto ``g = 0``; returns points and a converged mask."""
        x = np.array(x, dtype=float)
        tol = NEWTON_RTOL * self.scale
        for it in range(NEWTON_ITERATIONS + 1):
            g, grad = self.level(x)
            done = np.abs(g) <= tol
            active = ~done & np.isfinite(g)
            if it == NEWTON_ITERATIONS or not np.any(active):
                break
            gg = np.sum(grad[active] ** 2, axis=-1)
            ok = gg > 1e-24
            step = np.zeros((active.sum(), self.dim))
            step[ok] = (g[active][ok] / gg[ok])[:, None] * grad[active][ok]
            xa = x[active] - step
            xa[~ok] = np.nan
            x[active] = xa
        inbox = np.all((x >= self.lo) & (x <= self.hi), axis=-1)
        return x, done & inbox

    def _sample(self, count, rng):
        got, attempts = [], 0
        need = count
        while need > 0:
            if attempts >= 100 * count:
                raise ProjectionFailed(
                    f"only {count - need} of {count} points converged in {attempts} attempts")
            batch = min(max(2 * need, 16), 100 * count - attempts)
            start = rng.uniform(self.lo, self.hi, (batch, self.dim))
            attempts += batch
            x, ok = self.project(start)
            x = x[ok]
            if len(x):
                _, grad = self.level(x)
                nrm = np.linalg.norm(grad, axis=-1)
                x = x[nrm >= 1e-12]
            got.append(x[:need])
            need -= len(got[-1])
        pts = np.concatenate(got)
        return pts, self.normal(pts)


def _profile(expr, bbox):
    if isinstance(expr, str):
        expr = dsl.parse(expr, 2)
    if expr.dim != 2:
        raise DimensionMismatch("cross-section expressions must use only x and y")
    return Implicit(expr, bbox)


class GeneralizedCylinder(_Axial):
    """Straight lines along ``direction`` through a planar cross-section curve.

    The cross-section is an expression in ``(x, y)`` coordinates of the plane
    orthogonal to ``direction``, measured along ``frame[0]`` and ``frame[1]``.
    """

    kind = "generalized_cylinder"

    def __init__(self, direction, cross_section, section_bbox, half_length=1.0,
                 origin=(0.0, 0.0, 0.0)):
        super().__init__(origin, direction, half_length)
        self.section = _profile(cross_section, section_bbox)

    @property
    def direction(self):
        return self.axis_dir

    def level(self, x):
        q = x - self.axis_point
        uv = np.stack([q @ self.e1, q @ self.e2], axis=-1)
        g, gr = self.section.level(uv)
        return g, gr[:, :1] * self.e1 + gr[:, 1:] * self.e2

    def _sample(self, count, rng):
        uv, n2 = self.section._sample(count, rng)
        h = rng.uniform(-self.half_length, self.half_length, count)
        pts = (self.axis_point + uv[:, :1] * self.e1 + uv[:, 1:] * self.e2
               + h[:, None] * self.axis_dir)
        return pts, n2[:, :1] * self.e1 + n2[:, 1:] * self.e2


class HelicalSurface(_Axial):
    """Sweep of a planar profile under the screw motion of pitch ``2 pi p``.

    A point with axial coordinate ``h`` lies on the surface when its
    transverse part, rotated back by ``-h/p``, lies on the profile curve.
    ``p = 0`` would be a surface of revolution; use a built-in for that.
    """

    kind = "helical"

    def __init__(self, axis_point, axis_dir, pitch, profile, profile_bbox, turns=1.0):
        if pitch == 0:
            raise ValueError("pitch must be nonzero")
        self.pitch = float(pitch)
        self.turns = float(turns)
        super().__init__(axis_point, axis_dir, abs(self.pitch) * np.pi * self.turns)
        self.profile = _profile(profile, profile_bbox)

    def level(self, x):
        p, h = self._split(x)
        q = np.stack([p @ self.e1, p @ self.e2], axis=-1)
        q0 = _rotate2(-h / self.pitch, q)
        g, gp = self.profile.level(q0)
        gq = _rotate2(h / self.pitch, gp)
        # d/dh of the back-rotation is -(1/p) J q0
        jq0 = np.stack([-q0[:, 1], q0[:, 0]], axis=-1)
        gh = -np.sum(gp * jq0, axis=-1) / self.pitch
        grad = gq[:, :1] * self.e1 + gq[:, 1:] * self.e2 + gh[:, None] * self.axis_dir
        return g, grad

    def _sample(self, count, rng):
        q0, _ = self.profile._sample(count, rng)
        phi = rng.uniform(-np.pi * self.turns, np.pi * self.turns, count)
        q = _rotate2(phi, q0)
        pts = (self.axis_point + q[:, :1] * self.e1 + q[:, 1:] * self.e2
               + (self.pitch * phi)[:, None] * self.axis_dir)
        return pts, self.normal(pts)
