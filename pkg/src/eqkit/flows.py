"""Affine symmetry generators: exact flows, RK4 flows and Lie brackets.

Two kinds of field appear as boundary symmetries:

* dilation ``x' = alpha x + c`` (from ``alpha``, ``w1``);
* screw ``x' = L x + (beta/2) x + c`` (from ``beta``, ``L``, ``w2``).

Closed forms split the motion into the rotation plane, where the field is a
complex scalar ODE, and the axis.  A complex ``expm1`` keeps them accurate
when the rates are small, so no branch needs a tolerance.
"""
from dataclasses import dataclass

import numpy as np

from ._skew import as_skew_params, commutator_params, n_skew, skew_apply, skew_matrix
from .constraints import theta_slices
from .errors import DimensionMismatch

EPS = 1e-30


@dataclass(frozen=True, eq=False)
class AffineField:
    kind: str                 # "dilation" or "screw"
    c: np.ndarray
    alpha: float = 0.0
    beta: float = 0.0
    lam: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        if c.size not in (2, 3):
            raise DimensionMismatch(f"fields live in d=2 or d=3, got {c.size}")
        if self.kind not in ("dilation", "screw"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        object.__setattr__(self, "c", c)
        lam = np.zeros(n_skew(c.size)) if self.lam is None else self.lam
        object.__setattr__(self, "lam", as_skew_params(lam, c.size))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def dilation(cls, alpha, c):
        return cls("dilation", c, alpha=alpha)

    @classmethod
    def screw(cls, lam, beta, c):
        return cls("screw", c, beta=beta, lam=lam)

    @property
    def dim(self):
        return self.c.size

    @property
    def rate(self):
        """Isotropic growth rate: ``alpha`` or ``beta / 2``."""
        return self.alpha if self.kind == "dilation" else 0.5 * self.beta

    @property
    def matrix(self):
        A = self.rate * np.eye(self.dim)
        if self.kind == "screw":
            A = A + skew_matrix(self.lam, self.dim)
        return A

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.rate * x + self.c
        if self.kind == "screw":
            out = out + skew_apply(self.lam, x)
        return out


def fields_from_theta(theta, dim):
    """The dilation field ``(alpha, w1)`` and screw field ``(beta, L, w2)`` of ``theta``."""
    theta = np.asarray(theta, dtype=float)
    sl = theta_slices(dim)
    return (AffineField.dilation(theta[0], theta[sl["w1"]]),
            AffineField.screw(theta[sl["lambda"]], theta[1], theta[sl["w2"]]))


@dataclass(frozen=True, eq=False)
class FlowCurve:
    times: np.ndarray
    points: np.ndarray
    method: str

    def __post_init__(self):
        if len(self.times) != len(self.points):
            raise ValueError("times and points must have the same length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def _expm1(z):
    """``exp(z) - 1`` for complex ``z``, accurate as ``z -> 0``."""
    a, b = z.real, z.imag
    return (np.expm1(a) * np.cos(b) - 2.0 * np.sin(0.5 * b) ** 2) + 1j * np.exp(a) * np.sin(b)


def _solve_scalar(z, t, q0, c):
    """``q(t)`` for ``q' = z q + c`` with complex rate ``z``; exact for every ``z``."""
    zt = z * t
    step = t if z == 0 else _expm1(zt) / z
    return np.exp(zt) * q0 + step * c


def closed_form_flow(field, x0, times):
    """Exact flow of ``x' = A x + c``.

    In the plane orthogonal to the rotation axis ``A`` acts on complex
    coordinates as multiplication by ``rate + i omega``; along the axis it is
    the growth rate alone.  Each part is a scalar linear ODE, so no matrix is
    ever inverted and ``rate = omega = 0`` reduces to ``x0 + t c``.
    """
    times = np.asarray(times, dtype=float)
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != field.dim:
        raise DimensionMismatch(f"x0 has {x0.size} components, field is {field.dim}-dimensional")
    r, c = complex(field.rate), field.c
    lam = field.lam if field.kind == "screw" else np.zeros_like(field.lam)
    if field.dim == 2:
        q = _solve_scalar(r + 1j * lam[0], times, complex(*x0), complex(*c))
        return FlowCurve(times, np.column_stack([q.real, q.imag]), "closed_form")

    w = np.linalg.norm(lam)
    if w == 0:
        pts = np.column_stack([_solve_scalar(r, times, x0[k], c[k]).real for k in range(3)])
        return FlowCurve(times, pts, "closed_form")
    # right-handed frame (e1, e2, u): lam ^ e1 = w e2, lam ^ e2 = -w e1
    u = lam / w
    e1 = np.cross(np.eye(3)[np.argmin(np.abs(u))], u)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    q = _solve_scalar(r + 1j * w, times, complex(x0 @ e1, x0 @ e2), complex(c @ e1, c @ e2))
    h = _solve_scalar(r, times, x0 @ u, c @ u).real
    pts = q.real[:, None] * e1 + q.imag[:, None] * e2 + h[:, None] * u
    return FlowCurve(times, pts, "closed_form")


def rk4_flow(field, x0, t_end, steps):
    """Classical fourth-order Runge-Kutta on a uniform grid of ``steps`` steps."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    x = np.asarray(x0, dtype=float).ravel().copy()
    h = float(t_end) / steps
    out = np.empty((steps + 1, x.size))
    out[0] = x
    A, b = field.matrix, field.c
    for i in range(steps):
        k1 = A @ x + b
        k2 = A @ (x + 0.5 * h * k1) + b
        k3 = A @ (x + 0.5 * h * k2) + b
        k4 = A @ (x + h * k3) + b
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = x
    return FlowCurve(np.linspace(0.0, float(t_end), steps + 1), out, "rk4")


def on_surface_defect(curve, domain):
    return float(np.max(np.abs(domain.g(curve.points))) / domain.scale)


def lie_bracket(f1, f2):
    """Bracket ``DF1 F2 - DF2 F1`` of two screw fields.

    For ``Fi(x) = Ai x + bi`` this is ``(A1 A2 - A2 A1) x + A1 b2 - A2 b1``.
    The isotropic parts commute with everything, so the matrix is the
    commutator of the skew parts, stored as ``z1 ^ z2`` in d=3.  This order
    reproduces the classical component formula for two helical fields in
    adapted coordinates.
    """
    if f1.kind != "screw" or f2.kind != "screw":
        raise ValueError("brackets are defined here for screw fields")
    if f1.dim != 3 or f2.dim != 3:
        raise DimensionMismatch("brackets are only used in d=3")
    lam = commutator_params(f1.lam, f2.lam, 3)
    const = f1(f2.c) - f1.c - (f2(f1.c) - f2.c)
    return AffineField.screw(lam, 0.0, const)


def tangency_defect(f1, f2, domain, samples=256, seed=0):
    """Largest normalized ``|[F1,F2] . (F1 ^ F2)|`` over boundary points.

    ``samples`` is a count to draw from ``domain``, a :class:`BoundarySamples`,
    or an (N, 3) array of points.
    """
    if isinstance(samples, (int, np.integer)):
        points = domain.sample(samples, seed).points
    else:
        points = np.atleast_2d(np.asarray(getattr(samples, "points", samples), dtype=float))
    br = lie_bracket(f1, f2)(points)
    a, b = f1(points), f2(points)
    trip = np.abs(np.sum(br * np.cross(a, b), axis=-1))
    norm = ((np.linalg.norm(br, axis=-1) + EPS)
            * (np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1) + EPS))
    return float(np.max(trip / norm))
