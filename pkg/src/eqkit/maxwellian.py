"""Local Maxwellians that solve the free transport equation.

A member of the family is fixed by ``(r0, alpha, beta, gamma, lambda0, w1, w2)``
and reads ``m = r0 * exp(E(t, x, v))`` with

    E = -alpha |y|^2 + beta y.v - gamma |v|^2 + 2 (L0 x).v - 2 w1.y + 2 w2.v,
    y = x - t v,

where ``L0`` is skew-symmetric.  The same function admits the factored
form ``rho(t, x) exp(-a(t) |v - u(t, x)|^2)`` on the time interval where
``a(t) = alpha t^2 + beta t + gamma`` stays positive.

All evaluation functions broadcast over leading axes: ``t`` has shape
``(...)`` and ``x``, ``v`` have shape ``(..., d)``.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._skew import as_skew_params, n_skew, skew_apply, skew_matrix, skew_square_apply
from .errors import DimensionMismatch, ExponentOverflow, OutsidePositivityWindow

EXPONENT_CAP = 700.0


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MaxwellianParams:
    r0: float
    alpha: float
    beta: float
    gamma: float
    lambda0: np.ndarray
    w1: np.ndarray
    w2: np.ndarray

    def __post_init__(self):
        w1 = np.atleast_1d(np.asarray(self.w1, dtype=float)).ravel()
        w2 = np.atleast_1d(np.asarray(self.w2, dtype=float)).ravel()
        if w1.size not in (2, 3) or w2.size != w1.size:
            raise DimensionMismatch(
                f"w1 and w2 must both have length 2 or 3, got {w1.size}, {w2.size}")
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        object.__setattr__(self, "r0", float(self.r0))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "w1", _frozen(w1))
        object.__setattr__(self, "w2", _frozen(w2))
        object.__setattr__(self, "lambda0", _frozen(as_skew_params(self.lambda0, w1.size)))

    @property
    def dim(self):
        return self.w1.size

    @property
    def lambda_matrix(self):
        return skew_matrix(self.lambda0, self.dim)

    @property
    def theta(self):
        """Boundary-constrained parameters in the order (alpha, beta, lambda0, w1, w2)."""
        return np.concatenate([[self.alpha, self.beta], self.lambda0, self.w1, self.w2])

    @classmethod
    def global_maxwellian(cls, dim, gamma=1.0, r0=1.0):
        return cls(r0, 0.0, 0.0, gamma, np.zeros(n_skew(dim)), np.zeros(dim), np.zeros(dim))

    @classmethod
    def from_theta(cls, theta, dim, gamma=1.0, r0=1.0):
        theta = np.asarray(theta, dtype=float).ravel()
        k = n_skew(dim)
        if theta.size != 2 + k + 2 * dim:
            raise DimensionMismatch(
                f"theta for d={dim} has length {2 + k + 2 * dim}, got {theta.size}")
        return cls(r0, theta[0], theta[1], gamma, theta[2:2 + k],
                   theta[2 + k:2 + k + dim], theta[2 + k + dim:])

    def replace(self, **changes):
        fields = dict(r0=self.r0, alpha=self.alpha, beta=self.beta, gamma=self.gamma,
                      lambda0=self.lambda0, w1=self.w1, w2=self.w2)
        fields.update(changes)
        return MaxwellianParams(**fields)

    def to_dict(self):
        lam = self.lambda0.tolist()
        return {
            "dim": self.dim, "r0": self.r0, "alpha": self.alpha, "beta": self.beta,
            "gamma": self.gamma, "lambda0": lam[0] if self.dim == 2 else lam,
            "w1": self.w1.tolist(), "w2": self.w2.tolist(),
        }


@dataclass(frozen=True)
class EvalPoint:
    t: float
    x: tuple
    v: tuple


def _check(params, x, v=None):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.dim or (v is not None and np.shape(v)[-1] != params.dim):
        raise DimensionMismatch(f"expected {params.dim}-vectors")
    return x


def exponent(params, t, x, v):
    x = _check(params, x, v)
    v = np.asarray(v, dtype=float)
    t = np.asarray(t, dtype=float)
    y = x - t[..., None] * v
    return (-params.alpha * np.sum(y * y, axis=-1)
            + params.beta * np.sum(y * v, axis=-1)
            - params.gamma * np.sum(v * v, axis=-1)
            + 2.0 * np.sum(skew_apply(params.lambda0, x) * v, axis=-1)
            - 2.0 * (y @ params.w1)
            + 2.0 * (v @ params.w2))


def evaluate(params, t, x, v, cap=EXPONENT_CAP):
    """Value of the Maxwellian, ``r0 exp(E)``; refuses exponents above ``cap``."""
    e = exponent(params, t, x, v)
    if np.any(e > cap):
        raise ExponentOverflow(f"exponent {np.max(e):.6g} exceeds cap {cap}")
    return params.r0 * np.exp(e)


def eval_exponent(params, p: EvalPoint):
    return float(exponent(params, p.t, p.x, p.v))


def eval_point(params, p: EvalPoint, cap=EXPONENT_CAP):
    return float(evaluate(params, p.t, p.x, p.v, cap=cap))


def exponent_derivatives(params, t, x, v):
    """Analytic ``dE/dt`` and ``grad_x E``."""
    x = _check(params, x, v)
    v = np.asarray(v, dtype=float)
    t = np.asarray(t, dtype=float)
    y = x - t[..., None] * v
    dt = (2.0 * params.alpha * np.sum(y * v, axis=-1)
          - params.beta * np.sum(v * v, axis=-1)
          + 2.0 * (v @ params.w1))
    # grad of 2 (L0 x).v is 2 L0^T v = -2 L0 v
    grad = (-2.0 * params.alpha * y + params.beta * v
            - 2.0 * skew_apply(params.lambda0, v) - 2.0 * params.w1)
    return dt, grad


def transport_residual(params, t, x, v, cap=EXPONENT_CAP):
    """``dm/dt + v . grad_x m`` from analytic derivatives of the exponent."""
    m = evaluate(params, t, x, v, cap=cap)
    dt, grad = exponent_derivatives(params, t, x, v)
    return m * (dt + np.sum(np.asarray(v, dtype=float) * grad, axis=-1))


def normalized_transport_residual(params, t, x, v):
    """``|dm/dt + v . grad m| / (m (1+|v|) (1+|x|+|t||v|)^2)``, free of overflow."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    t = np.asarray(t, dtype=float)
    dt, grad = exponent_derivatives(params, t, x, v)
    speed = np.linalg.norm(v, axis=-1)
    scale = (1.0 + speed) * (1.0 + np.linalg.norm(x, axis=-1) + np.abs(t) * speed) ** 2
    return np.abs(dt + np.sum(v * grad, axis=-1)) / scale


def positivity_window(params):
    """Maximal open interval containing t=0 on which ``a(t) > 0``.

    Returns ``None`` when ``a(0) = gamma <= 0``.
    """
    a, b, c = params.alpha, params.beta, params.gamma
    if c <= 0:
        return None
    if a == 0.0:
        if b == 0.0:
            return (-np.inf, np.inf)
        root = -c / b
        return (root, np.inf) if root < 0 else (-np.inf, root)
    disc = b * b - 4.0 * a * c
    if disc < 0:
        # a > 0 here, since a < 0 with c > 0 forces disc > 0
        return (-np.inf, np.inf)
    q = -0.5 * (b + np.copysign(np.sqrt(disc), b))
    with np.errstate(over="ignore"):
        # a root at +-inf is the right answer for a subnormal alpha
        r1, r2 = sorted([float(q / a), float(c / q)])
    if a < 0:
        return (r1, r2)
    return (-np.inf, r1) if r1 > 0 else (r2, np.inf)


class FactoredForm:
    """Time coefficients of the factored form of one Maxwellian."""

    def __init__(self, params):
        self.params = params
        self.window = positivity_window(params)

    def inside(self, t):
        return self.window is not None and self.window[0] < t < self.window[1]

    def require(self, t):
        if not self.inside(t):
            raise OutsidePositivityWindow(
                f"t={t} is outside the positivity window {self.window}")

    def sigma0(self, t):
        p = self.params
        return p.alpha * t * t + p.beta * t + p.gamma

    def dsigma0(self, t):
        return 2.0 * self.params.alpha * t + self.params.beta

    def _s(self, t):
        return self.dsigma0(t) / (2.0 * self.sigma0(t))

    def _ds(self, t):
        s0, d1 = self.sigma0(t), self.dsigma0(t)
        return (2.0 * self.params.alpha * s0 - d1 * d1) / (2.0 * s0 * s0)

    def _dds(self, t):
        s0, d1 = self.sigma0(t), self.dsigma0(t)
        num = 2.0 * self.params.alpha * s0 - d1 * d1
        return -d1 * (self.params.alpha * s0 + num) / s0 ** 3

    def phi(self, t):
        return self._s(t) ** 2 + self._ds(t)

    def dphi(self, t):
        return 2.0 * self._s(t) * self._ds(t) + self._dds(t)

    def _n(self, t):
        return t * self.params.w1 + self.params.w2

    def C(self, t):
        return self._n(t) / self.sigma0(t)

    def dC(self, t):
        s0 = self.sigma0(t)
        return (self.params.w1 * s0 - self._n(t) * self.dsigma0(t)) / s0 ** 2

    def ddC(self, t):
        s0, d1 = self.sigma0(t), self.dsigma0(t)
        n, w1, a = self._n(t), self.params.w1, self.params.alpha
        return -2.0 * w1 * d1 / s0 ** 2 - 2.0 * a * n / s0 ** 2 + 2.0 * n * d1 ** 2 / s0 ** 3

    def log_rho0(self, t):
        n = self._n(t)
        return np.log(self.params.r0) + (n @ n) / self.sigma0(t)

    def rho0(self, t):
        return np.exp(self.log_rho0(t))

    def dlog_rho0(self, t):
        n, s0 = self._n(t), self.sigma0(t)
        return 2.0 * (n @ self.params.w1) / s0 - (n @ n) * self.dsigma0(t) / s0 ** 2


class Factorization(NamedTuple):
    rho: np.ndarray           # route (i): m evaluated at v = u
    rho_explicit: np.ndarray  # route (ii): closed-form density
    a: float
    u: np.ndarray


def bulk_velocity(params, t, x, form=None):
    form = form or FactoredForm(params)
    x = _check(params, x)
    s0 = form.sigma0(t)
    return skew_apply(params.lambda0, x) / s0 + form._s(t) * x + form.C(t)


def log_rho_explicit(params, t, x, form=None):
    form = form or FactoredForm(params)
    x = np.asarray(x, dtype=float)
    s0, d1 = form.sigma0(t), form.dsigma0(t)
    C, dC = form.C(t), form.dC(t)
    lx = skew_apply(params.lambda0, x)
    # x.(L0^2 x) = -|L0 x|^2
    xmx = -np.sum(lx * lx, axis=-1) / s0 + s0 * form.phi(t) * np.sum(x * x, axis=-1)
    lc = skew_apply(params.lambda0, C)
    return form.log_rho0(t) - xmx - 2.0 * (x @ lc) - d1 * (x @ C) - 2.0 * s0 * (x @ dC)


def factor(params, t, x, cap=EXPONENT_CAP):
    """Factored coefficients ``(rho, a, u)`` at time ``t`` and positions ``x``."""
    form = FactoredForm(params)
    form.require(t)
    x = _check(params, x)
    u = bulk_velocity(params, t, x, form)
    rho = evaluate(params, np.full(x.shape[:-1], float(t)), x, u, cap=cap)
    rho2 = np.exp(log_rho_explicit(params, t, x, form))
    return Factorization(rho, rho2, form.sigma0(t), u)


class PDEResiduals(NamedTuple):
    """Normalised residuals of the five coefficient equation groups.

    Each entry divides the raw residual by the sum of the magnitudes of its
    terms, so 0 means exact cancellation and 1 means no cancellation at all.
    """
    grad_a: np.ndarray       # (..., d)        rho d_i a
    trace: np.ndarray        # (..., d)        rho [u.grad a + d_t a - 2 a d_i u_i]
    symmetric: np.ndarray    # (..., d(d-1)/2) rho a [d_i u_j + d_j u_i]
    momentum: np.ndarray     # (..., d)        2 rho a grad u_i.u + 2 rho a d_t u_i + d_i rho
    continuity: np.ndarray   # (...)           d_t rho + u.grad rho

    def max(self):
        return max(float(np.max(np.abs(g), initial=0.0)) for g in self)


def _ratio(num, den):
    den = np.asarray(den, dtype=float)
    return np.where(den > 0, np.abs(num) / np.where(den > 0, den, 1.0), 0.0)


def pde_system_residuals(params, t, x):
    form = FactoredForm(params)
    form.require(t)
    x = _check(params, x)
    d = params.dim
    s0, d1, s = form.sigma0(t), form.dsigma0(t), form._s(t)
    C, dC, ddC = form.C(t), form.dC(t), form.ddC(t)
    L = params.lambda_matrix
    lam = params.lambda0

    rho = np.exp(log_rho_explicit(params, t, x, form))
    u = bulk_velocity(params, t, x, form)
    jac = L / s0 + s * np.eye(d)                      # jac[i, j] = d_j u_i
    lx = skew_apply(lam, x)
    dtu = -d1 / s0 ** 2 * lx + form._ds(t) * x + dC

    # grad log rho = -2 M x - 2 L0 C - sigma0' C - 2 sigma0 C'
    mx = skew_square_apply(lam, x) / s0 + s0 * form.phi(t) * x
    glog = -2.0 * mx - 2.0 * skew_apply(lam, C) - d1 * C - 2.0 * s0 * dC
    # d/dt of x.(M x) with M' = -(sigma0'/sigma0^2) L0^2 + (sigma0 phi)' I
    dsphi = d1 * form.phi(t) + s0 * form.dphi(t)
    xmpx = d1 / s0 ** 2 * np.sum(lx * lx, axis=-1) + dsphi * np.sum(x * x, axis=-1)
    dlc = x @ skew_apply(lam, dC)
    dtlog = (form.dlog_rho0(t) - xmpx - 2.0 * dlc
             - 2.0 * params.alpha * (x @ C) - 3.0 * d1 * (x @ dC) - 2.0 * s0 * (x @ ddC))

    zeros = np.zeros(x.shape)
    grad_a = rho[..., None] * zeros

    diag = np.diag(jac)
    trace = _ratio(d1 - 2.0 * s0 * diag, abs(d1) + np.abs(2.0 * s0 * diag)) * np.ones(x.shape)

    iu, ju = np.triu_indices(d, k=1)
    sym_raw = jac[iu, ju] + jac[ju, iu]
    sym_den = np.abs(jac[iu, ju]) + np.abs(jac[ju, iu])
    symmetric = _ratio(sym_raw, sym_den) * np.ones(x.shape[:-1] + (iu.size,))

    ju_u = u @ jac.T                                  # (grad u_i . u)_i
    t1, t2 = 2.0 * s0 * ju_u, 2.0 * s0 * dtu
    momentum = _ratio(t1 + t2 + glog, np.abs(t1) + np.abs(t2) + np.abs(glog))

    ugl = np.sum(u * glog, axis=-1)
    continuity = _ratio(dtlog + ugl, np.abs(dtlog) + np.abs(ugl))
    return PDEResiduals(grad_a, trace, symmetric, momentum, continuity)
