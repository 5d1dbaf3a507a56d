import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqkit.errors import DimensionMismatch, ExponentOverflow, OutsidePositivityWindow
from eqkit.maxwellian import (EvalPoint, FactoredForm, MaxwellianParams, eval_point, evaluate,
                              exponent, factor, normalized_transport_residual,
                              pde_system_residuals, positivity_window, transport_residual)

unit = st.floats(-1, 1, allow_nan=False)


@st.composite
def params(draw, dim=None, gamma_min=0.1):
    dim = dim or draw(st.sampled_from([2, 3]))
    k = 1 if dim == 2 else 3
    vec = lambda n: np.array(draw(st.lists(unit, min_size=n, max_size=n)))
    return MaxwellianParams(r0=draw(st.floats(0.1, 3)), alpha=draw(unit), beta=draw(unit),
                            gamma=draw(st.floats(gamma_min, 1)), lambda0=vec(k), w1=vec(dim),
                            w2=vec(dim))


def test_global_maxwellian_is_gaussian():
    p = MaxwellianParams.global_maxwellian(3, gamma=2.0, r0=0.5)
    v = np.array([0.3, -0.1, 0.4])
    assert eval_point(p, EvalPoint(1.7, (1, 2, 3), tuple(v))) == pytest.approx(0.5 * np.exp(-2 * v @ v))


def test_exponent_hand_value():
    # alpha=1, t=1, x=(1,0), v=(1,0): y=0, so only -gamma|v|^2 + 2 L x.v + 2 w2.v remain
    p = MaxwellianParams(r0=1, alpha=1, beta=0, gamma=1, lambda0=0.5, w1=(3, 3), w2=(0.25, 0))
    # L x = 0.5 * (0, 1), orthogonal to v
    assert exponent(p, 1.0, np.array([1.0, 0]), np.array([1.0, 0])) == pytest.approx(-1 + 0.5)


def test_theta_round_trip():
    p = MaxwellianParams(r0=2, alpha=0.1, beta=0.2, gamma=0.7, lambda0=(1, 2, 3), w1=(4, 5, 6),
                         w2=(7, 8, 9))
    assert p.theta.tolist() == [0.1, 0.2, 1, 2, 3, 4, 5, 6, 7, 8, 9]
    q = MaxwellianParams.from_theta(p.theta, 3, gamma=0.7, r0=2)
    assert q.to_dict() == p.to_dict()


def test_params_are_read_only():
    p = MaxwellianParams.global_maxwellian(2)
    with pytest.raises(ValueError):
        p.w1[0] = 1.0


def test_lambda_matrix_is_skew():
    p = MaxwellianParams.global_maxwellian(3).replace(lambda0=(0.1, -0.4, 0.9))
    L = p.lambda_matrix
    assert np.allclose(L, -L.T)
    assert np.allclose(L @ np.array([1.0, 2, 3]), np.cross([0.1, -0.4, 0.9], [1.0, 2, 3]))


def test_invalid_params():
    with pytest.raises((ValueError, DimensionMismatch)):
        MaxwellianParams(r0=1, alpha=0, beta=0, gamma=1, lambda0=0, w1=(0, 0), w2=(0, 0, 0))
    with pytest.raises(ValueError):
        MaxwellianParams(r0=-1, alpha=0, beta=0, gamma=1, lambda0=0, w1=(0, 0), w2=(0, 0))


def test_dimension_mismatch_on_eval():
    p = MaxwellianParams.global_maxwellian(2)
    with pytest.raises(DimensionMismatch):
        evaluate(p, 0.0, np.zeros(3), np.zeros(3))


def test_exponent_overflow():
    p = MaxwellianParams.global_maxwellian(2).replace(w2=(500.0, 0.0))
    with pytest.raises(ExponentOverflow):
        evaluate(p, 0.0, np.zeros(2), np.array([1.0, 0.0]))


@pytest.mark.parametrize("a, b, c, window", [
    (0, 0, 1, (-np.inf, np.inf)),
    (1, 0, 1, (-np.inf, np.inf)),
    (0, 1, 1, (-1.0, np.inf)),
    (0, -2, 1, (-np.inf, 0.5)),
    (-1, 0, 1, (-1.0, 1.0)),
    (1, -3, 2, (-np.inf, 1.0)),
    (1, 3, 2, (-1.0, np.inf)),
])
def test_positivity_window(a, b, c, window):
    p = MaxwellianParams(r0=1, alpha=a, beta=b, gamma=c, lambda0=0, w1=(0, 0), w2=(0, 0))
    assert positivity_window(p) == pytest.approx(window)


def test_no_window_without_positive_gamma():
    p = MaxwellianParams(r0=1, alpha=0, beta=0, gamma=-1, lambda0=0, w1=(0, 0), w2=(0, 0))
    assert positivity_window(p) is None
    with pytest.raises(OutsidePositivityWindow):
        factor(p, 0.0, np.zeros((1, 2)))


def test_factor_outside_window():
    p = MaxwellianParams(r0=1, alpha=-1, beta=0, gamma=1, lambda0=0, w1=(0, 0), w2=(0, 0))
    with pytest.raises(OutsidePositivityWindow):
        factor(p, 1.5, np.zeros((1, 2)))


def test_rotating_disk_velocity():
    # u = L0 x / sigma0 with sigma0 = gamma at t = 0
    p = MaxwellianParams.global_maxwellian(2, gamma=2.0).replace(lambda0=0.5)
    f = factor(p, 0.0, np.array([[1.0, 0.0], [0.0, 2.0]]))
    assert np.allclose(f.u, [[0.0, 0.25], [-0.5, 0.0]])
    assert f.a == 2.0


@settings(max_examples=200, deadline=None)
@given(params(), st.floats(-3, 3), st.integers(0, 2**32 - 1))
def test_transport_residual_vanishes(p, t, seed):
    rng = np.random.default_rng(seed)
    x, v = rng.uniform(-2, 2, (5, p.dim)), rng.uniform(-2, 2, (5, p.dim))
    assert np.all(normalized_transport_residual(p, np.full(5, t), x, v) <= 1e-12)


@settings(max_examples=100, deadline=None)
@given(params(), st.integers(0, 2**32 - 1))
def test_transport_residual_scales_with_value(p, seed):
    rng = np.random.default_rng(seed)
    x, v = rng.uniform(-1, 1, (4, p.dim)), rng.uniform(-1, 1, (4, p.dim))
    res = transport_residual(p, np.zeros(4), x, v)
    assert np.all(np.abs(res) <= 1e-10 * (1 + evaluate(p, np.zeros(4), x, v)))


@settings(max_examples=200, deadline=None)
@given(params(), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_factorization_properties(p, frac, seed):
    form = FactoredForm(p)
    lo, hi = max(form.window[0], -2.0), min(form.window[1], 2.0)
    t = lo + (0.1 + 0.8 * frac) * (hi - lo)
    rng = np.random.default_rng(seed)
    x, v = rng.uniform(-1, 1, (3, p.dim)), rng.uniform(-1, 1, (3, p.dim))
    f = factor(p, t, x)
    assert f.a > 0
    assert np.all(f.rho > 0)
    assert np.allclose(f.rho, f.rho_explicit, rtol=1e-9)
    direct = evaluate(p, np.full(3, t), x, v)
    rebuilt = f.rho * np.exp(-f.a * np.sum((v - f.u) ** 2, axis=-1))
    assert np.allclose(rebuilt, direct, rtol=1e-10)
    assert form.sigma0(t) ** 2 * form.phi(t) == pytest.approx(
        (4 * p.alpha * p.gamma - p.beta ** 2) / 4, abs=1e-8)
    assert pde_system_residuals(p, t, x).max() <= 1e-8


@settings(max_examples=50, deadline=None)
@given(params())
def test_factored_time_derivatives(p):
    # the hand-coded derivatives agree with central differences
    form = FactoredForm(p)
    lo, hi = max(form.window[0], -1.0), min(form.window[1], 1.0)
    t, h = 0.5 * (lo + hi), 1e-5
    for f, df in [(form.sigma0, form.dsigma0), (form._s, form._ds), (form._ds, form._dds),
                  (form.phi, form.dphi), (form.C, form.dC), (form.dC, form.ddC),
                  (form.log_rho0, form.dlog_rho0)]:
        fd = (np.asarray(f(t + h)) - np.asarray(f(t - h))) / (2 * h)
        assert np.allclose(df(t), fd, rtol=1e-5, atol=1e-5)


@settings(max_examples=200, deadline=None)
@given(params(gamma_min=-1), st.floats(-2, 2), st.integers(0, 2**32 - 1))
def test_characteristic_invariance(p, t, seed):
    # shifting x along v leaves 2 (L x).v unchanged because L is skew
    rng = np.random.default_rng(seed)
    x, v = rng.uniform(-1, 1, (4, p.dim)), rng.uniform(-1, 1, (4, p.dim))
    a = exponent(p, np.full(4, t), x, v)
    b = exponent(p, np.zeros(4), x - t * v, v)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
