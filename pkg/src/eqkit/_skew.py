"""Skew-symmetric matrices stored by their independent entries.

d=2: a single scalar ``a`` with matrix ((0, -a), (a, 0)).
d=3: an axis vector ``z`` with matrix action ``x -> z ^ x``.
"""
import numpy as np

from .errors import DimensionMismatch

J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def n_skew(dim):
    if dim == 2:
        return 1
    if dim == 3:
        return 3
    raise DimensionMismatch(f"only d=2 and d=3 are supported, got {dim}")


def as_skew_params(lam, dim):
    lam = np.atleast_1d(np.asarray(lam, dtype=float)).ravel()
    if lam.size != n_skew(dim):
        raise DimensionMismatch(
            f"d={dim} needs {n_skew(dim)} skew parameter(s), got {lam.size}")
    return lam


def skew_matrix(lam, dim):
    lam = as_skew_params(lam, dim)
    if dim == 2:
        return lam[0] * J2
    a, b, c = lam
    return np.array([[0.0, -c, b], [c, 0.0, -a], [-b, a, 0.0]])


def skew_apply(lam, x):
    """Apply the skew matrix to ``x`` of shape (..., d)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] == 2:
        a = np.asarray(lam, dtype=float).ravel()[0]
        return a * np.stack([-x[..., 1], x[..., 0]], axis=-1)
    return np.cross(np.asarray(lam, dtype=float), x)


def skew_square_apply(lam, x):
    """Apply the square of the skew matrix, which is symmetric."""
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float).ravel()
    if x.shape[-1] == 2:
        return -(lam[0] ** 2) * x
    return lam * (x @ lam)[..., None] - (lam @ lam) * x


def skew_coeff_rows(x):
    """Linear map from skew parameters to ``Lambda x``: shape (..., d, n_skew)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] == 2:
        return np.stack([-x[..., 1], x[..., 0]], axis=-1)[..., None]
    # z ^ x = -x ^ z = -[x]_x z
    out = np.zeros(x.shape + (3,))
    out[..., 0, 1] = x[..., 2]
    out[..., 0, 2] = -x[..., 1]
    out[..., 1, 0] = -x[..., 2]
    out[..., 1, 2] = x[..., 0]
    out[..., 2, 0] = x[..., 1]
    out[..., 2, 1] = -x[..., 0]
    return out


def commutator_params(lam1, lam2, dim):
    """Skew parameters of ``L1 L2 - L2 L1``."""
    if dim == 2:
        return np.zeros(1)
    return np.cross(lam1, lam2)
