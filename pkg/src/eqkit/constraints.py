"""Linear boundary constraints on the Maxwellian parameters and their nullspace.

The unknown is ``theta = (alpha, beta, skew params, w1, w2)``, length 7 in
d=2 and 11 in d=3.  ``gamma`` and ``r0`` never appear in a boundary row.

Both wall laws are linear in ``theta`` once split by powers of ``t``:

* specular: ``n.(alpha x + w1) = 0`` and ``n.(L x + beta/2 x + w2) = 0``;
* bounce-back: ``alpha x + w1 = 0`` and ``L x + beta/2 x + w2 = 0``.

Rows are assembled on centred, unit-RMS positions and the nullspace is mapped
back to the original coordinates exactly.
"""
from dataclasses import dataclass, field

import numpy as np

from ._skew import n_skew, skew_coeff_rows
from .errors import DimensionMismatch

BC_KINDS = ("specular", "bounce_back")
GAP_WARNING = 1e3


def theta_size(dim):
    return 2 + n_skew(dim) + 2 * dim


def theta_slices(dim):
    """Index slices of each block in ``theta``."""
    k = n_skew(dim)
    return {
        "alpha": slice(0, 1),
        "beta": slice(1, 2),
        "lambda": slice(2, 2 + k),
        "w1": slice(2 + k, 2 + k + dim),
        "w2": slice(2 + k + dim, 2 + k + 2 * dim),
    }


def theta_labels(dim):
    lam = ["lambda"] if dim == 2 else ["lambda_x", "lambda_y", "lambda_z"]
    axes = "xyz"[:dim]
    return (["alpha", "beta"] + lam + [f"w1_{a}" for a in axes] + [f"w2_{a}" for a in axes])


def constraint_rows(x, n, bc_kind):
    """Constraint rows for samples ``x`` with normals ``n``, both (N, d).

    Returns shape (N * r, len(theta)) with ``r = 2`` for specular and ``2d``
    for bounce-back, rows of one sample kept contiguous.
    """
    x = np.asarray(x, dtype=float)
    n = np.asarray(n, dtype=float)
    if x.ndim != 2 or x.shape != n.shape:
        raise DimensionMismatch("points and normals must both be (N, d) arrays")
    count, d = x.shape
    if d not in (2, 3):
        raise DimensionMismatch(f"only d=2 and d=3 are supported, got {d}")
    sl = theta_slices(d)
    coeff = skew_coeff_rows(x)                       # (N, d, k)
    if bc_kind == "specular":
        rows = np.zeros((count, 2, theta_size(d)))
        nx = np.sum(n * x, axis=-1)
        rows[:, 0, sl["alpha"]] = nx[:, None]
        rows[:, 0, sl["w1"]] = n
        rows[:, 1, sl["beta"]] = 0.5 * nx[:, None]
        rows[:, 1, sl["lambda"]] = np.einsum("ni,nik->nk", n, coeff)
        rows[:, 1, sl["w2"]] = n
    elif bc_kind == "bounce_back":
        rows = np.zeros((count, 2 * d, theta_size(d)))
        eye = np.eye(d)
        rows[:, :d, sl["alpha"]] = x[:, :, None]
        rows[:, :d, sl["w1"]] = eye
        rows[:, d:, sl["beta"]] = 0.5 * x[:, :, None]
        rows[:, d:, sl["lambda"]] = coeff
        rows[:, d:, sl["w2"]] = eye
    else:
        raise ValueError(f"bc_kind must be one of {BC_KINDS}, got {bc_kind!r}")
    return rows.reshape(-1, theta_size(d))


def normalization_transform(center, scale, dim):
    """Matrix ``T`` with ``theta_normalized = T theta`` for ``x = center + scale * x_n``."""
    sl = theta_slices(dim)
    T = np.zeros((theta_size(dim),) * 2)
    T[sl["alpha"], sl["alpha"]] = scale
    T[sl["beta"], sl["beta"]] = scale
    T[sl["lambda"], sl["lambda"]] = scale * np.eye(n_skew(dim))
    T[sl["w1"], sl["w1"]] = np.eye(dim)
    T[sl["w1"], sl["alpha"]] = center[:, None]
    T[sl["w2"], sl["w2"]] = np.eye(dim)
    T[sl["w2"], sl["beta"]] = 0.5 * center[:, None]
    T[sl["w2"], sl["lambda"]] = skew_coeff_rows(center)
    return T


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    rows: np.ndarray          # assembled on normalized positions
    bc_kind: str
    dim: int
    center: np.ndarray
    scale: float
    transform: np.ndarray     # theta_normalized = transform @ theta
    n_samples: int

    @property
    def original_matrix(self):
        """Rows acting on ``theta`` in the caller's coordinates."""
        return self.rows @ self.transform


def assemble(samples, bc_kind, dim):
    x, n = samples.points, samples.normals
    if x.shape[1] != dim:
        raise DimensionMismatch(f"samples are {x.shape[1]}-dimensional, expected {dim}")
    if len(x) < 2:
        raise ValueError("at least two boundary samples are needed")
    center = x.mean(axis=0)
    scale = float(np.sqrt(np.mean(np.sum((x - center) ** 2, axis=-1))))
    if not scale > 0:
        scale = 1.0
    rows = constraint_rows((x - center) / scale, n, bc_kind)
    return ConstraintSystem(rows, bc_kind, dim, center, scale,
                            normalization_transform(center, scale, dim), len(x))


@dataclass(frozen=True, eq=False)
class AdmissibleFamily:
    basis: np.ndarray             # (null_dim, len(theta)), orthonormal rows
    singular_values: np.ndarray   # descending, padded with zeros to len(theta)
    null_dim: int
    gap_ratio: float
    dim: int
    bc_kind: str
    tol: float
    system: ConstraintSystem = field(repr=False, default=None)

    @property
    def gap_warning(self):
        return self.gap_ratio < GAP_WARNING


def _canonical_signs(basis):
    # flip each vector so its largest entry is positive: stable reports
    idx = np.argmax(np.abs(basis), axis=1)
    signs = np.sign(basis[np.arange(len(basis)), idx])
    return basis * np.where(signs == 0, 1.0, signs)[:, None]


def nullspace(system, tol=1e-7):
    A = system.rows
    p = A.shape[1]
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    sv = np.zeros(p)
    sv[:s.size] = s[:p]
    smax = sv[0]
    null = sv <= tol * smax
    kept, dropped = sv[~null], sv[null]
    if dropped.size == 0 or dropped.max() == 0:
        gap = np.inf
    elif kept.size == 0:
        gap = 0.0
    else:
        gap = float(kept.min() / dropped.max())

    basis_n = vt[null]                                    # rows, normalized coords
    if basis_n.shape[0]:
        raw = np.linalg.solve(system.transform, basis_n.T)
        q, _ = np.linalg.qr(raw)
        basis = _canonical_signs(q.T)
    else:
        basis = np.zeros((0, p))
    return AdmissibleFamily(basis, sv, int(null.sum()), gap, system.dim,
                            system.bc_kind, tol, system)


def analyze(domain, bc_kind, samples=256, seed=42, tol=1e-7):
    """Sample, assemble and return the admissible family of a domain."""
    bs = domain.sample(samples, seed)
    return nullspace(assemble(bs, bc_kind, domain.dim), tol)


def residual_ratio(matrix, theta):
    """``|A theta| / (|A| |theta|)`` with the spectral norm of ``A``."""
    theta = np.asarray(theta, dtype=float)
    nt = np.linalg.norm(theta)
    na = np.linalg.norm(matrix, 2)
    if nt == 0 or na == 0:
        return 0.0
    return float(np.linalg.norm(matrix @ theta) / (na * nt))


def forward_check(family, fresh_samples):
    """Worst residual of the family's basis on constraints from unseen samples."""
    if family.null_dim == 0:
        return 0.0
    A = constraint_rows(fresh_samples.points, fresh_samples.normals, family.bc_kind)
    return max(residual_ratio(A, b) for b in family.basis)


def boundary_residual(theta, samples, bc_kind):
    return residual_ratio(constraint_rows(samples.points, samples.normals, bc_kind), theta)
