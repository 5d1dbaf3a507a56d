"""Read a symmetry case and its geometry off an admissible family.

The specular rows never mix ``(alpha, w1)`` with ``(beta, L, w2)``, so the
nullspace splits as a direct sum of a dilation/translation part and a
screw part.  Ranks are measured in the normalized coordinates of the
constraint system, where all blocks are O(1); geometry (axis, centre,
pitch) is recovered in the caller's coordinates.
"""
from dataclasses import dataclass, field

import numpy as np

from ._skew import J2
from .constraints import theta_slices
from .errors import CoeffLengthMismatch
from .maxwellian import MaxwellianParams

CASES = ("GlobalOnly", "HalfSpace", "Slab", "DiskOrAnnulus", "CylinderOfRevolution",
         "Sphere", "HelicalSurface", "GeneralizedCylinder", "Unrecognized")


@dataclass
class SymmetryClass:
    case: str
    detected: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def to_dict(self):
        # adding 0.0 turns -0.0 into 0.0
        det = {k: ((v + 0.0).tolist() if isinstance(v, np.ndarray) else v + 0.0)
               for k, v in self.detected.items()}
        return {"case": self.case, "detected": det, "flags": dict(self.flags)}


def _row_space(M, tol):
    """Orthonormal rows spanning the row space of ``M`` (singular values > tol)."""
    if M.size == 0:
        return np.zeros((0, M.shape[1]))
    _, s, vt = np.linalg.svd(M, full_matrices=False)
    return vt[s > tol]


def _null_combos(col, tol):
    """Orthonormal coefficient vectors ``c`` with ``c . col = 0``."""
    m = col.size
    if m == 0:
        return np.zeros((0, 0))
    if np.linalg.norm(col) <= tol:
        return np.eye(m)
    _, _, vt = np.linalg.svd(col[None, :])
    return vt[1:]


def _canonical_dir(v):
    v = v / np.linalg.norm(v)
    return v if v[np.argmax(np.abs(v))] > 0 else -v


def _blocks(basis, dim):
    sl = theta_slices(dim)
    a_idx = np.r_[0, np.arange(sl["w1"].start, sl["w1"].stop)]
    b_idx = np.r_[1, np.arange(sl["lambda"].start, sl["lambda"].stop),
                  np.arange(sl["w2"].start, sl["w2"].stop)]
    return a_idx, b_idx


def _flags(family):
    dim, tol = family.dim, family.tol
    basis = family.basis
    T = family.system.transform if family.system is not None else np.eye(basis.shape[1])
    normed = basis @ T.T
    a_idx, b_idx = _blocks(basis, dim)
    k = 1 if dim == 2 else 3

    na = _row_space(normed[:, a_idx], tol)          # rows: (alpha, w1)
    nb = _row_space(normed[:, b_idx], tol)          # rows: (beta, L, w2)
    has_alpha = bool(na.size and np.linalg.norm(na[:, 0]) > tol)
    has_beta = bool(nb.size and np.linalg.norm(nb[:, 0]) > tol)
    lam_cols = nb[:, 1:1 + k] if nb.size else np.zeros((0, k))
    rotation_dims = int(np.sum(np.linalg.svd(lam_cols, compute_uv=False) > tol)) \
        if lam_cols.size else 0

    # translations: (0, w1) in the (alpha, w1) part; w1 is unchanged by normalization
    if na.size:
        combos = _null_combos(na[:, 0], tol)
        trans = _row_space(combos @ na[:, 1:], tol) if combos.size else np.zeros((0, dim))
    else:
        trans = np.zeros((0, dim))
    return {
        "has_alpha_dilation": has_alpha,
        "has_beta_dilation": has_beta,
        "rotation_dims": rotation_dims,
        "translation_dims": int(trans.shape[0]),
    }, trans


def _screw_generators(family):
    """Original-coordinate (beta, L, w2) rows spanning the screw part."""
    _, b_idx = _blocks(family.basis, family.dim)
    return _row_space(family.basis[:, b_idx], family.tol)


def _axis_from_generator(z, w2):
    """Axis through the point closest to the origin and the locked pitch."""
    zz = z @ z
    point = np.cross(z, w2) / zz
    pitch = float(w2 @ z / zz)
    return point, pitch


def classify(family, dim=None):
    dim = family.dim if dim is None else dim
    if family.null_dim == 0:
        flags = {"has_alpha_dilation": False, "has_beta_dilation": False,
                 "rotation_dims": 0, "translation_dims": 0, "helical_coupling": False}
        return SymmetryClass("GlobalOnly", {}, flags)
    flags, trans = _flags(family)
    flags["helical_coupling"] = False
    k = 1 if dim == 2 else 3
    rot, nt = flags["rotation_dims"], flags["translation_dims"]
    screw = _screw_generators(family)

    def rotation_generator():
        # combination of screw rows with the largest rotation part
        lam = screw[:, 1:1 + k]
        u, _, _ = np.linalg.svd(lam, full_matrices=False)
        g = u[:, 0] @ screw
        return g[1:1 + k], g[1 + k:]

    if flags["has_alpha_dilation"]:
        det = {}
        if nt == dim - 1:
            normal = _normal_from_tangents(trans, dim)
            det["normal"] = normal
            sl = theta_slices(dim)
            # the alpha generator has w1 = -alpha * offset * normal
            for b in family.basis:
                if abs(b[0]) > family.tol:
                    det["offset"] = float(-(b[sl["w1"]] @ normal) / b[0])
                    break
        return SymmetryClass("HalfSpace", det, flags)

    if dim == 2:
        if rot == 1 and nt == 0 and not flags["has_beta_dilation"]:
            a, w2 = rotation_generator()
            return SymmetryClass("DiskOrAnnulus", {"center": J2 @ w2 / a[0]}, flags)
        if nt == 1 and rot == 0 and not flags["has_beta_dilation"]:
            return SymmetryClass("Slab", {"normal": _normal_from_tangents(trans, 2)}, flags)
        return SymmetryClass("Unrecognized", {}, flags)

    if flags["has_beta_dilation"]:
        return SymmetryClass("Unrecognized", {}, flags)
    if nt == 2 and rot <= 1:
        return SymmetryClass("Slab", {"normal": _normal_from_tangents(trans, 3)}, flags)
    if rot == 3 and nt == 0:
        lam, w2 = screw[:, 1:4], screw[:, 4:]
        A = np.concatenate([np.array([[0.0, -z[2], z[1]], [z[2], 0.0, -z[0]],
                                      [-z[1], z[0], 0.0]]) for z in lam])
        center = np.linalg.lstsq(A, -w2.ravel(), rcond=None)[0]
        return SymmetryClass("Sphere", {"center": center}, flags)
    if rot == 1 and nt == 1:
        z, w2 = rotation_generator()
        axis = _canonical_dir(z)
        if abs(abs(axis @ trans[0]) - 1.0) > 1e-6:
            return SymmetryClass("Unrecognized", {}, flags)
        point, _ = _axis_from_generator(z, w2)
        return SymmetryClass("CylinderOfRevolution", {"axis_dir": axis, "axis_point": point}, flags)
    if rot == 1 and nt == 0:
        z, w2 = rotation_generator()
        point, pitch = _axis_from_generator(z, w2)
        axis = _canonical_dir(z)
        # w2.z / |z|^2 is unchanged by z -> -z, so the handedness is intrinsic
        flags["helical_coupling"] = abs(pitch) > family.tol * max(1.0, np.linalg.norm(point))
        return SymmetryClass("HelicalSurface",
                             {"axis_dir": axis, "axis_point": point, "pitch_p": pitch}, flags)
    if rot == 0 and nt == 1:
        return SymmetryClass("GeneralizedCylinder", {"axis_dir": _canonical_dir(trans[0])}, flags)
    return SymmetryClass("Unrecognized", {}, flags)


def _normal_from_tangents(trans, dim):
    if dim == 2:
        t = trans[0]
        return _canonical_dir(np.array([-t[1], t[0]]))
    return _canonical_dir(np.cross(trans[0], trans[1]))


def family_to_maxwellians(family, gamma=1.0, r0=1.0, coeffs=()):
    coeffs = np.asarray(coeffs, dtype=float).ravel()
    if coeffs.size != family.null_dim:
        raise CoeffLengthMismatch(
            f"family has dimension {family.null_dim}, got {coeffs.size} coefficients")
    theta = coeffs @ family.basis if family.null_dim else np.zeros(family.basis.shape[1])
    return MaxwellianParams.from_theta(theta, family.dim, gamma=gamma, r0=r0)
