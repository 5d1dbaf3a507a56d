"""scikit-learn style wrapper around the constraint nullspace.

``X`` holds one boundary sample per row: positions followed by unit normals,
shape ``(n, 2d)``.  Fitting finds the admissible family; ``transform`` maps
samples to the constraint residual of each basis vector, so a sample from a
domain with the same symmetries maps to (numerically) zero.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .classify import classify
from .constraints import assemble, constraint_rows, nullspace
from .geometry import BoundarySamples


def _split(X):
    X = check_array(X, dtype=float)
    if X.shape[1] not in (4, 6):
        raise ValueError(f"X must have 4 (d=2) or 6 (d=3) columns, got {X.shape[1]}")
    d = X.shape[1] // 2
    return X[:, :d], X[:, d:]


class SymmetryEstimator(TransformerMixin, BaseEstimator):
    def __init__(self, bc="specular", tol=1e-7):
        self.bc = bc
        self.tol = tol

    def fit(self, X, y=None):
        x, n = _split(X)
        family = nullspace(assemble(BoundarySamples(x, n), self.bc, x.shape[1]), self.tol)
        self.family_ = family
        self.basis_ = family.basis
        self.singular_values_ = family.singular_values
        self.null_dim_ = family.null_dim
        self.gap_ratio_ = family.gap_ratio
        self.classification_ = classify(family)
        self.n_features_in_ = 2 * x.shape[1]
        return self

    def transform(self, X):
        """Per-sample residual ``|rows b|`` for every basis vector ``b``: (n, null_dim)."""
        check_is_fitted(self, "basis_")
        x, n = _split(X)
        if 2 * x.shape[1] != self.n_features_in_:
            raise ValueError("X has a different dimension than the fitted samples")
        rows = constraint_rows(x, n, self.bc)
        per = rows.shape[0] // len(x)
        r = (rows @ self.basis_.T).reshape(len(x), per, -1)
        return np.linalg.norm(r, axis=1)

    def score(self, X, y=None):
        """Negative worst residual: 0 is a perfect fit."""
        res = self.transform(X)
        return -float(res.max()) if res.size else 0.0
