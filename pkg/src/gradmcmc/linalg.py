"""Dense lower-triangular matrix algebra for the per-iteration O(n^2) updates.

The proposal covariance is parametrised by its Cholesky factor, a
positive-diagonal lower-triangular matrix wrapped in `TriangularScale`.
Storage is dense row-major float64 including the stored zeros above the
diagonal; at desk scale (n up to ~1000) packed formats buy nothing.
"""
from __future__ import annotations

import numpy as np

from ._backend import kernels
from .errors import SingularMatrixError


def _as_vector(v, n, name="v"):
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != n:
        raise ValueError(f"{name} must be a length-{n} vector, got shape {v.shape}")
    return v


class TriangularScale:
    """A lower-triangular scale matrix L (covariance factor L L^T).

    The strict upper triangle must be zero; the diagonal is expected to be
    strictly positive whenever the factor is used as a covariance (enforced
    after every adaptation step by the adapt module).
    """

    __slots__ = ("entries",)

    def __init__(self, entries, *, copy=True):
        a = np.array(entries, dtype=np.float64, copy=copy, order="C")
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if np.any(np.triu(a, k=1) != 0.0):
            raise ValueError("strict upper triangle must be zero")
        self.entries = a

    @property
    def n(self):
        return self.entries.shape[0]

    @classmethod
    def diagonal(cls, d):
        d = np.asarray(d, dtype=np.float64)
        return cls(np.diag(d), copy=False)

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n), copy=False)

    def copy(self):
        return TriangularScale(self.entries, copy=True)

    def covariance(self):
        """The implied covariance L L^T."""
        return self.entries @ self.entries.T

    def __repr__(self):
        return f"TriangularScale(n={self.n})"


def _require_positive_diagonal(L, err=SingularMatrixError):
    d = np.diagonal(L.entries)
    if np.any(d <= 0.0):
        raise err("triangular factor has a nonpositive diagonal entry")


def tri_matvec(L: TriangularScale, v) -> np.ndarray:
    """L @ v; strict upper entries never enter the computation."""
    v = _as_vector(v, L.n)
    return kernels.tri_matvec(L.entries, v)


def tri_transpose_matvec(L: TriangularScale, v) -> np.ndarray:
    """L.T @ v."""
    v = _as_vector(v, L.n)
    return kernels.tri_tmatvec(L.entries, v)


def outer_lower(a, b) -> np.ndarray:
    """Lower-triangular part (diagonal included) of the outer product a b^T."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape[0] != b.shape[0]:
        raise ValueError(
            f"vectors must share one length, got shapes {a.shape} and {b.shape}"
        )
    return kernels.outer_lower(a, b)


def log_det_tri(L: TriangularScale) -> float:
    """Sum of log diagonal entries, i.e. log |L|."""
    d = np.diagonal(L.entries)
    if np.any(d <= 0.0):
        raise ValueError("log_det_tri requires a strictly positive diagonal")
    return float(kernels.log_det_tri(L.entries))


def forward_solve(L: TriangularScale, b) -> np.ndarray:
    """Solve L z = b by forward substitution."""
    b = _as_vector(b, L.n, name="b")
    _require_positive_diagonal(L)
    return kernels.forward_solve(L.entries, b)
