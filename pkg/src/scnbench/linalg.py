"""
Linalg - Dense-matrix primitives for output-weight evaluation

Provides the minimum-norm least-squares solver shared by the global and window
weight evaluators, plus the small inner-product helpers used when scoring
candidate nodes.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg


# Scale constant for the default relative singular-value cutoff
DEFAULT_CUTOFF_SCALE = 1e-12


class NumericInputError(ValueError):
    """Raised when a non-finite value (NaN/Inf) enters a linalg operation."""


class DimensionError(ValueError):
    """Raised when operand shapes or lengths are not conformable."""


@dataclass(frozen=True)
class SolveTolerance:
    """
    Rank threshold for the pseudoinverse solve.

    Singular values at or below ``rel_cutoff * sigma_max`` are treated as zero.
    """

    rel_cutoff: float

    def __post_init__(self):
        if not (0.0 < self.rel_cutoff < 1e-3):
            raise ValueError(
                f"rel_cutoff must lie in (0, 1e-3), got {self.rel_cutoff}"
            )

    @classmethod
    def default_for(cls, n_rows: int, n_cols: int) -> "SolveTolerance":
        """
        Default cutoff max(N, L) * 1e-12, capped below the allowed maximum.

        Args:
            n_rows: Number of rows N of the system matrix
            n_cols: Number of columns L of the system matrix

        Returns:
            SolveTolerance instance
        """
        cutoff = max(n_rows, n_cols, 1) * DEFAULT_CUTOFF_SCALE
        return cls(rel_cutoff=min(cutoff, 1e-4))


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """
    Coerce input to a finite 2-D float64 array.

    Args:
        values: Array-like input; 1-D input becomes a single column
        name: Operand name used in error messages

    Returns:
        2-D float64 array with at least one row and one column
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be at least 1x1, got shape {arr.shape}")
    check_finite(arr, name)
    return arr


def as_vector(values, name: str = "vector") -> np.ndarray:
    """Coerce input to a finite 1-D float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    check_finite(arr, name)
    return arr


def check_finite(arr: np.ndarray, name: str = "input") -> None:
    """Reject arrays holding NaN or Inf."""
    if not np.all(np.isfinite(arr)):
        raise NumericInputError(f"{name} contains non-finite entries")


def lstsq_min_norm(A, B, tol: Optional[SolveTolerance] = None) -> np.ndarray:
    """
    Minimum-norm least-squares solution of A X = B.

    Uses a thin SVD; singular values at or below ``tol.rel_cutoff * sigma_max``
    are dropped, which yields the pseudoinverse solution X = A^+ B.

    Args:
        A: System matrix, N x L
        B: Right-hand side, N x m (a 1-D array is treated as one column)
        tol: Rank threshold; defaults to SolveTolerance.default_for(N, L)

    Returns:
        Solution matrix, L x m
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape[0] != B.shape[0]:
        raise DimensionError(
            f"row count mismatch: A has {A.shape[0]} rows, B has {B.shape[0]}"
        )
    if tol is None:
        tol = SolveTolerance.default_for(*A.shape)

    try:
        U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")

    if s.size == 0 or s[0] == 0.0:
        return np.zeros((A.shape[1], B.shape[1]))

    keep = s > tol.rel_cutoff * s[0]
    coeffs = (U[:, keep].T @ B) / s[keep, None]
    return Vt[keep].T @ coeffs


def col_inner(u, v) -> float:
    """
    Inner product of two equal-length vectors.

    Args:
        u: First vector, length N
        v: Second vector, length N

    Returns:
        Sum of u_i * v_i
    """
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    if u.shape[0] != v.shape[0]:
        raise DimensionError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")
    return float(np.dot(u, v))


def frob_norm(M) -> float:
    """Frobenius norm: square root of the sum of squared entries."""
    arr = np.asarray(M, dtype=np.float64)
    check_finite(arr, "M")
    return float(np.linalg.norm(arr.reshape(-1)))
