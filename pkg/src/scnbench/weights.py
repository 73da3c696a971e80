"""
Weights - Output-weight evaluation strategies

SC-I (and the IRVFL baseline) project the residual onto the newest activation
column and freeze the resulting row. SC-II re-solves the last K rows by least
squares against a target deflated by the frozen rows. SC-III re-solves all rows.
"""

from typing import Optional

import numpy as np

from .configurator import DEGENERATE_FLOOR, DegenerateCandidateError
from .linalg import DimensionError, SolveTolerance, as_matrix, lstsq_min_norm


def eval_constructive(e, h) -> np.ndarray:
    """
    Constructive output weights for a new node: beta_q = (e_q . h) / (h . h).

    Args:
        e: Residual before the node, N x m
        h: Activation column of the new node, length N

    Returns:
        Weight row of length m
    """
    e = as_matrix(e, "e")
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    if h.shape[0] != e.shape[0]:
        raise DimensionError(f"h has length {h.shape[0]}, residual has {e.shape[0]} rows")
    hh = float(h @ h)
    if hh < DEGENERATE_FLOOR:
        raise DegenerateCandidateError("activation column is zero")
    return (e.T @ h) / hh


def eval_global(H, T, tol: Optional[SolveTolerance] = None) -> np.ndarray:
    """
    Global least-squares output weights B = H^+ T.

    Args:
        H: Hidden activation matrix, N x L
        T: Targets, N x m
        tol: Pseudoinverse cutoff

    Returns:
        Weight matrix, L x m
    """
    return lstsq_min_norm(H, T, tol)


def eval_window(H, T, beta_prev, K: int,
                tol: Optional[SolveTolerance] = None) -> np.ndarray:
    """
    Window output weights: freeze the first L - K rows, re-solve the last K.

    The last K rows solve min || (T - H~ beta_prev) - H_K beta ||_F where H~ holds
    the first L - K columns of H and H_K the last K. With L <= K this is the
    global solve.

    Args:
        H: Hidden activation matrix, N x L
        T: Targets, N x m
        beta_prev: Frozen rows, (L - K) x m (ignored when L <= K)
        K: Window size
        tol: Pseudoinverse cutoff

    Returns:
        Weight matrix, L x m, whose first L - K rows equal beta_prev
    """
    if K < 1:
        raise ValueError(f"window size must be at least 1, got {K}")
    H = as_matrix(H, "H")
    T = as_matrix(T, "T")
    L = H.shape[1]
    if L <= K:
        return eval_global(H, T, tol)

    n_fixed = L - K
    beta_prev = np.asarray(beta_prev, dtype=np.float64)
    if beta_prev.ndim == 1 and T.shape[1] == 1:
        beta_prev = beta_prev.reshape(-1, 1)
    if beta_prev.shape != (n_fixed, T.shape[1]):
        raise DimensionError(
            f"beta_prev has shape {beta_prev.shape}, expected ({n_fixed}, {T.shape[1]})"
        )
    deflated = T - H[:, :n_fixed] @ beta_prev
    window_rows = lstsq_min_norm(H[:, n_fixed:], deflated, tol)
    return np.vstack([beta_prev, window_rows])
