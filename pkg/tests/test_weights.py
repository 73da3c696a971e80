"""
Tests for output-weight evaluation (constructive, window, global)
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from scnbench.configurator import DegenerateCandidateError
from scnbench.linalg import DimensionError
from scnbench.weights import eval_constructive, eval_global, eval_window


@pytest.fixture
def system():
    rng = np.random.default_rng(21)
    H = rng.uniform(0.0, 1.0, size=(40, 6))
    T = rng.uniform(0.0, 1.0, size=(40, 2))
    return H, T


class TestConstructive:
    """beta = e.h / h.h"""

    def test_projection_onto_itself(self):
        assert_allclose(eval_constructive([[0.2], [0.4]], [0.2, 0.4]), [1.0])

    def test_orthogonal_gives_zero(self):
        assert_allclose(eval_constructive([[1.0], [1.0]], [1.0, -1.0]), [0.0])

    def test_hand_projection(self):
        assert_allclose(eval_constructive([[1.0], [3.0]], [1.0, 1.0]), [2.0])

    def test_multi_output(self):
        beta = eval_constructive([[1.0, 2.0], [3.0, -2.0]], [1.0, 1.0])
        assert_allclose(beta, [2.0, 0.0])

    def test_matches_per_column_least_squares(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            e = rng.standard_normal((30, 3))
            h = rng.uniform(0.0, 1.0, 30)
            beta = eval_constructive(e, h)
            for q in range(3):
                oracle, *_ = np.linalg.lstsq(h.reshape(-1, 1), e[:, q], rcond=None)
                assert beta[q] == pytest.approx(oracle[0], rel=1e-10)
                for step in (1e-3, -1e-3):
                    worse = np.linalg.norm(e[:, q] - (beta[q] + step) * h)
                    assert np.linalg.norm(e[:, q] - beta[q] * h) <= worse

    def test_zero_column(self):
        with pytest.raises(DegenerateCandidateError):
            eval_constructive([[1.0], [2.0]], [0.0, 0.0])

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            eval_constructive([[1.0], [2.0]], [1.0, 1.0, 1.0])


class TestGlobal:
    """B = H^+ T"""

    def test_identity(self):
        assert_allclose(eval_global(np.eye(2), [[0.3], [0.7]]), [[0.3], [0.7]], atol=1e-15)

    def test_single_column_equals_constructive(self):
        h = np.array([0.2, 0.5, 0.9, 0.1])
        T = np.array([[0.3], [0.1], [0.8], [0.4]])
        assert_allclose(eval_global(h.reshape(-1, 1), T)[0], eval_constructive(T, h),
                        rtol=1e-12)

    def test_rank_one_two_columns(self):
        h = np.array([1.0, 2.0, 2.0])
        H = np.column_stack([h, 2.0 * h])
        T = np.array([[1.0], [0.0], [2.0]])
        oracle = np.linalg.pinv(H) @ T
        assert_allclose(eval_global(H, T), oracle, rtol=1e-10, atol=1e-14)


class TestWindow:
    """Freeze the first L - K rows, re-solve the last K"""

    def test_hand_deflation(self):
        B = eval_window(np.eye(2), [[1.0], [1.0]], [[1.0]], K=1)
        assert_allclose(B, [[1.0], [1.0]], atol=1e-15)

    def test_window_covering_everything_is_global(self, system):
        H, T = system
        assert_array_equal(eval_window(H, T, np.zeros((0, 2)), K=6), eval_global(H, T))
        assert_array_equal(eval_window(H, T, None, K=10), eval_global(H, T))

    def test_frozen_rows_kept(self, system):
        H, T = system
        beta_prev = np.arange(8, dtype=float).reshape(4, 2)
        B = eval_window(H, T, beta_prev, K=2)
        assert B.shape == (6, 2)
        assert_array_equal(B[:4], beta_prev)

    def test_window_rows_solve_deflated_target(self, system):
        H, T = system
        beta_prev = eval_global(H[:, :3], T)
        B = eval_window(H, T, beta_prev, K=3)
        deflated = T - H[:, :3] @ beta_prev
        assert_allclose(H[:, 3:].T @ (deflated - H[:, 3:] @ B[3:]), np.zeros((3, 2)),
                        atol=1e-10)

    def test_error_ordering(self, system):
        # Global <= window <= constructive training error for the same H
        H, T = system
        e = T.copy()
        rows = []
        for j in range(H.shape[1]):
            beta = eval_constructive(e, H[:, j])
            rows.append(beta)
            e = e - np.outer(H[:, j], beta)
        constructive_err = np.linalg.norm(e)
        window_err = np.linalg.norm(T - H @ eval_window(H, T, np.vstack(rows)[:3], K=3))
        global_err = np.linalg.norm(T - H @ eval_global(H, T))
        assert global_err <= window_err + 1e-12
        assert window_err <= constructive_err + 1e-12

    def test_bad_frozen_shape(self, system):
        H, T = system
        with pytest.raises(DimensionError):
            eval_window(H, T, np.zeros((3, 2)), K=2)

    def test_window_must_be_positive(self, system):
        H, T = system
        with pytest.raises(ValueError):
            eval_window(H, T, None, K=0)
