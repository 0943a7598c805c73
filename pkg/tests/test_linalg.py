"""Truncated SVD, thin QR, and tridiagonal eigensolver kernels."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectraltt import linalg
from spectraltt.exceptions import InvalidInputError


def random_lowrank(m, n, r, seed, noise=0.0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
    if noise:
        A += noise * rng.standard_normal((m, n))
    return A


class TestTruncatedSVD:
    def test_reconstruction_within_budget(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            A = rng.standard_normal((15, 9))
            delta = 0.3 * np.linalg.norm(A)
            U, s, V, rank = linalg.truncated_svd(A, delta)
            err = np.linalg.norm(A - (U * s) @ V.T)
            assert err <= delta + 1e-12

    def test_exact_rank_detection(self):
        A = random_lowrank(30, 20, 4, seed=1)
        U, s, V, rank = linalg.truncated_svd(A, 1e-10 * np.linalg.norm(A))
        assert rank == 4

    def test_zero_budget_keeps_everything(self):
        A = np.random.default_rng(2).standard_normal((6, 6))
        U, s, V, rank = linalg.truncated_svd(A, 0.0)
        assert rank == 6
        assert np.allclose((U * s) @ V.T, A, atol=1e-12)

    def test_rank_is_minimal(self):
        # oracle: the discarded tail must exceed delta if one more column
        # were removed (rank minimality of the truncation)
        rng = np.random.default_rng(3)
        A = rng.standard_normal((12, 10))
        sv = np.linalg.svd(A, compute_uv=False)
        delta = np.sqrt(sv[-1] ** 2 + sv[-2] ** 2) * 1.0000001
        _, _, _, rank = linalg.truncated_svd(A, delta)
        assert rank == 8

    @given(st.integers(2, 10), st.integers(2, 10), st.floats(1e-6, 10.0))
    @settings(max_examples=50, deadline=None)
    def test_budget_property(self, m, n, scale):
        A = np.random.default_rng(m * 31 + n).standard_normal((m, n))
        delta = scale * np.linalg.norm(A) / 4.0
        U, s, V, rank = linalg.truncated_svd(A, delta)
        assert 1 <= rank <= min(m, n)
        assert np.linalg.norm(A - (U * s) @ V.T) <= delta + 1e-10 * np.linalg.norm(A)

    def test_rejects_non_matrix(self):
        with pytest.raises(InvalidInputError):
            linalg.truncated_svd(np.zeros(3), 0.1)


class TestSymtridiagEig:
    def test_against_dense_oracle(self):
        rng = np.random.default_rng(5)
        n = 12
        alpha = rng.standard_normal(n)
        beta = rng.uniform(0.5, 2.0, n - 1)
        T = np.diag(alpha) + np.diag(beta, 1) + np.diag(beta, -1)
        vals, first = linalg.symtridiag_eig(alpha, beta)
        ref_vals, ref_vecs = np.linalg.eigh(T)
        assert np.allclose(vals, ref_vals, atol=1e-12)
        assert np.allclose(np.abs(first), np.abs(ref_vecs[0]), atol=1e-10)

    def test_ascending_order(self):
        vals, _ = linalg.symtridiag_eig(np.zeros(9), np.ones(8))
        assert np.all(np.diff(vals) > 0)
