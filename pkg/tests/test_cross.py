"""maxvol pivoting, the evaluation ledger, and sampled TT construction."""

import itertools
import warnings

import numpy as np
import pytest

from spectraltt import tt
from spectraltt.cross import (
    CrossConfig,
    EvalLedger,
    cross_on_quantics,
    dmrg_cross,
    maxvol,
)
from spectraltt.exceptions import ConfigurationError, InvalidInputError, RankCapError


class TestMaxvol:
    def test_dominance_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            A = rng.standard_normal((12, 4))
            rows = maxvol(A, tol=5e-2)
            B = A @ np.linalg.inv(A[rows])
            assert np.max(np.abs(B)) <= 1.0 + 5e-2 + 1e-12

    def test_near_optimal_determinant(self):
        # exhaustive oracle over all C(8,3) row subsets
        rng = np.random.default_rng(1)
        for trial in range(20):
            A = rng.standard_normal((8, 3))
            rows = maxvol(A, tol=5e-2)
            got = abs(np.linalg.det(A[rows]))
            best = max(abs(np.linalg.det(A[list(c)]))
                       for c in itertools.combinations(range(8), 3))
            # dominance bound implies det within (1+tol)^r of the optimum
            assert got >= best / (1.05**3) - 1e-12

    def test_identity_block_is_fixed_point(self):
        A = np.vstack([np.eye(3), 0.1 * np.ones((4, 3))])
        rows = maxvol(A)
        assert set(rows) == {0, 1, 2}

    def test_returns_sorted_indices(self):
        A = np.random.default_rng(2).standard_normal((10, 4))
        rows = maxvol(A)
        assert np.all(np.diff(rows) > 0)

    def test_rejects_wide_matrix(self):
        with pytest.raises(InvalidInputError):
            maxvol(np.ones((3, 5)))


class TestEvalLedger:
    def test_deduplicates_and_counts(self):
        calls = []

        def f(idx):
            calls.append(len(idx))
            return idx[:, 0].astype(float)

        led = EvalLedger()
        idx = np.array([[0, 1], [2, 3], [0, 1]])
        vals = led.evaluate(f, idx)
        assert np.allclose(vals, [0, 2, 0])
        assert led.eval_count == 2
        led.evaluate(f, np.array([[2, 3]]))
        assert led.eval_count == 2  # cache hit, no new calls
        assert sum(calls) == 2

    def test_batch_size_splits_calls(self):
        sizes = []

        def f(idx):
            sizes.append(len(idx))
            return np.zeros(len(idx))

        led = EvalLedger(batch_size=3)
        led.evaluate(f, np.arange(16).reshape(8, 2))
        assert sizes == [3, 3, 2]

    def test_bad_callback_shape(self):
        led = EvalLedger()
        with pytest.raises(InvalidInputError):
            led.evaluate(lambda idx: np.zeros(1), np.arange(8).reshape(4, 2))


def tensor_callback(A):
    def f(idx):
        idx = np.asarray(idx, dtype=np.int64)
        return A[tuple(idx.T)]
    return f


class TestDmrgCross:
    def test_exact_recovery_of_lowrank_tensor(self):
        rng = np.random.default_rng(3)
        cores = [rng.standard_normal(s) for s in [(1, 6, 2), (2, 6, 3), (3, 6, 2), (2, 6, 1)]]
        A = tt.tt_full(tt.TTTensor(cores))
        led = EvalLedger()
        t = dmrg_cross(A.shape, tensor_callback(A), CrossConfig(eps=1e-10, seed=0), led)
        assert t.ranks == (1, 2, 3, 2, 1)
        assert np.linalg.norm(tt.tt_full(t) - A) / np.linalg.norm(A) < 1e-10
        assert led.eval_count < A.size  # strictly fewer samples than entries

    def test_full_rank_small_tensor(self):
        A = np.random.default_rng(4).standard_normal((4, 4, 4))
        t = dmrg_cross(A.shape, tensor_callback(A), CrossConfig(eps=1e-12, seed=0))
        assert np.linalg.norm(tt.tt_full(t) - A) / np.linalg.norm(A) < 1e-10

    def test_deterministic_given_seed(self):
        A = np.random.default_rng(5).standard_normal((5, 5, 5))
        led1, led2 = EvalLedger(), EvalLedger()
        t1 = dmrg_cross(A.shape, tensor_callback(A), CrossConfig(eps=1e-8, seed=7), led1)
        t2 = dmrg_cross(A.shape, tensor_callback(A), CrossConfig(eps=1e-8, seed=7), led2)
        assert t1.ranks == t2.ranks
        assert led1.eval_count == led2.eval_count
        for c1, c2 in zip(t1.cores, t2.cores):
            assert np.array_equal(c1, c2)

    def test_single_dimension_bypass(self):
        A = np.arange(9.0)
        t = dmrg_cross((9,), tensor_callback(A), CrossConfig())
        assert np.allclose(tt.tt_full(t), A)

    def test_rank_cap_raises_with_best_tt(self):
        A = np.random.default_rng(6).standard_normal((8, 8, 8))
        with pytest.raises(RankCapError) as exc:
            dmrg_cross(A.shape, tensor_callback(A),
                       CrossConfig(eps=1e-14, seed=0, rank_cap=2))
        # the best approximation found so far rides along (None if the cap
        # was hit before the first full sweep completed)
        assert hasattr(exc.value, "best_tt")
        if exc.value.best_tt is not None:
            assert max(exc.value.best_tt.ranks) <= 2

    def test_constant_tensor_rank_one(self):
        t = dmrg_cross((5, 6, 7), lambda idx: np.full(len(idx), 3.5),
                       CrossConfig(eps=1e-10, seed=0))
        assert t.ranks == (1, 1, 1, 1)
        assert abs(t[(2, 3, 4)] - 3.5) < 1e-12


class TestCrossOnQuantics:
    def test_matches_plain_cross_result(self):
        x = np.linspace(0, 1, 32)
        A = np.exp(-((x[:, None] - 0.3) ** 2 + (x[None, :] - 0.6) ** 2))
        led = EvalLedger()
        t = cross_on_quantics((32, 32), tensor_callback(A),
                              CrossConfig(eps=1e-10, seed=0), led)
        assert t.shape == (32, 32)
        assert np.linalg.norm(tt.tt_full(t) - A) / np.linalg.norm(A) < 1e-9
        assert led.eval_count < A.size

    def test_small_modes_skip_folding(self):
        # sizes below the folding threshold use the plain path: physical
        # ranks of the result stay bounded by the mode sizes
        A = np.random.default_rng(7).standard_normal((4, 4, 4))
        t = cross_on_quantics((4, 4, 4), tensor_callback(A), CrossConfig(eps=1e-12, seed=0))
        assert np.linalg.norm(tt.tt_full(t) - A) / np.linalg.norm(A) < 1e-10
        assert max(t.ranks) <= 4

    def test_non_power_sizes_fall_back(self):
        A = np.random.default_rng(8).standard_normal((6, 5))
        t = cross_on_quantics((6, 5), tensor_callback(A), CrossConfig(eps=1e-12, seed=0))
        assert np.linalg.norm(tt.tt_full(t) - A) / np.linalg.norm(A) < 1e-10


class TestCrossConfig:
    def test_rejects_nonpositive_eps(self):
        with pytest.raises(ConfigurationError):
            CrossConfig(eps=0.0)

    def test_rejects_zero_caps(self):
        with pytest.raises(ConfigurationError):
            CrossConfig(max_sweeps=0)
