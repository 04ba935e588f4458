import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wildcat.dense import (
    ContractError,
    KernelSpec,
    as_matrix,
    gen_gaussian,
    kernel_block,
    kernel_diag,
    make_rng,
    max_norm,
    recenter_rows,
    row_norm,
    spectral_norm,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
matrices = st.tuples(st.integers(1, 8), st.integers(1, 8)).flatmap(
    lambda s: arrays(np.float64, s, elements=finite))


class TestValidation:
    def test_rejects_nan_and_inf(self):
        with pytest.raises(ContractError):
            as_matrix([[1.0, np.nan]])
        with pytest.raises(ContractError):
            as_matrix([[np.inf]])

    def test_rejects_wrong_rank(self):
        with pytest.raises(ContractError):
            as_matrix([1.0, 2.0])

    def test_upcasts_float32(self):
        m = as_matrix(np.ones((2, 2), dtype=np.float32))
        assert m.dtype == np.float64

    @pytest.mark.parametrize("beta,tau", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_kernel_spec_positive(self, beta, tau):
        with pytest.raises(ContractError):
            KernelSpec(beta, tau)


class TestKernel:
    def test_origin(self):
        np.testing.assert_array_equal(kernel_block(KernelSpec(3.0, 0.5), [[0, 0]], [[0, 0]]), [[1.0]])

    def test_unit_vectors(self):
        H = kernel_block(KernelSpec(1.0), [[1, 0]], [[1, 0], [0, 1]])
        np.testing.assert_allclose(H, [[math.e, 1.0]], rtol=1e-15)

    def test_temperature(self):
        H = kernel_block(KernelSpec(1.0, 2.0), [[2, 0]], [[2, 0]])
        np.testing.assert_allclose(H, [[math.e]], rtol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ContractError):
            kernel_block(KernelSpec(1.0), np.ones((2, 3)), np.ones((2, 2)))

    def test_diag_matches_block(self):
        X = gen_gaussian(7, 3, seed=1)
        spec = KernelSpec(0.7, 1.3)
        np.testing.assert_allclose(kernel_diag(spec, X), np.diag(kernel_block(spec, X, X)),
                                   rtol=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 64), st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_symmetric_psd(self, n, d, seed):
        X = gen_gaussian(n, d, 1.0, seed=seed)
        H = kernel_block(KernelSpec(1.0 / math.sqrt(d)), X, X)
        np.testing.assert_array_equal(H, H.T)
        rng = make_rng(seed, 99)
        for _ in range(5):
            u = rng.standard_normal(n)
            u /= np.linalg.norm(u)
            assert u @ H @ u >= -1e-9 * max_norm(H)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 10), st.integers(1, 10), st.floats(0.2, 5.0), st.integers(0, 1000))
    def test_rescaling_invariance(self, m, n, tau, seed):
        X = gen_gaussian(m, 3, seed=seed)
        Y = gen_gaussian(n, 3, seed=seed, stream=1)
        plain = kernel_block(KernelSpec(0.5), X, Y)
        # tau^2 X against Y with temperature tau is the same kernel
        scaled = kernel_block(KernelSpec(0.5, tau), tau * tau * X, Y)
        np.testing.assert_allclose(scaled, plain, rtol=1e-12)


class TestNorms:
    def test_max_norm(self):
        assert max_norm([[1, -3], [2, 0]]) == 3
        assert max_norm(np.zeros((2, 3))) == 0
        assert max_norm(np.eye(4)) == 1

    def test_row_norm(self):
        assert row_norm([[3, 4], [0, 1]]) == 5
        assert row_norm(np.zeros((3, 2))) == 0
        assert row_norm(np.eye(2)) == 1

    def test_empty(self):
        with pytest.raises(ContractError):
            max_norm(np.zeros((0, 3)))
        with pytest.raises(ContractError):
            row_norm(np.zeros((0, 3)))
        with pytest.raises(ContractError):
            spectral_norm(np.zeros((0, 0)))

    def test_spectral_examples(self):
        assert spectral_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, rel=1e-8)
        assert spectral_norm(np.zeros((3, 3))) == 0.0
        assert spectral_norm([[0.0, 2.0], [0.0, 0.0]]) == pytest.approx(2.0, rel=1e-8)

    def test_spectral_matches_svd(self):
        M = gen_gaussian(30, 20, seed=4)
        assert spectral_norm(M) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-6)

    def test_spectral_flags_nonconvergence(self):
        M = gen_gaussian(40, 40, seed=2)
        est, ok = spectral_norm(M, max_iters=2, full_output=True)
        assert not ok
        assert 0 < est <= np.linalg.svd(M, compute_uv=False)[0] * (1 + 1e-12)

    def test_spectral_deterministic(self):
        M = gen_gaussian(12, 9, seed=3)
        assert spectral_norm(M) == spectral_norm(M)

    @given(matrices)
    def test_norm_chain(self, M):
        rn, mn = row_norm(M), max_norm(M)
        assert mn <= rn * (1 + 1e-12)
        assert rn <= math.sqrt(M.shape[1]) * mn * (1 + 1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 10_000))
    def test_spectral_lower_bound(self, rows, cols, seed):
        M = gen_gaussian(rows, cols, seed=seed)
        assert spectral_norm(M) >= row_norm(M.T) / math.sqrt(rows) * (1 - 1e-9)


class TestRecenter:
    def test_examples(self):
        Kc, kb = recenter_rows([[1.0], [3.0]])
        np.testing.assert_array_equal(Kc, [[-1.0], [1.0]])
        np.testing.assert_array_equal(kb, [2.0])
        Kc, kb = recenter_rows([[5.0, 5.0]])
        np.testing.assert_array_equal(Kc, [[0.0, 0.0]])
        np.testing.assert_array_equal(kb, [5.0, 5.0])
        Kc, kb = recenter_rows([[1.0, -1.0], [-1.0, 1.0]])
        np.testing.assert_array_equal(Kc, [[1.0, -1.0], [-1.0, 1.0]])
        np.testing.assert_array_equal(kb, [0.0, 0.0])

    @given(matrices)
    def test_zero_column_means(self, K):
        Kc, _ = recenter_rows(K)
        assert np.abs(Kc.mean(axis=0)).max() <= 1e-12 * max(1.0, row_norm(K))


class TestGenerator:
    def test_deterministic(self):
        np.testing.assert_array_equal(gen_gaussian(5, 4, seed=11), gen_gaussian(5, 4, seed=11))

    def test_seeds_differ(self):
        assert not np.array_equal(gen_gaussian(4, 3, seed=7), gen_gaussian(4, 3, seed=8))

    def test_streams_differ(self):
        assert not np.array_equal(gen_gaussian(4, 3, seed=7), gen_gaussian(4, 3, seed=7, stream=1))

    def test_row_norm_target(self):
        G = gen_gaussian(50, 6, target_row_norm=1.0, seed=3)
        np.testing.assert_allclose(np.linalg.norm(G, axis=1), 1.0, atol=1e-12)
        assert abs(row_norm(G) - 1.0) <= 1e-12

    def test_frozen_first_draws(self):
        # Philox(key=seed) followed by Box-Muller; frozen so a change of
        # generator or transform is caught across platforms
        g = gen_gaussian(1, 4, seed=0)
        np.testing.assert_allclose(g[0], FROZEN_SEED0, rtol=0, atol=1e-15)

    def test_moments(self):
        G = gen_gaussian(200, 100, seed=5)
        assert abs(G.mean()) < 0.02
        assert abs(G.std() - 1.0) < 0.02

    def test_bad_shape(self):
        with pytest.raises(ContractError):
            gen_gaussian(0, 3)


# Philox4x64 key 0: u = random(4); pairs (1 - u[0], u[2]) and (1 - u[1], u[3])
# pushed through Box-Muller by hand in a separate script
FROZEN_SEED0 = [0.1165565154909856, 0.09819597806605489, -0.6835324004378501,
                -0.29281076280112783]
