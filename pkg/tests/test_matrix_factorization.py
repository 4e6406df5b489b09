import inspect

import numpy as np
import pytest

from compfact import (
    ProjectedGradientNMF,
    SparsePCA,
    gen_matrix_instance,
    init_noise_variance,
    nmf,
    nnz_eps,
    reconstruction_gradients,
    rel_err,
    sparse_pca,
)


class TestNMF:
    def test_rank_one_planted(self):
        rng = np.random.default_rng(5)
        w = np.abs(rng.standard_normal(30))
        h = np.abs(rng.standard_normal(20))
        M = np.outer(w, h)
        pair = nmf(M, 1, n_iter=250, seed=0)
        assert rel_err(pair.W @ pair.H, M) <= 1e-4

    def test_default_iteration_budget(self):
        assert inspect.signature(nmf).parameters["n_iter"].default == 250

    def test_init_variance_formula(self):
        assert init_noise_variance(np.ones((10, 10)), 5) == pytest.approx(0.2)

    def test_negative_input_rejected(self):
        M = np.ones((5, 5))
        M[0, 0] = -0.1
        with pytest.raises(ValueError):
            nmf(M, 2)
        # explicit opt-in for compressed noisy data
        pair = nmf(M, 2, n_iter=5, allow_negative_data=True)
        assert np.all(pair.W >= 0)

    def test_objective_trace_non_increasing(self):
        inst = gen_matrix_instance(40, 30, 3, 6, noise_ratio=0.1, nonneg=True, seed=1)
        pair = nmf(inst.M, 3, n_iter=60, seed=2, allow_negative_data=True)
        diffs = np.diff(pair.objective_trace)
        assert np.all(diffs <= 1e-9 * max(1.0, pair.objective_trace[0]))

    def test_factors_nonnegative(self):
        inst = gen_matrix_instance(30, 25, 3, 5, nonneg=True, seed=3)
        pair = nmf(inst.M, 3, n_iter=40, seed=0)
        assert np.all(pair.W >= 0) and np.all(pair.H >= 0)

    def test_determinism(self):
        inst = gen_matrix_instance(25, 20, 2, 4, nonneg=True, seed=4)
        a = nmf(inst.M, 2, n_iter=30, seed=9)
        b = nmf(inst.M, 2, n_iter=30, seed=9)
        assert np.array_equal(a.W, b.W) and np.array_equal(a.H, b.H)

    def test_rank_validation(self):
        with pytest.raises(ValueError):
            nmf(np.ones((4, 6)), 5)
        with pytest.raises(ValueError):
            nmf(np.ones((4, 6)), 2, n_iter=0)

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(11)
        M = rng.random((8, 6))
        W = rng.random((8, 3))
        H = rng.random((3, 6))
        gW, gH = reconstruction_gradients(M, W, H)

        def f(Wc, Hc):
            return np.linalg.norm(M - Wc @ Hc) ** 2

        eps = 1e-6
        num_gW = np.zeros_like(W)
        for i in range(8):
            for j in range(3):
                Wp, Wm = W.copy(), W.copy()
                Wp[i, j] += eps
                Wm[i, j] -= eps
                num_gW[i, j] = (f(Wp, H) - f(Wm, H)) / (2 * eps)
        assert np.linalg.norm(gW - num_gW) / np.linalg.norm(num_gW) < 1e-5

        num_gH = np.zeros_like(H)
        for i in range(3):
            for j in range(6):
                Hp, Hm = H.copy(), H.copy()
                Hp[i, j] += eps
                Hm[i, j] -= eps
                num_gH[i, j] = (f(W, Hp) - f(W, Hm)) / (2 * eps)
        assert np.linalg.norm(gH - num_gH) / np.linalg.norm(num_gH) < 1e-5


class TestSparsePCA:
    def test_exact_rank_r_unregularized(self):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((30, 4)) @ rng.standard_normal((4, 25))
        pair = sparse_pca(M, 4, 0.0, n_iter=20)
        assert rel_err(pair.W @ pair.H, M) <= 1e-6

    def test_h_rows_unit_norm_after_every_iteration(self):
        inst = gen_matrix_instance(30, 24, 3, 6, noise_ratio=0.1, seed=1)
        # deterministic updates: the state after j iterations is a prefix of
        # the state after more, so check several budgets
        for n_iter in (1, 2, 5):
            pair = sparse_pca(inst.M, 3, 0.05, n_iter=n_iter)
            norms = np.linalg.norm(pair.H, axis=1)
            assert np.max(np.abs(norms - 1.0)) < 1e-9

    def test_sparsity_monotone_in_penalty(self):
        # heavier l1 weight never yields a denser W on a fixed instance
        for seed in (4, 5):
            inst = gen_matrix_instance(60, 40, 3, 8, noise_ratio=0.05, seed=seed)
            counts = []
            for lam in (0.0, 0.01, 0.1, 1.0):
                pair = sparse_pca(inst.M, 3, lam, n_iter=40)
                counts.append(nnz_eps(pair.W))
            assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_rank_validation(self):
        with pytest.raises(ValueError):
            sparse_pca(np.ones((4, 6)), 5, 0.1)
        with pytest.raises(ValueError):
            sparse_pca(np.ones((4, 6)), 2, -1.0)

    def test_deterministic(self):
        inst = gen_matrix_instance(20, 16, 2, 5, seed=6)
        a = sparse_pca(inst.M, 2, 0.02, n_iter=10)
        b = sparse_pca(inst.M, 2, 0.02, n_iter=10)
        assert np.array_equal(a.W, b.W) and np.array_equal(a.H, b.H)


class TestEstimators:
    def test_nmf_estimator_roundtrip(self):
        inst = gen_matrix_instance(30, 20, 3, 5, nonneg=True, seed=0)
        est = ProjectedGradientNMF(n_components=3, n_iter=40, random_state=1)
        W = est.fit_transform(inst.M)
        assert W.shape == (30, 3)
        assert est.H_.shape == (3, 20)
        assert est.objective_trace_[0] >= est.objective_trace_[-1]

    def test_get_params_round_trip(self):
        est = ProjectedGradientNMF(n_components=4, n_iter=10, random_state=7)
        params = est.get_params()
        assert params == {"n_components": 4, "n_iter": 10, "random_state": 7}
        clone = ProjectedGradientNMF(**params)
        assert clone.get_params() == params

    def test_spca_estimator(self):
        inst = gen_matrix_instance(25, 20, 2, 4, seed=2)
        est = SparsePCA(n_components=2, alpha=0.05, n_iter=10)
        W = est.fit_transform(inst.M)
        assert W.shape == (25, 2)
        assert np.max(np.abs(np.linalg.norm(est.H_, axis=1) - 1.0)) < 1e-9
