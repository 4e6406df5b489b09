from itertools import permutations

import numpy as np
import pytest

from compfact import align_columns, match_factors, nnz_eps, rel_err
from compfact.exceptions import DimensionError


class TestRelErr:
    def test_equal_inputs(self):
        X = np.arange(12.0).reshape(3, 4)
        assert rel_err(X, X) == 0.0

    def test_zero_estimate(self):
        X = np.random.default_rng(0).standard_normal((5, 3))
        assert rel_err(np.zeros_like(X), X) == pytest.approx(1.0)

    def test_double_reference(self):
        X = np.random.default_rng(1).standard_normal((4, 4))
        assert rel_err(2 * X, X) == pytest.approx(1.0)

    def test_scale_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            X = rng.standard_normal((6, 2))
            Y = rng.standard_normal((6, 2))
            c = rng.uniform(0.1, 10) * rng.choice([-1, 1])
            assert rel_err(c * X, c * Y) == pytest.approx(rel_err(X, Y), rel=1e-12)

    def test_zero_reference_raises(self):
        with pytest.raises(ValueError):
            rel_err(np.ones((2, 2)), np.zeros((2, 2)))

    def test_shape_mismatch_raises(self):
        with pytest.raises(DimensionError):
            rel_err(np.ones((2, 2)), np.ones((3, 2)))


class TestNnzEps:
    def test_identity(self):
        assert nnz_eps(np.eye(5)) == 5

    def test_zero_matrix(self):
        assert nnz_eps(np.zeros((4, 4))) == 0

    def test_global_scaling_invariance(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((8, 8))
        X[np.abs(X) < 0.5] = 0.0
        base = nnz_eps(X)
        for c in (1e-6, 0.5, 3.0, 1e7, -2.0):
            assert nnz_eps(c * X) == base

    def test_planted_sparsity(self):
        from compfact import gen_matrix_instance

        inst = gen_matrix_instance(100, 30, 5, 10, seed=0)
        assert nnz_eps(inst.W) == 50

    def test_bad_eps(self):
        with pytest.raises(ValueError):
            nnz_eps(np.eye(2), eps_rel=0.0)


class TestMatchFactors:
    def test_identity_match(self):
        F = np.random.default_rng(4).standard_normal((20, 4))
        res = match_factors(F, F)
        assert np.array_equal(res.permutation, np.arange(4))
        assert np.allclose(res.correlations, 1.0)
        assert res.median_correlation == pytest.approx(1.0)

    def test_reversed_columns(self):
        F = np.random.default_rng(5).standard_normal((20, 4))
        res = match_factors(F[:, ::-1], F)
        assert np.array_equal(res.permutation, np.array([3, 2, 1, 0]))

    def test_against_brute_force(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            A = rng.standard_normal((20, 4))
            B = rng.standard_normal((20, 4))
            res = match_factors(A, B)
            total = np.abs(res.correlations).sum()

            def perm_total(perm):
                s = 0.0
                for j, i in enumerate(perm):
                    a = A[:, i] - A[:, i].mean()
                    b = B[:, j] - B[:, j].mean()
                    s += abs(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
                return s

            best = max(perm_total(p) for p in permutations(range(4)))
            assert total == pytest.approx(best, abs=1e-10)

    def test_constant_column_flagged(self):
        rng = np.random.default_rng(7)
        A = rng.standard_normal((10, 3))
        A[:, 1] = 2.0
        res = match_factors(A, rng.standard_normal((10, 3)))
        assert np.isfinite(res.correlations).all()
        matched_to_constant = np.flatnonzero(res.permutation == 1)[0]
        assert res.correlations[matched_to_constant] == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            match_factors(np.ones((5, 2)), np.ones((5, 3)))


class TestAlignColumns:
    def test_recovers_scaled_permutation(self):
        rng = np.random.default_rng(8)
        F = rng.standard_normal((30, 4))
        perm = np.array([2, 0, 3, 1])
        scales = np.array([0.5, -2.0, 3.0, -0.1])
        G = F[:, perm] * scales
        # inverse permutation applied to G should recover F up to scale
        aligned = align_columns(G, F)
        assert rel_err(aligned, F) < 1e-12

    def test_zero_column_maps_to_zero(self):
        F = np.random.default_rng(9).standard_normal((10, 2))
        G = F.copy()
        G[:, 0] = 0.0
        aligned = align_columns(G, F)
        assert np.all(aligned[:, 0] == 0.0)
