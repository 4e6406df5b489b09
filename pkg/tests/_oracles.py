"""Independent brute-force oracles shared by the test modules.

These deliberately avoid the library's own code paths: dense linear algebra
and exhaustive enumeration only.
"""

from itertools import combinations

import numpy as np


def sparse_l1_oracle(P_dense, y, kmax=2, feas_tol=1e-9):
    """Enumerate every support of size <= kmax, solve the equality-constrained
    subproblem by least squares, and return (best_l1, best_x, n_feasible)
    over the feasible candidates."""
    d, n = P_dense.shape
    scale = max(1.0, float(np.linalg.norm(y)))
    best_l1 = np.inf
    best_x = None
    feasible = 0
    for k in range(1, kmax + 1):
        for S in combinations(range(n), k):
            A = P_dense[:, S]
            z, *_ = np.linalg.lstsq(A, y, rcond=None)
            if np.linalg.norm(A @ z - y) <= feas_tol * scale:
                feasible += 1
                l1 = float(np.abs(z).sum())
                if l1 < best_l1:
                    best_l1 = l1
                    best_x = np.zeros(n)
                    best_x[list(S)] = z
    return best_l1, best_x, feasible


def planted_small_instance(index):
    """Instance ``index`` of the fixed small-recovery corpus: (P, x, y).

    Dimensions cycle over n in 12..14, d in 9..11, sparsity k in {1, 2};
    planted values are seeded normals with magnitudes floored at 0.5.
    """
    import compfact as cf

    rng = np.random.default_rng(20_000 + index)
    n = 12 + index % 3
    d = 9 + (index // 3) % 3
    k = 1 + index % 2
    P = cf.gen_projection(n, d, 3, seed=777 + index)
    x = np.zeros(n)
    supp = rng.choice(n, k, replace=False)
    vals = rng.standard_normal(k)
    signs = np.where(vals >= 0, 1.0, -1.0)
    vals = signs * np.maximum(np.abs(vals), 0.5)
    x[supp] = vals
    return P, x, P.toarray() @ x


def reconstruct_triple_loop(A, B, C, weights=None):
    """O(n m1 m2 r) reference reconstruction of a CP model."""
    n, r = A.shape
    m1, m2 = B.shape[0], C.shape[0]
    w = np.ones(r) if weights is None else weights
    T = np.zeros((n, m1, m2))
    for i in range(n):
        for j in range(m1):
            for k in range(m2):
                for l in range(r):
                    T[i, j, k] += w[l] * A[i, l] * B[j, l] * C[k, l]
    return T
