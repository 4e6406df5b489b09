"""Low-rank matrix factorization: NMF and l1-penalized sparse PCA.

NMF minimizes ``||M - WH||_F^2`` over nonnegative factors by alternating
projected-gradient steps with a backtracking (Armijo) line search starting
at step 1, so the recorded objective trace is non-increasing by
construction. Factors are initialized with the absolute value of mean-zero
Gaussians whose variance is ``sum(M) / (n m r)``.

Sparse PCA minimizes ``1/2 ||M - WH||_F^2 + lambda ||W||_1`` subject to
unit l2 norm on each row of ``H``, alternating a cyclic coordinate-descent
lasso update of ``W`` (run to subgradient stationarity) with a least-squares
update of ``H`` followed by row normalization; initialization is the
deterministic truncated SVD.

Both are exposed as plain functions returning a :class:`FactorPair` and as
sklearn-style estimators (:class:`ProjectedGradientNMF`, :class:`SparsePCA`)
operating on matrices laid out as ``(n features) x (m samples)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ._utils import as_matrix, rng_stream

__all__ = [
    "FactorPair",
    "nmf",
    "sparse_pca",
    "init_noise_variance",
    "reconstruction_gradients",
    "ProjectedGradientNMF",
    "SparsePCA",
]

_ARMIJO_SIGMA = 0.01
_ARMIJO_BETA = 0.5
_MAX_BACKTRACK = 30
_MAX_GROW = 10


@dataclass(frozen=True)
class FactorPair:
    """A rank-r factorization ``M ~ W H`` with its optimization trace.

    ``objective_trace[0]`` is the objective at initialization and entry
    ``t`` the value after outer iteration ``t``; for NMF the trace is
    non-increasing (every line-search step is accepted only on sufficient
    decrease).
    """

    W: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    objective_trace: np.ndarray
    method: str
    r: int
    n_iter: int
    seed: int


def init_noise_variance(M, r: int) -> float:
    """Variance ``sum_ij M_ij / (n m r)`` of the NMF initialization."""
    M = as_matrix(M, "M")
    n, m = M.shape
    return float(M.sum() / (n * m * r))


def reconstruction_gradients(M, W, H):
    """Gradients of ``||M - WH||_F^2``: ``(2 (WH - M) H^T, 2 W^T (WH - M))``."""
    R = W @ H - M
    return 2.0 * R @ H.T, 2.0 * W.T @ R


def _armijo_step(M, W, H, step, update_w: bool):
    """One projected-gradient step on W (or H) with backtracking.

    Accepts a candidate only under the sufficient-decrease condition
    ``f(X+) - f(X) <= sigma * <grad, X+ - X>``; grows the step while the
    condition keeps holding, shrinks it otherwise. Returns the (possibly
    unchanged) factor, the step to warm-start the next call, and the new
    objective value.
    """
    if update_w:
        grad = 2.0 * (W @ H - M) @ H.T
    else:
        grad = 2.0 * W.T @ (W @ H - M)
    X = W if update_w else H

    def objective(Xc):
        return float(np.linalg.norm(M - (Xc @ H if update_w else W @ Xc)) ** 2)

    f0 = objective(X)

    def try_step(alpha):
        Xc = np.maximum(X - alpha * grad, 0.0)
        fc = objective(Xc)
        ok = fc - f0 <= _ARMIJO_SIGMA * float((grad * (Xc - X)).sum())
        return ok, Xc, fc

    ok, Xc, fc = try_step(step)
    if ok:
        for _ in range(_MAX_GROW):
            ok2, Xc2, fc2 = try_step(step / _ARMIJO_BETA)
            if not ok2 or fc2 >= fc:
                break
            step /= _ARMIJO_BETA
            Xc, fc = Xc2, fc2
        return Xc, step, fc
    for _ in range(_MAX_BACKTRACK):
        step *= _ARMIJO_BETA
        ok, Xc, fc = try_step(step)
        if ok:
            return Xc, step, fc
    return X, step, f0  # no acceptable step; leave the factor unchanged


def _pg_subproblem(M, W, H, step, update_w: bool, max_inner: int, rel_tol: float = 1e-10):
    """Approximately solve one nonnegative least-squares subproblem by
    repeated projected-gradient steps (the alternating-NNLS inner loop).

    Stops early once a step no longer yields a relative objective decrease.
    """
    X = W if update_w else H
    f_prev = None
    f = None
    for _ in range(max_inner):
        if update_w:
            X, step, f = _armijo_step(M, X, H, step, update_w=True)
        else:
            X, step, f = _armijo_step(M, W, X, step, update_w=False)
        if f_prev is not None and f_prev - f <= rel_tol * max(f_prev, 1.0):
            break
        f_prev = f
    return X, step, f


def nmf(M, r: int, n_iter: int = 250, seed: int = 0, max_inner: int = 20,
        allow_negative_data: bool = False) -> FactorPair:
    """Nonnegative factorization of ``M`` by alternating projected gradient.

    Each outer iteration approximately solves the W subproblem and then the
    H subproblem with up to ``max_inner`` projected-gradient steps apiece
    (backtracking line search, initial step 1, warm-started across calls).

    Parameters
    ----------
    M : array, shape (n, m)
        Entrywise nonnegative input. Compressed noisy data can dip below
        zero; pass ``allow_negative_data=True`` to factorize it anyway (the
        objective is well defined for any M, only the factors are
        constrained).
    r : int
        Target rank, ``1 <= r <= min(n, m)``.
    n_iter : int
        Fixed outer-iteration budget (default 250).
    seed : int
        Seed for the half-normal initialization.
    max_inner : int
        Projected-gradient step cap per subproblem solve.
    """
    M = as_matrix(M, "M")
    n, m = M.shape
    if not allow_negative_data and np.any(M < 0):
        raise ValueError("NMF requires an entrywise nonnegative input matrix")
    if not (1 <= r <= min(n, m)):
        raise ValueError(f"need 1 <= r <= min(n, m), got r={r}")
    if n_iter < 1 or max_inner < 1:
        raise ValueError("n_iter and max_inner must be >= 1")

    sigma = np.sqrt(max(init_noise_variance(M, r), 1e-12))
    W = np.abs(rng_stream(seed, 0).standard_normal((n, r))) * sigma
    H = np.abs(rng_stream(seed, 1).standard_normal((r, m))) * sigma

    trace = [float(np.linalg.norm(M - W @ H) ** 2)]
    step_w = step_h = 1.0
    for _ in range(n_iter):
        W, step_w, _ = _pg_subproblem(M, W, H, step_w, True, max_inner)
        H, step_h, f = _pg_subproblem(M, W, H, step_h, False, max_inner)
        trace.append(f)
    return FactorPair(W=W, H=H, objective_trace=np.asarray(trace),
                      method="nmf", r=r, n_iter=n_iter, seed=seed)


def _lasso_cd(M, W, H, lam: float, tol: float, max_sweeps: int = 200):
    """Cyclic coordinate descent on ``1/2 ||M - WH||^2 + lam ||W||_1`` over W.

    All rows of W share the design ``H^T``, so each coordinate update is
    vectorized across rows. Runs until the maximum subgradient violation
    falls below ``tol``.
    """
    R = M - W @ H
    sq = np.einsum("ij,ij->i", H, H)  # ||H_j.||^2 per component
    for _ in range(max_sweeps):
        for j in range(W.shape[1]):
            if sq[j] == 0.0:
                continue
            rho = R @ H[j] + W[:, j] * sq[j]
            w_new = np.sign(rho) * np.maximum(np.abs(rho) - lam, 0.0) / sq[j]
            diff = W[:, j] - w_new
            if np.any(diff):
                R += np.outer(diff, H[j])
                W[:, j] = w_new
        grad = -R @ H.T
        viol_active = np.abs(grad + lam * np.sign(W))[W != 0]
        viol_zero = np.maximum(np.abs(grad) - lam, 0.0)[W == 0]
        viol = max(viol_active.max() if viol_active.size else 0.0,
                   viol_zero.max() if viol_zero.size else 0.0)
        if viol <= tol:
            break
    return W, R


def sparse_pca(M, r: int, lam: float, n_iter: int = 100, seed: int = 0,
               cd_tol: float = 1e-8) -> FactorPair:
    """Sparse PCA by alternating lasso and normalized least squares.

    Each outer iteration updates ``W`` by coordinate descent at the current
    ``H``, refits ``H`` by least squares, and renormalizes every row of
    ``H`` to unit l2 norm with the norm absorbed into the matching column
    of ``W`` (so the product is unchanged and the constraint holds after
    every iteration). Initialization is the truncated SVD of ``M``; ``seed``
    is accepted for interface parity with :func:`nmf` but the procedure is
    deterministic.
    """
    M = as_matrix(M, "M")
    n, m = M.shape
    if not (1 <= r <= min(n, m)):
        raise ValueError(f"need 1 <= r <= min(n, m), got r={r}")
    if lam < 0:
        raise ValueError("lam must be >= 0")

    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    W = U[:, :r] * s[:r]
    H = Vt[:r].copy()

    tol = cd_tol * max(1.0, float(np.abs(M).max()), lam)

    def objective():
        return float(0.5 * np.linalg.norm(M - W @ H) ** 2 + lam * np.abs(W).sum())

    trace = [objective()]
    for it in range(n_iter):
        W, _ = _lasso_cd(M, W, H, lam, tol)
        H, *_ = np.linalg.lstsq(W, M, rcond=None)
        norms = np.linalg.norm(H, axis=1)
        for i in range(r):
            if norms[i] > 0:
                H[i] /= norms[i]
                W[:, i] *= norms[i]
            else:
                # dead component: park H on a deterministic unit row
                H[i] = 0.0
                H[i, i % m] = 1.0
        trace.append(objective())
    return FactorPair(W=W, H=H, objective_trace=np.asarray(trace),
                      method="spca", r=r, n_iter=n_iter, seed=seed)


class ProjectedGradientNMF(BaseEstimator):
    """Estimator wrapper around :func:`nmf`.

    Operates on matrices laid out as ``(n, m)`` with samples in columns;
    ``fit_transform`` returns the left factor ``W``.

    Attributes (after fit): ``W_``, ``H_``, ``objective_trace_``.
    """

    def __init__(self, n_components: int = 2, n_iter: int = 250, random_state: int = 0):
        self.n_components = n_components
        self.n_iter = n_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        pair = nmf(X, self.n_components, n_iter=self.n_iter, seed=self.random_state)
        self.W_ = pair.W
        self.H_ = pair.H
        self.objective_trace_ = pair.objective_trace
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).W_


class SparsePCA(BaseEstimator):
    """Estimator wrapper around :func:`sparse_pca` (same layout conventions)."""

    def __init__(self, n_components: int = 2, alpha: float = 0.01, n_iter: int = 100,
                 random_state: int = 0):
        self.n_components = n_components
        self.alpha = alpha
        self.n_iter = n_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        pair = sparse_pca(X, self.n_components, self.alpha, n_iter=self.n_iter,
                          seed=self.random_state)
        self.W_ = pair.W
        self.H_ = pair.H
        self.objective_trace_ = pair.objective_trace
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).W_
