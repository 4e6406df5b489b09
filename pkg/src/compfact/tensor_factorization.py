"""CP decomposition of order-3 tensors and the symmetric power method.

The workhorse is alternating least squares with factor orthogonalization
during the first few sweeps (Orth-ALS schedule) and an optional
non-negative mode in which every column update is clamped to the
non-negative orthant (hierarchical column-wise updates, which keep the
reconstruction error non-increasing). Returned factor columns are unit
l2-norm with scale absorbed into a weights vector and signs flipped so the
max-magnitude entry of each column is positive.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from ._utils import as_tensor3, rng_stream
from .exceptions import DegenerateInputError, DimensionError

__all__ = [
    "TensorFactors",
    "unfold_mode1",
    "fold_mode1",
    "khatri_rao",
    "cp_reconstruct",
    "cp_als",
    "nncp_als",
    "tensor_power_method",
    "check_full_column_rank",
    "CPDecomposition",
]

_DEAD_COLUMN_EPS = 1e-12


@dataclass(frozen=True)
class TensorFactors:
    """CP factors ``T ~ sum_l weights[l] A_l (x) B_l (x) C_l``.

    ``error_trace`` holds the relative reconstruction error after each ALS
    sweep; sweeps after the orthogonalized warm-up (``n_warmup``) never
    increase it.
    """

    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)
    weights: Optional[np.ndarray] = None
    error_trace: Optional[np.ndarray] = None
    n_warmup: int = 0

    @property
    def rank(self) -> int:
        return self.A.shape[1]


def unfold_mode1(T) -> np.ndarray:
    """Mode-1 matricization: entry ``(i, j*m2 + k)`` is ``T[i, j, k]``."""
    T = as_tensor3(T, "T")
    n, m1, m2 = T.shape
    return T.reshape(n, m1 * m2)


def fold_mode1(X, m1: int, m2: int) -> np.ndarray:
    """Inverse of :func:`unfold_mode1`."""
    X = np.asarray(X, dtype=float)
    return X.reshape(X.shape[0], m1, m2)


def khatri_rao(U, V) -> np.ndarray:
    """Column-wise Kronecker product: row ``j*rows(V) + k`` is ``U[j] * V[k]``."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.shape[1] != V.shape[1]:
        raise DimensionError("khatri_rao operands need equal column counts")
    return np.einsum("jr,kr->jkr", U, V).reshape(U.shape[0] * V.shape[0], U.shape[1])


def _check_factor_dims(A, B, C, weights):
    if not (A.ndim == B.ndim == C.ndim == 2):
        raise DimensionError("factors must be matrices")
    r = A.shape[1]
    if B.shape[1] != r or C.shape[1] != r:
        raise DimensionError("factors must share the same number of columns")
    if weights is not None and np.asarray(weights).shape != (r,):
        raise DimensionError("weights must be a length-r vector")


def cp_reconstruct(A, B, C, weights=None) -> np.ndarray:
    """Dense tensor ``sum_l w_l A_l (x) B_l (x) C_l`` (w defaults to ones)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    _check_factor_dims(A, B, C, weights)
    if weights is None:
        return np.einsum("ir,jr,kr->ijk", A, B, C)
    return np.einsum("ir,jr,kr,r->ijk", A, B, C, np.asarray(weights, dtype=float))


def _normalize_factors(A, B, C):
    """Unit-norm columns, scale in weights, max-magnitude entries positive."""
    A, B, C = A.copy(), B.copy(), C.copy()
    r = A.shape[1]
    weights = np.ones(r)
    for M in (A, B, C):
        norms = np.linalg.norm(M, axis=0)
        safe = np.where(norms > 0, norms, 1.0)
        M /= safe
        weights *= norms
        flips = np.array([np.sign(M[np.argmax(np.abs(M[:, l])), l]) or 1.0 for l in range(r)])
        M *= flips
        weights *= flips
    return A, B, C, weights


def _mode_ls(V, gram):
    """Solve factor @ gram = V for the factor (least-squares fallback)."""
    try:
        return np.linalg.solve(gram, V.T).T
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(gram, V.T, rcond=None)[0].T


def _mode_hals(F, V, gram, rng):
    """Column-wise nonnegative updates; each column solve is exact, so the
    objective never increases. Dead columns are reseeded to keep rank."""
    r = F.shape[1]
    for l in range(r):
        g = gram[l, l]
        if g <= _DEAD_COLUMN_EPS:
            F[:, l] = rng.random(F.shape[0]) * 1e-6
            continue
        col = F[:, l] + (V[:, l] - F @ gram[:, l]) / g
        F[:, l] = np.maximum(col, 0.0)
        if not F[:, l].any():
            F[:, l] = rng.random(F.shape[0]) * 1e-6
    return F


def cp_als(
    T,
    r: int,
    n_iter: int = 200,
    seed: int = 0,
    nonneg: bool = False,
    n_orth_iter: int = 5,
) -> TensorFactors:
    """Rank-r CP decomposition by (orthogonalized) alternating least squares.

    The factor matrices are QR-orthonormalized at the start of each of the
    first ``n_orth_iter`` sweeps, after which plain per-mode updates run:
    exact least squares in signed mode, clamped column-wise updates in
    non-negative mode. Initialization is Gaussian (its absolute value when
    ``nonneg``), drawn from per-factor substreams of ``seed``.
    """
    T = as_tensor3(T, "T")
    n, m1, m2 = T.shape
    if r < 1:
        raise ValueError("r must be >= 1")
    if r > min(n * m1, n * m2, m1 * m2):
        raise DimensionError(f"rank {r} too large for tensor of shape {T.shape}")
    if nonneg and np.any(T < 0):
        warnings.warn("nonnegative CP requested on a tensor with negative entries",
                      stacklevel=2)

    def init(key, rows):
        G = rng_stream(seed, key).standard_normal((rows, r))
        return np.abs(G) if nonneg else G

    A, B, C = init(0, n), init(1, m1), init(2, m2)
    rng_reseed = rng_stream(seed, 3)

    T1 = T.reshape(n, m1 * m2)
    T2 = np.ascontiguousarray(T.transpose(1, 0, 2)).reshape(m1, n * m2)
    T3 = np.ascontiguousarray(T.transpose(2, 0, 1)).reshape(m2, n * m1)
    norm_T = float(np.linalg.norm(T))
    if norm_T == 0.0:
        zero = TensorFactors(np.zeros((n, r)), np.zeros((m1, r)), np.zeros((m2, r)),
                             weights=np.zeros(r), error_trace=np.zeros(n_iter),
                             n_warmup=min(n_orth_iter, n_iter))
        return zero

    def orthonormalize(F):
        Q, _ = np.linalg.qr(F)
        if Q.shape[1] < r:  # rank-deficient input; pad with random directions
            pad = rng_reseed.standard_normal((F.shape[0], r - Q.shape[1]))
            Q = np.hstack([Q, pad / np.linalg.norm(pad, axis=0)])
        return Q

    trace = []
    for sweep in range(n_iter):
        if sweep < n_orth_iter:
            A, B, C = orthonormalize(A), orthonormalize(B), orthonormalize(C)
        for (F, U, G1, G2, K1, K2) in (
            (A, T1, B, C, B, C),
            (B, T2, A, C, A, C),
            (C, T3, A, B, A, B),
        ):
            gram = (G1.T @ G1) * (G2.T @ G2)
            V = U @ khatri_rao(K1, K2)
            if nonneg:
                F[:] = _mode_hals(F, V, gram, rng_reseed)
            else:
                F[:] = _mode_ls(V, gram)
        err = float(np.linalg.norm(T - cp_reconstruct(A, B, C)) / norm_T)
        trace.append(err)

    A, B, C, weights = _normalize_factors(A, B, C)
    return TensorFactors(A=A, B=B, C=C, weights=weights,
                         error_trace=np.asarray(trace),
                         n_warmup=min(n_orth_iter, n_iter))


def nncp_als(T, r: int, n_iter: int = 200, seed: int = 0,
             n_orth_iter: int = 5) -> TensorFactors:
    """Non-negative CP decomposition (``cp_als`` with clamped updates)."""
    return cp_als(T, r, n_iter=n_iter, seed=seed, nonneg=True,
                  n_orth_iter=n_orth_iter)


def _check_symmetric(T) -> None:
    for axes in ((0, 2, 1), (1, 0, 2), (2, 1, 0)):
        if not np.allclose(T, T.transpose(axes), rtol=1e-8, atol=1e-10):
            raise ValueError("tensor power method requires a symmetric tensor")


def tensor_power_method(T, x0=None, n_steps: int = 50, seed: int = 0):
    """Symmetric tensor power iteration ``x <- T(I, x, x) / ||T(I, x, x)||``.

    Runs for the full step budget and returns the final unit vector together
    with its Rayleigh weight ``T(x, x, x)``. ``x0`` is normalized if given;
    otherwise a random unit vector is drawn from ``seed``.

    Raises
    ------
    DegenerateInputError
        If an iterate maps to the zero vector.
    """
    T = as_tensor3(T, "T")
    n = T.shape[0]
    if T.shape != (n, n, n):
        raise DimensionError("tensor power method needs an n x n x n tensor")
    _check_symmetric(T)
    if x0 is None:
        x = rng_stream(seed, 0).standard_normal(n)
    else:
        x = np.asarray(x0, dtype=float).copy()
        if x.shape != (n,):
            raise DimensionError("x0 must be a length-n vector")
    nrm = np.linalg.norm(x)
    if nrm == 0:
        raise DegenerateInputError("initial vector is zero")
    x /= nrm

    for _ in range(n_steps):
        v = np.einsum("ijk,j,k->i", T, x, x)
        nrm = float(np.linalg.norm(v))
        if nrm == 0.0:
            raise DegenerateInputError("power iterate collapsed to zero")
        x = v / nrm
    weight = float(np.einsum("ijk,i,j,k->", T, x, x, x))
    return x, weight


def check_full_column_rank(A, tol: float = 1e-10) -> bool:
    """True iff the smallest singular value is >= ``tol`` times the largest."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] == 0:
        return True
    s = np.linalg.svd(A, compute_uv=False)
    if A.shape[0] < A.shape[1]:
        return False
    return bool(s[-1] >= tol * s[0])


class CPDecomposition(BaseEstimator):
    """Estimator wrapper around :func:`cp_als`.

    Attributes (after fit): ``A_``, ``B_``, ``C_``, ``weights_``,
    ``error_trace_``.
    """

    def __init__(self, n_components: int = 2, n_iter: int = 200, nonneg: bool = False,
                 n_orth_iter: int = 5, random_state: int = 0):
        self.n_components = n_components
        self.n_iter = n_iter
        self.nonneg = nonneg
        self.n_orth_iter = n_orth_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        fac = cp_als(X, self.n_components, n_iter=self.n_iter, seed=self.random_state,
                     nonneg=self.nonneg, n_orth_iter=self.n_orth_iter)
        self.A_ = fac.A
        self.B_ = fac.B
        self.C_ = fac.C
        self.weights_ = fac.weights
        self.error_trace_ = fac.error_trace
        return self
