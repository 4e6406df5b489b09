"""Error metrics and factor alignment.

Factors returned by a factorization are only identifiable up to column
permutation and per-column scale (and sign, for signed methods), so every
benchmark in this package compares factor matrices after aligning columns
with :func:`match_factors` and, where a Frobenius error is reported,
rescaling each matched column by its least-squares optimal coefficient
(:func:`align_columns`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._utils import as_matrix
from .exceptions import DimensionError

__all__ = [
    "MatchResult",
    "rel_err",
    "match_factors",
    "nnz_eps",
    "align_columns",
]


def rel_err(X, X_star) -> float:
    """Relative Frobenius error ``||X - X_star||_F / ||X_star||_F``.

    Raises
    ------
    ValueError
        If ``X_star`` is identically zero (the error is undefined) or the
        shapes differ.
    """
    X = np.asarray(X, dtype=float)
    X_star = np.asarray(X_star, dtype=float)
    if X.shape != X_star.shape:
        raise DimensionError(f"shape mismatch: {X.shape} vs {X_star.shape}")
    denom = np.linalg.norm(X_star)
    if denom == 0.0:
        raise ValueError("rel_err is undefined for an all-zero reference")
    return float(np.linalg.norm(X - X_star) / denom)


def nnz_eps(X, eps_rel: float = 1e-8) -> int:
    """Number of entries with ``|x| > eps_rel * max|X|``.

    The thresholded count is the computable stand-in for the l0 norm: float
    noise below ``eps_rel`` times the largest magnitude never counts as
    support. An all-zero array has count 0. Invariant under nonzero global
    rescaling.
    """
    if eps_rel <= 0:
        raise ValueError("eps_rel must be positive")
    X = np.asarray(X, dtype=float)
    m = np.max(np.abs(X)) if X.size else 0.0
    if m == 0.0:
        return 0
    return int(np.count_nonzero(np.abs(X) > eps_rel * m))


@dataclass(frozen=True)
class MatchResult:
    """Column assignment between an estimated and a reference factor.

    Attributes
    ----------
    permutation : ndarray of int, shape (r,)
        ``permutation[j]`` is the column of the estimate matched to column
        ``j`` of the reference; a bijection on ``[0, r)``.
    correlations : ndarray of float, shape (r,)
        Signed Pearson correlation of each matched pair. Pairs involving a
        constant column are flagged with correlation 0.
    median_correlation : float
        Median of the absolute matched correlations (factor signs are not
        identifiable, so the summary is sign-invariant).
    """

    permutation: np.ndarray
    correlations: np.ndarray
    median_correlation: float


def _column_correlations(F_hat: np.ndarray, F_true: np.ndarray) -> np.ndarray:
    """Pearson correlation matrix C[i, j] between F_hat[:, i] and F_true[:, j]."""
    A = F_hat - F_hat.mean(axis=0)
    B = F_true - F_true.mean(axis=0)
    na = np.linalg.norm(A, axis=0)
    nb = np.linalg.norm(B, axis=0)
    C = A.T @ B
    denom = np.outer(na, nb)
    with np.errstate(invalid="ignore", divide="ignore"):
        C = np.where(denom > 0, C / np.where(denom > 0, denom, 1.0), 0.0)
    return np.clip(C, -1.0, 1.0)


def match_factors(F_hat, F_true) -> MatchResult:
    """Pair columns of two factor matrices by maximum-weight matching.

    Solves the assignment problem on the ``r x r`` matrix of absolute
    Pearson correlations exactly (Jonker-Volgenant via scipy), so the
    returned pairing maximizes the total |correlation| over all ``r!``
    permutations. Signed correlations under the optimal assignment are
    reported; sign itself is not used for matching because factor signs are
    not identifiable.
    """
    F_hat = as_matrix(F_hat, "F_hat")
    F_true = as_matrix(F_true, "F_true")
    if F_hat.shape != F_true.shape:
        raise DimensionError(f"shape mismatch: {F_hat.shape} vs {F_true.shape}")
    C = _column_correlations(F_hat, F_true)
    row_ind, col_ind = linear_sum_assignment(-np.abs(C))
    # col j of F_true gets F_hat column permutation[j]
    perm = np.empty(F_true.shape[1], dtype=int)
    perm[col_ind] = row_ind
    corr = C[perm, np.arange(F_true.shape[1])]
    return MatchResult(
        permutation=perm,
        correlations=corr,
        median_correlation=float(np.median(np.abs(corr))),
    )


def align_columns(F_hat, F_true, permutation=None) -> np.ndarray:
    """Permute and rescale columns of ``F_hat`` to best approximate ``F_true``.

    Applies the matching permutation (computed here unless given) and then
    scales each matched column by its least-squares coefficient
    ``<f_hat, f_true> / <f_hat, f_hat>``, which also resolves sign. Returns
    the aligned copy of ``F_hat``; use with :func:`rel_err` for
    permutation/scale-invariant factor errors.
    """
    F_hat = as_matrix(F_hat, "F_hat")
    F_true = as_matrix(F_true, "F_true")
    if permutation is None:
        permutation = match_factors(F_hat, F_true).permutation
    G = F_hat[:, permutation].copy()
    for j in range(G.shape[1]):
        denom = float(G[:, j] @ G[:, j])
        c = float(G[:, j] @ F_true[:, j]) / denom if denom > 0 else 0.0
        G[:, j] *= c
    return G
