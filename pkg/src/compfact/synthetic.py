"""Planted synthetic instances for matrices and tensors.

Matrix instances follow the sparse-factor model: the left factor is
``W = B * Y`` (elementwise) where each column of the binary support ``B``
has exactly ``k`` ones chosen uniformly, the values ``Y`` and the right
factor ``H`` are i.i.d. continuous draws, and dense Gaussian noise ``E`` is
rescaled to an exact ``||E||_F / ||WH||_F`` ratio. Tensor instances plant
``A = X * Y`` with k-sparse columns and Gaussian ``B``, ``C`` verified to
have full column rank. All generators are pure and deterministic: every
random component draws from its own substream of the instance seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._utils import rng_stream, sample_without_replacement
from .exceptions import DimensionError

__all__ = [
    "SynthInstance",
    "SynthTensorInstance",
    "SymmetricTensorInstance",
    "gen_matrix_instance",
    "gen_tensor_instance",
    "gen_symmetric_incoherent_tensor",
]

_RANK_TOL = 1e-10
_MAX_REDRAWS = 100


@dataclass(frozen=True)
class SynthInstance:
    """Planted matrix factorization ``M = WH + E`` with k-sparse W columns."""

    W: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    M_clean: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    n: int
    m: int
    r: int
    k: int
    noise_ratio: float
    nonneg: bool
    seed: int


@dataclass(frozen=True)
class SynthTensorInstance:
    """Planted order-3 tensor with k-sparse first-mode factor columns."""

    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    T_clean: np.ndarray = field(repr=False)
    T: np.ndarray = field(repr=False)
    n: int
    m1: int
    m2: int
    r: int
    k: int
    noise_ratio: float
    seed: int


@dataclass(frozen=True)
class SymmetricTensorInstance:
    """Symmetric tensor ``sum_i w_i a_i (x) a_i (x) a_i`` with unit-norm,
    near-orthogonal factor columns."""

    T: np.ndarray = field(repr=False)
    factors: np.ndarray = field(repr=False)
    weights: np.ndarray
    incoherence: float
    weight_ratio: float
    seed: int


def _draw_values(rng: np.random.Generator, shape, dist: str) -> np.ndarray:
    if dist == "normal":
        return rng.standard_normal(shape)
    if dist == "uniform":
        mag = rng.uniform(0.5, 1.5, size=shape)
        sign = np.where(rng.random(shape) < 0.5, -1.0, 1.0)
        return mag * sign
    raise ValueError(f"unknown value distribution {dist!r}")


def _redraw_zeros(rng: np.random.Generator, values: np.ndarray, dist: str) -> np.ndarray:
    # exact float zeros have probability ~0 but would break the nnz invariant
    for _ in range(_MAX_REDRAWS):
        zeros = values == 0.0
        if not zeros.any():
            return values
        values[zeros] = _draw_values(rng, int(zeros.sum()), dist)
    raise RuntimeError("could not draw nonzero values")


def _sparse_factor(n, r, k, seed, key, dist) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Binary support B (k ones per column), values Y, and their product."""
    B = np.zeros((n, r))
    for j in range(r):
        B[sample_without_replacement(rng_stream(seed, key, j), n, k), j] = 1.0
    rng = rng_stream(seed, key, r)
    Y = _redraw_zeros(rng, _draw_values(rng, (n, r), dist), dist)
    return B, Y, B * Y


def _full_row_rank(H: np.ndarray) -> bool:
    s = np.linalg.svd(H, compute_uv=False)
    return s.size > 0 and s[-1] > _RANK_TOL * s[0]


def gen_matrix_instance(
    n: int,
    m: int,
    r: int,
    k: int,
    noise_ratio: float = 0.0,
    nonneg: bool = False,
    seed: int = 0,
    value_dist: str = "normal",
) -> SynthInstance:
    """Generate a planted instance ``M = WH + E``.

    ``W = B * Y`` with exactly ``k`` nonzeros per column; ``Y`` and ``H``
    entries are i.i.d. draws from ``value_dist`` (standard normal by
    default, or a uniform(0.5, 1.5)-magnitude alternative for conditioning
    studies). With ``nonneg`` the elementwise absolute value is applied to
    ``W`` and ``H``. ``E`` is dense Gaussian rescaled so that
    ``||E||_F / ||WH||_F`` equals ``noise_ratio`` exactly.
    """
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if not (1 <= r <= min(n, m)):
        raise ValueError(f"need 1 <= r <= min(n, m), got r={r}")
    if noise_ratio < 0:
        raise ValueError("noise_ratio must be >= 0")

    B, Y, W = _sparse_factor(n, r, k, seed, 0, value_dist)
    rng_h = rng_stream(seed, 1)
    H = _draw_values(rng_h, (r, m), value_dist)
    for _ in range(_MAX_REDRAWS):
        if _full_row_rank(H):
            break
        H = _draw_values(rng_h, (r, m), value_dist)
    else:
        raise RuntimeError("could not generate a full-row-rank H")

    if nonneg:
        W = np.abs(W)
        H = np.abs(H)
    M_clean = W @ H
    if noise_ratio > 0:
        E = rng_stream(seed, 2).standard_normal((n, m))
        E *= noise_ratio * np.linalg.norm(M_clean) / np.linalg.norm(E)
        M = M_clean + E
    else:
        M = M_clean.copy()
    return SynthInstance(W=W, H=H, B=B, Y=Y, M_clean=M_clean, M=M,
                         n=n, m=m, r=r, k=k, noise_ratio=noise_ratio,
                         nonneg=nonneg, seed=seed)


def gen_tensor_instance(
    n: int,
    m1: int,
    m2: int,
    r: int,
    k: int,
    noise_ratio: float = 0.0,
    seed: int = 0,
    value_dist: str = "normal",
) -> SynthTensorInstance:
    """Generate a planted rank-r tensor with a k-sparse first-mode factor.

    ``B`` and ``C`` are i.i.d. Gaussian and regenerated (up to a bounded
    number of attempts) if they fail a numerical full-column-rank check at
    tolerance 1e-10; requiring ``r <= min(m1, m2)`` keeps that generic.
    """
    if r > min(m1, m2):
        raise DimensionError(f"need r <= min(m1, m2) for full column rank, got r={r}")
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")

    X, Y, A = _sparse_factor(n, r, k, seed, 0, value_dist)

    def _full_col_rank_draw(key, rows):
        rng = rng_stream(seed, key)
        for _ in range(_MAX_REDRAWS):
            F = rng.standard_normal((rows, r))
            if _full_row_rank(F.T):
                return F
        raise RuntimeError("could not generate a full-column-rank factor")

    B = _full_col_rank_draw(1, m1)
    C = _full_col_rank_draw(2, m2)
    T_clean = np.einsum("ir,jr,kr->ijk", A, B, C)
    if noise_ratio > 0:
        E = rng_stream(seed, 3).standard_normal(T_clean.shape)
        E *= noise_ratio * np.linalg.norm(T_clean) / np.linalg.norm(E)
        T = T_clean + E
    else:
        T = T_clean.copy()
    return SynthTensorInstance(A=A, B=B, C=C, X=X, Y=Y, T_clean=T_clean, T=T,
                               n=n, m1=m1, m2=m2, r=r, k=k,
                               noise_ratio=noise_ratio, seed=seed)


def gen_symmetric_incoherent_tensor(
    n: int,
    r: int,
    weights,
    mu_max: float = 0.0,
    seed: int = 0,
) -> SymmetricTensorInstance:
    """Generate ``T = sum_i w_i a_i (x) a_i (x) a_i`` with controlled incoherence.

    Factor columns are unit norm with pairwise ``|<a_i, a_j>| <= mu_max``:
    an orthonormal Gaussian basis for ``mu_max = 0``, otherwise the basis is
    perturbed with fresh Gaussian columns and the measured incoherence is
    verified, retrying up to 100 draws before giving up.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size != r:
        raise DimensionError("weights must be a length-r vector")
    if np.any(weights <= 0):
        raise ValueError("weights must be positive")
    if r > n:
        raise DimensionError(f"need r <= n, got r={r}, n={n}")

    rng = rng_stream(seed, 0)
    A = None
    mu = 0.0
    for _ in range(_MAX_REDRAWS):
        Q, _ = np.linalg.qr(rng.standard_normal((n, r)))
        if mu_max == 0.0:
            A, mu = Q, 0.0
            break
        cand = Q + (mu_max / 4.0) * rng.standard_normal((n, r))
        cand /= np.linalg.norm(cand, axis=0, keepdims=True)
        gram = cand.T @ cand
        off = np.abs(gram - np.eye(r)).max()
        if 0.0 < off <= mu_max:
            A, mu = cand, float(off)
            break
    if A is None:
        raise RuntimeError(f"could not reach incoherence <= {mu_max} for n={n}, r={r}")

    T = np.einsum("ir,jr,kr,r->ijk", A, A, A, weights)
    return SymmetricTensorInstance(
        T=T, factors=A, weights=weights, incoherence=mu,
        weight_ratio=float(weights.max() / weights.min()), seed=seed,
    )
