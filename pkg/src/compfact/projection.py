"""Sparse binary projection matrices and expander certification.

A projection matrix is a ``d x n`` binary matrix with exactly ``p`` nonzero
entries per column, the column supports drawn uniformly without replacement
and independently across columns. Viewed as a bipartite graph (columns on
the left, rows on the right), a good projection is an expander: every small
set of columns touches many rows. :func:`certify_expander` measures that
property on a concrete matrix, either exhaustively or by sampling, and
:func:`expander_failure_bound` evaluates the union-bound estimate of the
probability that a random matrix fails to expand.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from ._utils import as_matrix, as_tensor3, rng_stream, sample_without_replacement
from .exceptions import BudgetExceededError, DimensionError

__all__ = [
    "ProjectionMatrix",
    "ExpanderReport",
    "gen_projection",
    "project_matrix",
    "project_tensor_mode1",
    "neighborhood_size",
    "certify_expander",
    "expander_failure_bound",
    "default_nnz_per_column",
]


def default_nnz_per_column(n: int) -> int:
    """Default per-column sparsity ``max(5, ceil(3 log2 n))``.

    Benchmarks in this package use ``p = 5``; the logarithmic rule kicks in
    only for very large ambient dimensions.
    """
    return max(5, int(math.ceil(3 * math.log2(max(n, 2)))))


@dataclass(frozen=True)
class ProjectionMatrix:
    """Sparse binary ``d x n`` sensing matrix, stored column-wise.

    Attributes
    ----------
    d : int
        Number of rows (compressed dimension).
    n : int
        Number of columns (ambient dimension).
    p : int
        Nonzeros per column; every column support has exactly ``p``
        distinct, sorted row indices in ``[0, d)``.
    cols : ndarray of int, shape (n, p)
        Row ``j`` holds the sorted support of column ``j``. Read-only.
    seed : int
        RNG seed the matrix was generated from (or -1 if loaded/constructed
        from explicit supports).
    """

    d: int
    n: int
    p: int
    cols: np.ndarray
    seed: int = -1

    def __post_init__(self):
        cols = np.ascontiguousarray(np.asarray(self.cols, dtype=np.int64))
        if cols.shape != (self.n, self.p):
            raise DimensionError(f"cols must have shape ({self.n}, {self.p}), got {cols.shape}")
        if cols.size and (cols.min() < 0 or cols.max() >= self.d):
            raise ValueError("column support indices must lie in [0, d)")
        cols = np.sort(cols, axis=1)
        if np.any(cols[:, 1:] == cols[:, :-1]):
            raise ValueError("column supports must contain distinct indices")
        cols.setflags(write=False)
        object.__setattr__(self, "cols", cols)
        indptr = np.arange(0, self.n * self.p + 1, self.p)
        mat = sp.csc_matrix(
            (np.ones(self.n * self.p), cols.ravel(), indptr), shape=(self.d, self.n)
        ).tocsr()
        object.__setattr__(self, "_csr", mat)

    @property
    def nnz(self) -> int:
        return self.n * self.p

    def toarray(self) -> np.ndarray:
        """Dense 0/1 array, mostly for small tests."""
        return self._csr.toarray()

    def tocsr(self) -> sp.csr_matrix:
        return self._csr

    def column_support(self, j: int) -> np.ndarray:
        return self.cols[j]

    def to_json(self) -> str:
        obj = {"d": self.d, "n": self.n, "p": self.p, "seed": self.seed,
               "cols": self.cols.tolist()}
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text: str) -> "ProjectionMatrix":
        obj = json.loads(text)
        return cls(d=int(obj["d"]), n=int(obj["n"]), p=int(obj["p"]),
                   cols=np.asarray(obj["cols"], dtype=np.int64), seed=int(obj["seed"]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "ProjectionMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def gen_projection(n: int, d: int, p: int, seed: int = 0) -> ProjectionMatrix:
    """Generate a random sparse binary projection matrix.

    Each column's support is a uniform ``p``-subset of ``[0, d)``, sampled
    by partial Fisher-Yates from a per-column PCG64 substream of ``seed``,
    so the structure is reproducible bit-for-bit given ``(n, d, p, seed)``.
    Compression uses ``d < n``; structure oracles may ask for ``d >= n``,
    which is allowed.

    Raises
    ------
    DimensionError
        Unless ``1 <= p <= d`` and ``n >= 1``.
    """
    if n < 1 or not (1 <= p <= d):
        raise DimensionError(f"need 1 <= p <= d and n >= 1, got n={n}, d={d}, p={p}")
    cols = np.empty((n, p), dtype=np.int64)
    for j in range(n):
        cols[j] = sample_without_replacement(rng_stream(seed, j), d, p)
    return ProjectionMatrix(d=d, n=n, p=p, cols=cols, seed=seed)


def project_matrix(P: ProjectionMatrix, M) -> np.ndarray:
    """Compute ``P @ M`` for an ``n x m`` dense matrix.

    Each output cell is the exact sum of the ``p`` entries of the
    corresponding column supports (sparse-dense product).
    """
    M = as_matrix(M, "M")
    if M.shape[0] != P.n:
        raise DimensionError(f"M has {M.shape[0]} rows, expected n={P.n}")
    return np.asarray(P.tocsr() @ M)


def project_tensor_mode1(P: ProjectionMatrix, T) -> np.ndarray:
    """Project the first mode of an ``n x m1 x m2`` tensor: unfold, multiply, refold."""
    T = as_tensor3(T, "T")
    n, m1, m2 = T.shape
    if n != P.n:
        raise DimensionError(f"tensor first mode is {n}, expected n={P.n}")
    flat = T.reshape(n, m1 * m2)
    return np.asarray(P.tocsr() @ flat).reshape(P.d, m1, m2)


def _column_bitmasks(P) -> list[int]:
    """Column supports as integer bitmasks over rows; accepts a ProjectionMatrix
    or any 2-d array whose nonzero pattern defines the supports."""
    if isinstance(P, ProjectionMatrix):
        masks = []
        for j in range(P.n):
            mask = 0
            for i in P.cols[j]:
                mask |= 1 << int(i)
            masks.append(mask)
        return masks
    A = np.asarray(P)
    if A.ndim != 2:
        raise DimensionError("support matrix must be 2-dimensional")
    masks = []
    for j in range(A.shape[1]):
        rows = np.flatnonzero(A[:, j])
        mask = 0
        for i in rows:
            mask |= 1 << int(i)
        masks.append(mask)
    return masks


def neighborhood_size(P, S) -> int:
    """``|N(S)|``: rows with a nonzero in at least one column of ``S``.

    ``P`` may be a :class:`ProjectionMatrix` or a binary/real matrix whose
    nonzero pattern is used. ``S`` is a nonempty collection of column
    indices.
    """
    S = list(S)
    if not S:
        raise ValueError("S must be nonempty")
    if isinstance(P, ProjectionMatrix):
        ncols = P.n
        union: set[int] = set()
        for j in S:
            if not (0 <= j < ncols):
                raise ValueError(f"column index {j} out of range [0, {ncols})")
            union.update(P.cols[j].tolist())
        return len(union)
    A = np.asarray(P)
    if A.ndim != 2:
        raise DimensionError("support matrix must be 2-dimensional")
    for j in S:
        if not (0 <= j < A.shape[1]):
            raise ValueError(f"column index {j} out of range [0, {A.shape[1]})")
    return int(np.count_nonzero(np.any(A[:, S] != 0, axis=1)))


@dataclass(frozen=True)
class ExpanderReport:
    """Result of measuring expansion on a concrete projection matrix.

    ``alpha_observed`` is the minimum of ``|N(S)| / (|S| p)`` over the
    subsets examined (all subsets of size <= ``gamma_n`` in exhaustive mode,
    a uniform sample per size level otherwise); the matrix is certified at
    threshold ``alpha`` iff ``alpha_observed >= alpha``.
    """

    alpha_observed: float
    worst_subset: tuple
    subsets_tested: int
    exhaustive: bool
    gamma_n: int
    alpha: float
    certified: bool


def _subset_count(n: int, gamma_n: int) -> int:
    return sum(math.comb(n, t) for t in range(1, gamma_n + 1))


def certify_expander(
    P: ProjectionMatrix,
    gamma_n: int,
    alpha: float = 4.0 / 5.0,
    mode: str = "exhaustive",
    trials: int = 10_000,
    sample_seed: int = 0,
    budget: int = 10_000_000,
) -> ExpanderReport:
    """Certify that every column subset of size <= ``gamma_n`` expands.

    In exhaustive mode every subset is enumerated (allowed only while the
    total count stays within ``budget``); in sampled mode all singletons are
    evaluated and ``trials`` subsets are drawn uniformly, split evenly over
    the size levels ``2..gamma_n``. The reduction (min over subsets) is
    deterministic given ``sample_seed``.

    Raises
    ------
    BudgetExceededError
        In exhaustive mode when the enumeration exceeds ``budget``.
    """
    if gamma_n < 1:
        raise ValueError("gamma_n must be >= 1")
    gamma_n = min(gamma_n, P.n)
    masks = _column_bitmasks(P)
    p = P.p

    best_ratio = math.inf
    worst: tuple = ()
    tested = 0

    def consider(subset) -> None:
        nonlocal best_ratio, worst, tested
        union = 0
        for j in subset:
            union |= masks[j]
        ratio = union.bit_count() / (len(subset) * p)
        tested += 1
        if ratio < best_ratio:
            best_ratio = ratio
            worst = tuple(subset)

    if mode == "exhaustive":
        if _subset_count(P.n, gamma_n) > budget:
            raise BudgetExceededError(
                f"exhaustive enumeration of {_subset_count(P.n, gamma_n)} subsets exceeds "
                f"budget {budget}; use mode='sampled'"
            )
        for t in range(1, gamma_n + 1):
            for subset in combinations(range(P.n), t):
                consider(subset)
    elif mode == "sampled":
        for j in range(P.n):
            consider((j,))
        levels = list(range(2, gamma_n + 1))
        if levels:
            rng = rng_stream(sample_seed, 0xE)
            per_level = max(1, trials // len(levels))
            for t in levels:
                for _ in range(per_level):
                    consider(rng.choice(P.n, size=t, replace=False).tolist())
    else:
        raise ValueError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")

    return ExpanderReport(
        alpha_observed=float(best_ratio),
        worst_subset=worst,
        subsets_tested=tested,
        exhaustive=(mode == "exhaustive"),
        gamma_n=gamma_n,
        alpha=alpha,
        certified=bool(best_ratio >= alpha),
    )


def expander_failure_bound(n1: int, n2: int, D: int) -> float:
    """Union-bound estimate of the probability a random left-``D``-regular
    bipartite graph with ``n1`` left and ``n2`` right nodes fails to be a
    ``(gamma n1, 4/5)`` expander.

    Evaluates ``x = (n1 e^6 / n2) * D * e^(-D/25)`` and returns
    ``min(1, x / (1 - x))``, saturating at 1 whenever ``x >= 1``.
    """
    if min(n1, n2, D) < 1:
        raise ValueError("n1, n2, D must all be >= 1")
    x = (n1 * math.exp(6.0) / n2) * D * math.exp(-D / 25.0)
    if x >= 1.0:
        return 1.0
    return min(1.0, x / (1.0 - x))
