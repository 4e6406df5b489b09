"""Empirical certification of structural uniqueness properties.

These oracles check, on a concrete compressed factor ``Wt = P W``, the
ingredients that make the projected factorization the sparsest one: (i) no
fully dense combination of two or more columns is as sparse as a single
column, (ii) column subsets have large neighborhoods (unions of nonzero
rows), and (iii) the compressed data and compressed factor span the same
column space. Bounds are reported with margins rather than hard-failing,
because the constants they come from are far from tight at desk scale.

A note on the excess bound: two conventions are possible for how many
neighborhood rows a combination can zero out, ``|S|`` or ``|S| p``; the
``|S| p`` form is used consistently here, since each ambient coordinate
appears in up to ``p`` projected rows and can cancel in all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from ._utils import as_matrix, rng_stream
from .metrics import nnz_eps

__all__ = [
    "UniquenessReport",
    "ExpansionBoundReport",
    "sparsest_column_check",
    "expansion_bound_check",
    "colspace_equality_check",
    "benchmark_projection_dim",
]

_DENSE_FLOOR = 0.1  # combination weights are floored here to stay fully dense


def benchmark_projection_dim(n: int, r: int, k: int) -> int:
    """Desk-scale projection dimension ``ceil(2 (r + k) log2 n)``.

    The analysis wants ``d`` proportional to ``(r + k) log n`` with a large
    constant; benchmarks use this scaled-down instantiation.
    """
    return int(math.ceil(2 * (r + k) * math.log2(max(n, 2))))


@dataclass(frozen=True)
class UniquenessReport:
    """Outcome of the sampled sparsest-column check.

    A violation is a sampled fully dense combination of >= 2 columns whose
    eps-thresholded nonzero count is no larger than the largest
    single-column count; zero violations support the claim that single
    columns are strictly sparsest.
    """

    instances: int
    min_combo_nnz: int
    max_column_nnz: int
    violations: int
    bound_6kp5: Optional[float] = None
    colspace_equal: Optional[bool] = None


def _column_nnz(Wt: np.ndarray, eps_rel: float) -> np.ndarray:
    return np.array([nnz_eps(Wt[:, j], eps_rel) for j in range(Wt.shape[1])])


def sparsest_column_check(
    Wt,
    trials: int = 10_000,
    seed: int = 0,
    eps_rel: float = 1e-8,
) -> UniquenessReport:
    """Sample dense multi-column combinations and count sparsity violations.

    Each trial draws a uniform column subset of size >= 2 and a fully dense
    coefficient vector (standard normal, magnitudes floored at 0.1 so no
    weight is effectively zero), then counts the eps-thresholded nonzeros of
    the combination. Columns are normalized to unit l2 before combining
    (same span, and combination counts cannot be distorted by extreme
    per-column scales), so the whole report is invariant to positive column
    rescaling.
    """
    Wt = as_matrix(Wt, "Wt")
    r = Wt.shape[1]
    if r < 2:
        raise ValueError("need at least two columns to form multi-column combinations")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if eps_rel <= 0:
        raise ValueError("eps_rel must be positive")

    rng = rng_stream(seed, 0)
    col_nnz = _column_nnz(Wt, eps_rel)
    max_col = int(col_nnz.max())
    norms = np.linalg.norm(Wt, axis=0)
    Wt = Wt / np.where(norms > 0, norms, 1.0)

    sizes = rng.integers(2, r + 1, size=trials)
    coeffs = np.zeros((r, trials))
    for t in range(trials):
        idx = rng.permutation(r)[: sizes[t]]
        c = rng.standard_normal(sizes[t])
        sign = np.where(c < 0, -1.0, 1.0)
        coeffs[idx, t] = sign * np.maximum(np.abs(c), _DENSE_FLOOR)

    combos = Wt @ coeffs
    scale = np.abs(combos).max(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    counts = (np.abs(combos) > eps_rel * scale).sum(axis=0)

    return UniquenessReport(
        instances=trials,
        min_combo_nnz=int(counts.min()),
        max_column_nnz=max_col,
        violations=int(np.count_nonzero(counts <= max_col)),
    )


@dataclass(frozen=True)
class ExpansionBoundReport:
    """Neighborhood-expansion margins over column subsets.

    ``worst_margin`` is the minimum of ``|N(S)| - min(16 |S| k p / 25,
    d/200)`` over the subsets examined, and ``min_excess`` the minimum of
    ``|N(S)| - |S| p`` over subsets of size >= 2, to be compared with
    ``bound_6kp5 = 6 k p / 5``. Report-only: negative margins are data, not
    errors.
    """

    subsets_tested: int
    exhaustive: bool
    worst_margin: float
    worst_subset: tuple
    min_excess: Optional[float]
    min_excess_subset: tuple
    bound_6kp5: float
    bound_satisfied: bool
    excess_satisfied: Optional[bool]


def expansion_bound_check(
    B_or_Wt,
    k: int,
    p: int,
    d: int,
    exhaustive_limit: int = 1_000_000,
    trials: int = 10_000,
    seed: int = 0,
    eps_rel: float = 1e-8,
) -> ExpansionBoundReport:
    """Measure ``|N(S)|`` against the generative-model expansion bounds.

    ``B_or_Wt`` provides the support pattern: a binary matrix is used as
    is, and a real matrix is thresholded per column at ``eps_rel`` times its
    max magnitude. All nonempty column subsets are enumerated when their
    count is within ``exhaustive_limit``, otherwise ``trials`` subsets are
    sampled uniformly per size level.
    """
    A = as_matrix(B_or_Wt, "B_or_Wt")
    r = A.shape[1]
    scale = np.abs(A).max(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    support = np.abs(A) > eps_rel * scale

    masks = []
    for j in range(r):
        mask = 0
        for i in np.flatnonzero(support[:, j]):
            mask |= 1 << int(i)
        masks.append(mask)

    bound_cap = d / 200.0
    six_kp5 = 6.0 * k * p / 5.0

    worst_margin = math.inf
    worst_subset: tuple = ()
    min_excess = math.inf
    min_excess_subset: tuple = ()
    tested = 0

    def consider(subset):
        nonlocal worst_margin, worst_subset, min_excess, min_excess_subset, tested
        union = 0
        for j in subset:
            union |= masks[j]
        nS = union.bit_count()
        t = len(subset)
        margin = nS - min(16.0 * t * k * p / 25.0, bound_cap)
        tested += 1
        if margin < worst_margin:
            worst_margin = margin
            worst_subset = tuple(subset)
        if t >= 2:
            excess = nS - t * p
            if excess < min_excess:
                min_excess = excess
                min_excess_subset = tuple(subset)

    total = 2 ** r - 1
    if total <= exhaustive_limit:
        exhaustive = True
        for t in range(1, r + 1):
            for subset in combinations(range(r), t):
                consider(subset)
    else:
        exhaustive = False
        rng = rng_stream(seed, 1)
        per_level = max(1, trials // r)
        for t in range(1, r + 1):
            for _ in range(per_level):
                consider(rng.permutation(r)[:t].tolist())

    has_excess = math.isfinite(min_excess)
    return ExpansionBoundReport(
        subsets_tested=tested,
        exhaustive=exhaustive,
        worst_margin=float(worst_margin),
        worst_subset=worst_subset,
        min_excess=float(min_excess) if has_excess else None,
        min_excess_subset=min_excess_subset,
        bound_6kp5=six_kp5,
        bound_satisfied=bool(worst_margin >= 0),
        excess_satisfied=bool(min_excess >= six_kp5) if has_excess else None,
    )


def colspace_equality_check(Mt, Wt, tol: float = 1e-10) -> bool:
    """True iff ``Mt``, ``Wt`` and ``[Wt | Mt]`` share the same numerical rank.

    Rank is counted as the number of singular values at least ``tol`` times
    the largest singular value of the respective matrix.
    """
    Mt = as_matrix(Mt, "Mt")
    Wt = as_matrix(Wt, "Wt")

    def rank(X):
        s = np.linalg.svd(X, compute_uv=False)
        if s.size == 0 or s[0] == 0:
            return 0
        return int(np.count_nonzero(s >= tol * s[0]))

    r_m = rank(Mt)
    r_w = rank(Wt)
    r_joint = rank(np.hstack([Wt, Mt]))
    return r_m == r_w == r_joint
