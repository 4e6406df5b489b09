"""Sparse recovery of x from y = Px.

Two solvers are provided behind one options record: equality-constrained
l1 minimization (basis pursuit), solved exactly as a linear program in the
split form ``x = x+ - x-``, and a greedy coordinate-descent alternative in
the matching-pursuit family that exploits the binary column supports of the
projection. Greedy recovery is cheaper per call but typically needs more
measurements for the same accuracy, so the l1 route is the default
throughout the package.

Non-negativity is handled by post-hoc clamping of negative entries by
default (cheap and effective when the downstream factorization already
enforces signs); an opt-in hard-constrained mode adds ``x >= 0`` to the LP
instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from ._utils import as_matrix, as_vector
from .exceptions import DimensionError
from .projection import ProjectionMatrix

__all__ = [
    "L1_MIN",
    "GREEDY",
    "RecoveryOptions",
    "RecoveryReport",
    "l1_recover",
    "greedy_recover",
    "recover",
    "recover_columns",
]

L1_MIN = "l1"
GREEDY = "greedy"


@dataclass(frozen=True)
class RecoveryOptions:
    """Solver selection and tolerances for a recovery call.

    ``equality_tol`` is the relative residual level under which a solution
    counts as feasible; ``sparsity_hint`` is required by the greedy method.
    With ``nonneg`` set, negative entries are clamped to zero after the
    solve unless ``constrain_nonneg`` also holds, in which case ``x >= 0``
    is imposed inside the LP.
    """

    method: str = L1_MIN
    equality_tol: float = 1e-8
    max_iters: int = 5000
    nonneg: bool = False
    constrain_nonneg: bool = False
    sparsity_hint: Optional[int] = None

    def __post_init__(self):
        if self.method not in (L1_MIN, GREEDY):
            raise ValueError(f"unknown method {self.method!r}")
        if self.equality_tol <= 0:
            raise ValueError("equality_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.sparsity_hint is not None and self.sparsity_hint < 1:
            raise ValueError("sparsity_hint must be >= 1 when present")


@dataclass(frozen=True)
class RecoveryReport:
    """Outcome of one recovery call.

    ``converged`` holds iff the solver finished within its iteration budget
    and the returned vector satisfies
    ``||P x_hat - y||_2 <= equality_tol * max(1, ||y||_2)``.
    """

    x_hat: np.ndarray = field(repr=False)
    residual_norm: float
    l1_norm: float
    iterations: int
    converged: bool


def _finalize(P: ProjectionMatrix, y, x, iterations, solver_ok, opts) -> RecoveryReport:
    x = np.asarray(x, dtype=float)
    if opts.nonneg and not opts.constrain_nonneg:
        x = np.maximum(x, 0.0)
    residual = float(np.linalg.norm(P.tocsr() @ x - y))
    feas = residual <= opts.equality_tol * max(1.0, float(np.linalg.norm(y)))
    return RecoveryReport(
        x_hat=x,
        residual_norm=residual,
        l1_norm=float(np.abs(x).sum()),
        iterations=int(iterations),
        converged=bool(solver_ok and feas),
    )


def l1_recover(P: ProjectionMatrix, y, opts: RecoveryOptions = RecoveryOptions()) -> RecoveryReport:
    """Minimize ``||x||_1`` subject to ``Px = y`` (basis pursuit).

    Solved as an LP in standard form with the HiGHS backend: deterministic,
    and exact up to LP optimality tolerances. Non-convergence within the
    iteration cap is reported via ``converged=False``, never raised.
    """
    y = as_vector(y, "y")
    if y.shape[0] != P.d:
        raise DimensionError(f"y has length {y.shape[0]}, expected d={P.d}")
    if not np.any(y):
        return RecoveryReport(np.zeros(P.n), 0.0, 0.0, 0, True)

    A = P.tocsr()
    if opts.nonneg and opts.constrain_nonneg:
        res = linprog(np.ones(P.n), A_eq=A, b_eq=y, bounds=(0, None),
                      method="highs", options={"maxiter": opts.max_iters})
        x = res.x if res.x is not None else np.zeros(P.n)
    else:
        A2 = sp.hstack([A, -A], format="csc")
        res = linprog(np.ones(2 * P.n), A_eq=A2, b_eq=y, bounds=(0, None),
                      method="highs", options={"maxiter": opts.max_iters})
        if res.x is not None:
            x = res.x[: P.n] - res.x[P.n:]
        else:
            x = np.zeros(P.n)
    return _finalize(P, y, x, res.nit, res.status == 0, opts)


def greedy_recover(P: ProjectionMatrix, y, opts: RecoveryOptions) -> RecoveryReport:
    """Greedy sparse recovery by sequential coordinate updates.

    Repeatedly picks the single coordinate whose optimal shift (the median
    of the residual on its support) most reduces ``||Px - y||_1``, and
    re-thresholds the iterate to the ``sparsity_hint`` largest magnitudes
    every ``n/10`` updates. Returns the best sparse iterate seen.
    """
    y = as_vector(y, "y")
    if y.shape[0] != P.d:
        raise DimensionError(f"y has length {y.shape[0]}, expected d={P.d}")
    if opts.sparsity_hint is None:
        raise ValueError("greedy recovery requires opts.sparsity_hint")
    if not np.any(y):
        return RecoveryReport(np.zeros(P.n), 0.0, 0.0, 0, True)

    k = opts.sparsity_hint
    cols = P.cols  # (n, p) row indices per column
    Pc = P.tocsr()
    x = np.zeros(P.n)
    res = y.copy()
    resparsify_every = max(1, P.n // 10)
    gain_floor = 1e-14 * max(1.0, float(np.abs(y).sum()))

    def sparsified(v):
        w = v.copy()
        if np.count_nonzero(w) > k:
            keep = np.argsort(np.abs(w))[-k:]
            mask = np.zeros_like(w, dtype=bool)
            mask[keep] = True
            w[~mask] = 0.0
        return w

    best_x = x.copy()
    best_res = float(np.linalg.norm(res))
    it = 0
    while it < opts.max_iters:
        on_support = res[cols]  # (n, p)
        delta = np.median(on_support, axis=1)
        gains = np.abs(on_support).sum(axis=1) - np.abs(on_support - delta[:, None]).sum(axis=1)
        j = int(np.argmax(gains))
        if gains[j] <= gain_floor:
            break
        x[j] += delta[j]
        res[cols[j]] -= delta[j]
        it += 1
        if it % resparsify_every == 0:
            x = sparsified(x)
            res = y - Pc @ x
            rn = float(np.linalg.norm(res))
            if rn < best_res:
                best_res = rn
                best_x = x.copy()

    x = sparsified(x)
    if float(np.linalg.norm(y - Pc @ x)) > best_res:
        x = best_x
    return _finalize(P, y, x, it, it < opts.max_iters, opts)


def recover(P: ProjectionMatrix, y, opts: RecoveryOptions = RecoveryOptions()) -> RecoveryReport:
    """Dispatch to the solver selected by ``opts.method``."""
    if opts.method == GREEDY:
        return greedy_recover(P, y, opts)
    return l1_recover(P, y, opts)


def recover_columns(P: ProjectionMatrix, Wt, opts: RecoveryOptions = RecoveryOptions()):
    """Recover each column of a ``d x r`` matrix independently.

    Exactly one solver invocation per column; per-column non-convergence is
    carried in the reports and never aborts the remaining columns.

    Returns
    -------
    X : ndarray, shape (n, r)
    reports : list of RecoveryReport, one per column
    """
    Wt = as_matrix(Wt, "Wt")
    if Wt.shape[0] != P.d:
        raise DimensionError(f"Wt has {Wt.shape[0]} rows, expected d={P.d}")
    r = Wt.shape[1]
    X = np.zeros((P.n, r))
    reports = []
    for i in range(r):
        rep = recover(P, Wt[:, i], opts)
        X[:, i] = rep.x_hat
        reports.append(rep)
    return X, reports
