"""Factorize-Recover and Recover-Factorize pipelines.

Factorize-Recover factorizes the compressed data and then sparse-recovers
the ``r`` columns of the compressed left factor; Recover-Factorize recovers
every one of the ``m`` data columns first and factorizes in ambient space.
Both report their exact solver call counts and per-stage wall-clock (ms,
monotonic), which is the whole point of the comparison: ``r`` recovery
calls versus ``m >> r``.

Functional entry points return ``(factors, PipelineInfo)``; thin
sklearn-style estimators wrap them for composability.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from sklearn.base import BaseEstimator

from ._utils import as_matrix, as_tensor3
from .exceptions import DimensionError
from .matrix_factorization import nmf, sparse_pca
from .projection import ProjectionMatrix
from .recovery import RecoveryOptions, RecoveryReport, recover
from .tensor_factorization import TensorFactors, cp_als

__all__ = [
    "PipelineInfo",
    "factorize_recover_matrix",
    "recover_factorize_matrix",
    "factorize_recover_tensor",
    "FactorizeRecover",
    "RecoverFactorize",
    "TensorFactorizeRecover",
]


@dataclass(frozen=True)
class PipelineInfo:
    """Bookkeeping for one pipeline run: solver call count, stage timings
    (ms), and the per-column recovery reports."""

    n_recovery_calls: int
    factorize_ms: float
    recovery_ms: float
    reports: List[RecoveryReport] = field(repr=False)


def _factorize(Mt, r, method, n_iter, alpha, seed):
    if method == "nmf":
        # compressed noisy data can dip slightly negative; factor constraints
        # still apply, the data itself need not be clamped
        pair = nmf(Mt, r, n_iter=n_iter, seed=seed, allow_negative_data=True)
    elif method == "spca":
        pair = sparse_pca(Mt, r, alpha, n_iter=n_iter, seed=seed)
    else:
        raise ValueError(f"unknown factorization method {method!r}")
    return pair


def _recover_columns_counted(P, V, opts):
    """One solver invocation per column, counted explicitly."""
    X = np.zeros((P.n, V.shape[1]))
    reports = []
    calls = 0
    for i in range(V.shape[1]):
        rep = recover(P, V[:, i], opts)
        calls += 1
        X[:, i] = rep.x_hat
        reports.append(rep)
    return X, reports, calls


def factorize_recover_matrix(
    P: ProjectionMatrix,
    Mt,
    r: int,
    method: str = "nmf",
    recovery: RecoveryOptions = RecoveryOptions(),
    n_iter: int = 250,
    alpha: float = 0.0,
    seed: int = 0,
):
    """Factorize ``Mt = P M`` and recover the left factor column-wise.

    Returns ``(W_hat, H_hat, info, compressed_pair)``: ``H_hat`` is the
    compressed-domain right factor taken as is, ``W_hat`` stacks the ``r``
    recovered columns, and ``compressed_pair`` is the raw compressed-domain
    factorization. Exactly ``r`` recovery invocations are made; per-column
    non-convergence is carried in ``info.reports``.
    """
    Mt = as_matrix(Mt, "Mt")
    if Mt.shape[0] != P.d:
        raise DimensionError(f"Mt has {Mt.shape[0]} rows, expected d={P.d}")
    t0 = time.perf_counter()
    pair = _factorize(Mt, r, method, n_iter, alpha, seed)
    t1 = time.perf_counter()
    W_hat, reports, calls = _recover_columns_counted(P, pair.W, recovery)
    t2 = time.perf_counter()
    info = PipelineInfo(
        n_recovery_calls=calls,
        factorize_ms=(t1 - t0) * 1e3,
        recovery_ms=(t2 - t1) * 1e3,
        reports=reports,
    )
    return W_hat, pair.H, info, pair


def recover_factorize_matrix(
    P: ProjectionMatrix,
    Mt,
    r: int,
    method: str = "nmf",
    recovery: RecoveryOptions = RecoveryOptions(),
    n_iter: int = 250,
    alpha: float = 0.0,
    seed: int = 0,
):
    """Recover all ``m`` data columns first, then factorize in ambient space.

    The baseline pipeline: ``m`` recovery invocations followed by one
    ambient factorization of the recovered matrix. Returns
    ``(W, H, info, pair)`` like :func:`factorize_recover_matrix`.
    """
    Mt = as_matrix(Mt, "Mt")
    if Mt.shape[0] != P.d:
        raise DimensionError(f"Mt has {Mt.shape[0]} rows, expected d={P.d}")
    t0 = time.perf_counter()
    M_hat, reports, calls = _recover_columns_counted(P, Mt, recovery)
    t1 = time.perf_counter()
    pair = _factorize(M_hat, r, method, n_iter, alpha, seed)
    t2 = time.perf_counter()
    info = PipelineInfo(
        n_recovery_calls=calls,
        factorize_ms=(t2 - t1) * 1e3,
        recovery_ms=(t1 - t0) * 1e3,
        reports=reports,
    )
    return pair.W, pair.H, info, pair


def factorize_recover_tensor(
    P: ProjectionMatrix,
    Tt,
    r: int,
    recovery: RecoveryOptions = RecoveryOptions(),
    n_iter: int = 200,
    nonneg: bool = False,
    seed: int = 0,
):
    """Decompose the compressed tensor, keep B and C, recover the first-mode
    factor column-wise (exactly ``r`` recovery invocations).

    Returns ``(factors, info, compressed)``: ``factors.A`` is the recovered
    ambient factor while ``factors.B``, ``factors.C`` and
    ``factors.weights`` come from the compressed-domain decomposition
    (``compressed``) unchanged.
    """
    Tt = as_tensor3(Tt, "Tt")
    if Tt.shape[0] != P.d:
        raise DimensionError(f"Tt first mode is {Tt.shape[0]}, expected d={P.d}")
    t0 = time.perf_counter()
    fac = cp_als(Tt, r, n_iter=n_iter, seed=seed, nonneg=nonneg)
    t1 = time.perf_counter()
    A_hat, reports, calls = _recover_columns_counted(P, fac.A, recovery)
    t2 = time.perf_counter()
    info = PipelineInfo(
        n_recovery_calls=calls,
        factorize_ms=(t1 - t0) * 1e3,
        recovery_ms=(t2 - t1) * 1e3,
        reports=reports,
    )
    out = TensorFactors(A=A_hat, B=fac.B, C=fac.C, weights=fac.weights,
                        error_trace=fac.error_trace, n_warmup=fac.n_warmup)
    return out, info, fac


class _PipelineMixin:
    def _recovery_options(self) -> RecoveryOptions:
        return self.recovery if self.recovery is not None else RecoveryOptions()


class FactorizeRecover(BaseEstimator, _PipelineMixin):
    """Estimator for the compressed pipeline: fit on ``Mt = P M``.

    Attributes (after fit): ``W_``, ``H_``, ``compressed_W_``,
    ``compressed_H_``, ``recovery_reports_``, ``n_recovery_calls_``,
    ``factorize_ms_``, ``recovery_ms_``.
    """

    def __init__(self, projection=None, rank: int = 2, method: str = "nmf",
                 n_iter: int = 250, alpha: float = 0.0,
                 recovery: Optional[RecoveryOptions] = None, random_state: int = 0):
        self.projection = projection
        self.rank = rank
        self.method = method
        self.n_iter = n_iter
        self.alpha = alpha
        self.recovery = recovery
        self.random_state = random_state

    def fit(self, X, y=None):
        W, H, info, pair = factorize_recover_matrix(
            self.projection, X, self.rank, method=self.method,
            recovery=self._recovery_options(), n_iter=self.n_iter,
            alpha=self.alpha, seed=self.random_state)
        self.W_, self.H_ = W, H
        self.compressed_W_, self.compressed_H_ = pair.W, pair.H
        self.recovery_reports_ = info.reports
        self.n_recovery_calls_ = info.n_recovery_calls
        self.factorize_ms_ = info.factorize_ms
        self.recovery_ms_ = info.recovery_ms
        return self


class RecoverFactorize(BaseEstimator, _PipelineMixin):
    """Estimator for the baseline pipeline: recover every column, then
    factorize (same attributes as :class:`FactorizeRecover`, with the
    recovered ambient matrix in ``recovered_M_``)."""

    def __init__(self, projection=None, rank: int = 2, method: str = "nmf",
                 n_iter: int = 250, alpha: float = 0.0,
                 recovery: Optional[RecoveryOptions] = None, random_state: int = 0):
        self.projection = projection
        self.rank = rank
        self.method = method
        self.n_iter = n_iter
        self.alpha = alpha
        self.recovery = recovery
        self.random_state = random_state

    def fit(self, X, y=None):
        W, H, info, _ = recover_factorize_matrix(
            self.projection, X, self.rank, method=self.method,
            recovery=self._recovery_options(), n_iter=self.n_iter,
            alpha=self.alpha, seed=self.random_state)
        self.W_, self.H_ = W, H
        self.recovery_reports_ = info.reports
        self.n_recovery_calls_ = info.n_recovery_calls
        self.factorize_ms_ = info.factorize_ms
        self.recovery_ms_ = info.recovery_ms
        return self


class TensorFactorizeRecover(BaseEstimator, _PipelineMixin):
    """Estimator for the compressed tensor pipeline: fit on ``Tt``.

    Attributes (after fit): ``A_``, ``B_``, ``C_``, ``weights_``,
    ``compressed_A_``, ``recovery_reports_``, ``n_recovery_calls_``,
    ``factorize_ms_``, ``recovery_ms_``.
    """

    def __init__(self, projection=None, rank: int = 2, n_iter: int = 200,
                 nonneg: bool = False, recovery: Optional[RecoveryOptions] = None,
                 random_state: int = 0):
        self.projection = projection
        self.rank = rank
        self.n_iter = n_iter
        self.nonneg = nonneg
        self.recovery = recovery
        self.random_state = random_state

    def fit(self, X, y=None):
        fac, info, compressed = factorize_recover_tensor(
            self.projection, X, self.rank, recovery=self._recovery_options(),
            n_iter=self.n_iter, nonneg=self.nonneg, seed=self.random_state)
        self.A_, self.B_, self.C_ = fac.A, fac.B, fac.C
        self.weights_ = fac.weights
        self.compressed_A_ = compressed.A
        self.recovery_reports_ = info.reports
        self.n_recovery_calls_ = info.n_recovery_calls
        self.factorize_ms_ = info.factorize_ms
        self.recovery_ms_ = info.recovery_ms
        return self
