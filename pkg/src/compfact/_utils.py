"""Shared RNG and validation helpers.

All randomness in the package flows through numpy's PCG64 generator seeded
via ``SeedSequence``. Independent substreams are derived deterministically
with ``spawn_key`` so that, e.g., each column of a projection matrix or each
component of a synthetic instance has its own stream; identical seeds yield
bitwise-identical draws across runs and platforms.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionError


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic PCG64 generator for substream ``key`` of ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def sample_without_replacement(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """Uniform k-subset of [0, n) via partial Fisher-Yates with sparse bookkeeping."""
    state: dict[int, int] = {}
    out = np.empty(k, dtype=np.int64)
    for i in range(k):
        j = int(rng.integers(i, n))
        out[i] = state.get(j, j)
        state[j] = state.get(i, i)
    return out


def as_matrix(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got ndim={X.ndim}")
    return X


def as_vector(y, name: str = "y") -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise DimensionError(f"{name} must be 1-dimensional, got ndim={y.ndim}")
    return y


def as_tensor3(T, name: str = "T") -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if T.ndim != 3:
        raise DimensionError(f"{name} must be 3-dimensional, got ndim={T.ndim}")
    return T
