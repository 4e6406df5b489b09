"""File formats: CSV matrices/vectors, tensors, and JSON reports.

Matrices are plain CSV (one row per line, '.' decimal, no header). Shapes
with a single row or column are ambiguous in that format, so a sidecar
``<name>.json`` with the dimensions is written alongside and honored on
load. Tensors use a one-line ``n m1 m2`` header followed by the mode-1
unfolding as CSV. Synthetic instances serialize to a directory holding
``M.csv``, ``W.csv``, ``H.csv`` and ``meta.json``.
"""

from __future__ import annotations

import dataclasses
import json
import os
from pathlib import Path

import numpy as np

from .matrix_factorization import FactorPair
from .synthetic import SynthInstance, gen_matrix_instance

__all__ = [
    "save_matrix_csv",
    "load_matrix_csv",
    "save_vector_csv",
    "load_vector_csv",
    "save_tensor",
    "load_tensor",
    "save_factor_report",
    "save_instance_dir",
    "load_instance_dir",
    "json_ready",
]


def _sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def save_matrix_csv(path, X) -> None:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    np.savetxt(path, X, delimiter=",", fmt="%.17g")
    if 1 in X.shape:
        _sidecar_path(path).write_text(
            json.dumps({"rows": X.shape[0], "cols": X.shape[1]}), encoding="utf-8")


def load_matrix_csv(path) -> np.ndarray:
    X = np.loadtxt(path, delimiter=",", ndmin=2)
    sidecar = _sidecar_path(path)
    if sidecar.exists():
        dims = json.loads(sidecar.read_text(encoding="utf-8"))
        X = X.reshape(dims["rows"], dims["cols"])
    return X


def save_vector_csv(path, y) -> None:
    save_matrix_csv(path, np.asarray(y, dtype=float).reshape(-1, 1))


def load_vector_csv(path) -> np.ndarray:
    return load_matrix_csv(path).ravel()


def save_tensor(path, T) -> None:
    T = np.asarray(T, dtype=float)
    if T.ndim != 3:
        raise ValueError("tensor files hold order-3 tensors")
    n, m1, m2 = T.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n} {m1} {m2}\n")
        np.savetxt(fh, T.reshape(n, m1 * m2), delimiter=",", fmt="%.17g")


def load_tensor(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: expected header 'n m1 m2', got {header!r}")
        n, m1, m2 = (int(v) for v in header)
        flat = np.loadtxt(fh, delimiter=",", ndmin=2)
    if flat.shape != (n, m1 * m2):
        raise ValueError(f"{path}: body shape {flat.shape} does not match header")
    return flat.reshape(n, m1, m2)


def json_ready(obj):
    """Recursively convert dataclasses/numpy values into JSON-serializable ones."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: json_ready(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    return obj


def save_factor_report(path, pair: FactorPair) -> None:
    report = {
        "method": pair.method,
        "r": pair.r,
        "iters": pair.n_iter,
        "objective_trace": pair.objective_trace.tolist(),
        "seed": pair.seed,
    }
    Path(path).write_text(json.dumps(report), encoding="utf-8")


def save_instance_dir(directory, inst: SynthInstance) -> None:
    directory = Path(directory)
    os.makedirs(directory, exist_ok=True)
    save_matrix_csv(directory / "M.csv", inst.M)
    save_matrix_csv(directory / "W.csv", inst.W)
    save_matrix_csv(directory / "H.csv", inst.H)
    meta = {"n": inst.n, "m": inst.m, "r": inst.r, "k": inst.k,
            "noise_ratio": inst.noise_ratio, "nonneg": inst.nonneg, "seed": inst.seed}
    (directory / "meta.json").write_text(json.dumps(meta), encoding="utf-8")


def load_instance_dir(directory) -> SynthInstance:
    """Regenerate the instance from its metadata (generation is deterministic)
    and verify the stored matrices agree with it."""
    directory = Path(directory)
    meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
    inst = gen_matrix_instance(meta["n"], meta["m"], meta["r"], meta["k"],
                               noise_ratio=meta["noise_ratio"],
                               nonneg=meta["nonneg"], seed=meta["seed"])
    M = load_matrix_csv(directory / "M.csv")
    if not np.allclose(M, inst.M, atol=1e-12):
        raise ValueError(f"{directory}: stored M.csv does not match its metadata")
    return inst
