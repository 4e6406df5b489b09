"""Command-line driver for the compressed-factorization pipelines.

Subcommands expose each pipeline stage (``recover``, ``factorize``,
``expander-check``, ``pipeline``, ``uniqueness``) plus the synthetic
benchmark sweeps (``synth-bench``, ``tensor-bench``) that emit CSV for
plotting. Flags are long-form; a JSON config file can supply any of them,
with explicit flags taking precedence. Exit code is 0 iff every requested
run completed (per-column non-convergence is data, not failure).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import matio
from .metrics import align_columns, match_factors, rel_err
from .pipelines import (
    factorize_recover_matrix,
    factorize_recover_tensor,
    recover_factorize_matrix,
)
from .matrix_factorization import nmf, sparse_pca
from .projection import ProjectionMatrix, certify_expander, gen_projection, project_matrix, project_tensor_mode1
from .recovery import GREEDY, L1_MIN, RecoveryOptions, recover, recover_columns
from .synthetic import gen_matrix_instance, gen_tensor_instance
from .tensor_factorization import check_full_column_rank
from .uniqueness import (
    benchmark_projection_dim,
    colspace_equality_check,
    expansion_bound_check,
    sparsest_column_check,
)

__all__ = ["main", "run_synth_bench", "run_tensor_bench", "bench_cell", "tensor_bench_cell"]


def _load(path, loader, kind):
    try:
        return loader(path)
    except Exception as exc:  # surface the offending file path with the parser error
        raise SystemExit(f"error: could not parse {kind} file {path}: {exc}") from exc


def _int_list(text) -> list:
    if isinstance(text, list):
        return [int(v) for v in text]
    return [int(tok) for tok in str(text).split(",") if tok]


def _write_json(payload, path=None):
    text = json.dumps(matio.json_ready(payload), indent=2)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


# ---------------------------------------------------------------------------
# synthetic matrix benchmark


def bench_cell(task, n, m, r, k, d, p, noise, seed, n_iter, alpha=0.0):
    """One sweep cell: plant, compress, run the pipeline and its oracle.

    Returns a row dict with the compressed-factor error, the recovered
    factor error, the oracle error (recovery applied to the true projected
    factor), and the cell wall-clock. Factor errors are computed after
    matching and per-column least-squares rescaling.
    """
    nonneg = task == "nmf"
    t0 = time.perf_counter()
    inst = gen_matrix_instance(n, m, r, k, noise_ratio=noise, nonneg=nonneg, seed=seed)
    P = gen_projection(n, d, p, seed=seed + 50_000)
    Mt = project_matrix(P, inst.M)
    opts = RecoveryOptions(nonneg=nonneg)
    W_hat, _, info, pair = factorize_recover_matrix(
        P, Mt, r, method=task, recovery=opts, n_iter=n_iter, alpha=alpha, seed=seed)
    PW = project_matrix(P, inst.W)
    err_wt_pw = rel_err(align_columns(pair.W, PW), PW)
    err_what_w = rel_err(align_columns(W_hat, inst.W), inst.W)
    W_oracle, _ = recover_columns(P, PW, opts)
    err_oracle = rel_err(align_columns(W_oracle, inst.W), inst.W)
    wallclock_ms = (time.perf_counter() - t0) * 1e3
    return {
        "task": task, "k": k, "d": d, "seed": seed,
        "err_Wt_PW": err_wt_pw, "err_What_W": err_what_w,
        "err_oracle": err_oracle, "wallclock_ms": wallclock_ms,
    }


def _cell_star(args):
    return bench_cell(*args)


def run_synth_bench(task, n, m, r, k_list, d_list, p, noise, seeds, n_iter,
                    out_dir, alpha=0.0, jobs=1):
    """Run the (k, d, seed) sweep and write ``results.csv`` under ``out_dir``.

    Cells are independent and may run in a worker pool; rows are written in
    deterministic (k, d, seed) order either way.
    """
    cells = [(task, n, m, r, k, d, p, noise, seed, n_iter, alpha)
             for k in k_list for d in d_list for seed in range(seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_cell_star, cells))
    else:
        rows = [bench_cell(*c) for c in cells]
    rows.sort(key=lambda row: (row["k"], row["d"], row["seed"]))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "results.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("task,k,d,seed,err_Wt_PW,err_What_W,err_oracle,wallclock_ms\n")
        for row in rows:
            fh.write("{task},{k},{d},{seed},{err_Wt_PW:.6f},{err_What_W:.6f},"
                     "{err_oracle:.6f},{wallclock_ms:.1f}\n".format(**row))
    return rows, path


# ---------------------------------------------------------------------------
# tensor benchmark


def tensor_bench_cell(n, m1, m2, r, k, d, p, seed, n_iter):
    """One tensor cell: plant, compress, decompose-and-recover, score."""
    t0 = time.perf_counter()
    inst = gen_tensor_instance(n, m1, m2, r, k, seed=seed)
    P = gen_projection(n, d, p, seed=seed + 70_000)
    Tt = project_tensor_mode1(P, inst.T)
    fac, info, _ = factorize_recover_tensor(P, Tt, r, n_iter=n_iter, seed=seed)
    corr = {}
    for name, F_hat, F_true in (("A", fac.A, inst.A), ("B", fac.B, inst.B), ("C", fac.C, inst.C)):
        corr[name] = float(np.min(np.abs(match_factors(F_hat, F_true).correlations)))
    full_rank = check_full_column_rank(project_matrix(P, inst.A))
    wallclock_ms = (time.perf_counter() - t0) * 1e3
    return {
        "task": "tensor", "k": k, "d": d, "seed": seed,
        "corr_A": corr["A"], "corr_B": corr["B"], "corr_C": corr["C"],
        "pa_full_rank": int(full_rank), "n_recovery_calls": info.n_recovery_calls,
        "wallclock_ms": wallclock_ms,
    }


def _tensor_cell_star(args):
    return tensor_bench_cell(*args)


def run_tensor_bench(n, m1, m2, r, k_list, d_list, p, seeds, n_iter, out_dir, jobs=1):
    cells = [(n, m1, m2, r, k, d, p, seed, n_iter)
             for k in k_list for d in d_list for seed in range(seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_tensor_cell_star, cells))
    else:
        rows = [tensor_bench_cell(*c) for c in cells]
    rows.sort(key=lambda row: (row["k"], row["d"], row["seed"]))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "results.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("task,k,d,seed,corr_A,corr_B,corr_C,pa_full_rank,n_recovery_calls,wallclock_ms\n")
        for row in rows:
            fh.write("{task},{k},{d},{seed},{corr_A:.6f},{corr_B:.6f},{corr_C:.6f},"
                     "{pa_full_rank},{n_recovery_calls},{wallclock_ms:.1f}\n".format(**row))
    return rows, path


# ---------------------------------------------------------------------------
# subcommand handlers


def _recovery_options_from(ns) -> RecoveryOptions:
    return RecoveryOptions(
        method=GREEDY if getattr(ns, "method", "l1") == "greedy" else L1_MIN,
        equality_tol=ns.equality_tol,
        max_iters=ns.max_iters,
        nonneg=ns.nonneg,
        sparsity_hint=getattr(ns, "sparsity", None),
    )


def _cmd_recover(ns) -> int:
    P = _load(ns.projection, ProjectionMatrix.load, "projection")
    y = _load(ns.y, matio.load_vector_csv, "vector")
    rep = recover(P, y, _recovery_options_from(ns))
    matio.save_vector_csv(ns.out, rep.x_hat)
    payload = {"residual_norm": rep.residual_norm, "l1_norm": rep.l1_norm,
               "iterations": rep.iterations, "converged": rep.converged}
    _write_json(payload, ns.report)
    return 0


def _cmd_expander_check(ns) -> int:
    P = _load(ns.projection, ProjectionMatrix.load, "projection")
    gamma_n = ns.gamma_n
    if gamma_n is None:
        gamma_n = max(1, math.floor(P.d / (P.p * math.e ** 5)))
    report = certify_expander(P, gamma_n, alpha=ns.alpha, mode=ns.mode,
                              trials=ns.trials, sample_seed=ns.sample_seed)
    _write_json(report, ns.out)
    return 0


def _cmd_factorize(ns) -> int:
    M = _load(ns.matrix, matio.load_matrix_csv, "matrix")
    if ns.method == "nmf":
        pair = nmf(M, ns.r, n_iter=ns.iters, seed=ns.seed)
    else:
        pair = sparse_pca(M, ns.r, ns.alpha, n_iter=ns.iters, seed=ns.seed)
    matio.save_matrix_csv(ns.out_w, pair.W)
    matio.save_matrix_csv(ns.out_h, pair.H)
    if ns.report:
        matio.save_factor_report(ns.report, pair)
    return 0


def _cmd_pipeline(ns) -> int:
    P = _load(ns.projection, ProjectionMatrix.load, "projection")
    opts = RecoveryOptions(nonneg=ns.nonneg)
    if ns.tensor:
        if ns.mode != "fr":
            raise SystemExit("error: tensor pipeline supports --mode fr only")
        Tt = _load(ns.tensor, matio.load_tensor, "tensor")
        fac, info, _ = factorize_recover_tensor(P, Tt, ns.r, recovery=opts,
                                                n_iter=ns.iters, nonneg=ns.nonneg,
                                                seed=ns.seed)
        matio.save_matrix_csv(ns.out_w, fac.A)
        matio.save_matrix_csv(Path(ns.out_w).with_suffix(".B.csv"), fac.B)
        matio.save_matrix_csv(Path(ns.out_w).with_suffix(".C.csv"), fac.C)
        matio.save_vector_csv(Path(ns.out_w).with_suffix(".weights.csv"), fac.weights)
    else:
        Mt = _load(ns.matrix, matio.load_matrix_csv, "matrix")
        runner = factorize_recover_matrix if ns.mode == "fr" else recover_factorize_matrix
        W, H, info, _ = runner(P, Mt, ns.r, method=ns.method, recovery=opts,
                               n_iter=ns.iters, alpha=ns.alpha, seed=ns.seed)
        matio.save_matrix_csv(ns.out_w, W)
        matio.save_matrix_csv(ns.out_h, H)
    payload = {
        "mode": ns.mode,
        "n_recovery_calls": info.n_recovery_calls,
        "factorize_ms": info.factorize_ms,
        "recovery_ms": info.recovery_ms,
        "columns_converged": [rep.converged for rep in info.reports],
    }
    _write_json(payload, ns.timing)
    return 0


def _cmd_uniqueness(ns) -> int:
    inst = matio.load_instance_dir(ns.instance_dir)
    if ns.projection:
        P = _load(ns.projection, ProjectionMatrix.load, "projection")
    else:
        d = ns.d if ns.d is not None else benchmark_projection_dim(inst.n, inst.r, inst.k)
        P = gen_projection(inst.n, d, ns.p, seed=ns.proj_seed)
    Wt = project_matrix(P, inst.W)
    Mt = project_matrix(P, inst.M)
    unique = sparsest_column_check(Wt, trials=ns.trials, seed=ns.seed)
    expansion = expansion_bound_check(Wt, inst.k, P.p, P.d)
    payload = {
        "instances": unique.instances,
        "min_combo_nnz": unique.min_combo_nnz,
        "max_column_nnz": unique.max_column_nnz,
        "violations": unique.violations,
        "bound_6kp5": expansion.bound_6kp5,
        "colspace_equal": colspace_equality_check(Mt, Wt),
        "expansion": expansion,
    }
    _write_json(payload, ns.out)
    return 0


def _cmd_synth_bench(ns) -> int:
    if not ns.out:
        raise SystemExit("error: --out is required (flag or config)")
    rows, path = run_synth_bench(ns.task, ns.n, ns.m, ns.r, _int_list(ns.k),
                                 _int_list(ns.d), ns.p, ns.noise, ns.seeds,
                                 ns.iters, ns.out, alpha=ns.alpha, jobs=ns.jobs)
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def _cmd_tensor_bench(ns) -> int:
    if not ns.out:
        raise SystemExit("error: --out is required (flag or config)")
    rows, path = run_tensor_bench(ns.n, ns.m1, ns.m2, ns.r, _int_list(ns.k),
                                  _int_list(ns.d), ns.p, ns.seeds, ns.iters,
                                  ns.out, jobs=ns.jobs)
    print(f"wrote {len(rows)} rows to {path}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _apply_config(parser: argparse.ArgumentParser, argv):
    """Parse argv, then merge in --config values for flags not given explicitly."""
    ns = parser.parse_args(argv)
    config = getattr(ns, "config", None)
    if config:
        with open(config, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        for key, val in loaded.items():
            dest = key.replace("-", "_")
            flag = "--" + key.replace("_", "-")
            if flag not in argv and hasattr(ns, dest):
                setattr(ns, dest, val)
    return ns


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="compfact",
                                     description="compressed factorization pipelines")
    sub = parser.add_subparsers(dest="command", required=True)

    sb = sub.add_parser("synth-bench", help="planted matrix sweep, CSV output")
    sb.add_argument("--config", default=None)
    sb.add_argument("--task", choices=["nmf", "spca"], default="nmf")
    sb.add_argument("--n", type=int, default=500)
    sb.add_argument("--m", type=int, default=500)
    sb.add_argument("--r", type=int, default=10)
    sb.add_argument("--k", default="10,25,50", help="comma list of column sparsities")
    sb.add_argument("--d", default="50,100,200", help="comma list of projection dims")
    sb.add_argument("--p", type=int, default=5)
    sb.add_argument("--noise", type=float, default=0.1)
    sb.add_argument("--seeds", type=int, default=3)
    sb.add_argument("--iters", type=int, default=250)
    sb.add_argument("--alpha", type=float, default=0.0, help="spca l1 weight")
    sb.add_argument("--jobs", type=int, default=1)
    sb.add_argument("--out", default=None, help="output directory (flag or config)")
    sb.set_defaults(func=_cmd_synth_bench)

    tb = sub.add_parser("tensor-bench", help="planted tensor sweep, CSV output")
    tb.add_argument("--config", default=None)
    tb.add_argument("--n", type=int, default=500)
    tb.add_argument("--m1", type=int, default=30)
    tb.add_argument("--m2", type=int, default=30)
    tb.add_argument("--r", type=int, default=4)
    tb.add_argument("--k", default="10")
    tb.add_argument("--d", default="200")
    tb.add_argument("--p", type=int, default=5)
    tb.add_argument("--seeds", type=int, default=10)
    tb.add_argument("--iters", type=int, default=150)
    tb.add_argument("--jobs", type=int, default=1)
    tb.add_argument("--out", default=None, help="output directory (flag or config)")
    tb.set_defaults(func=_cmd_tensor_bench)

    rc = sub.add_parser("recover", help="sparse recovery of one vector")
    rc.add_argument("--config", default=None)
    rc.add_argument("--projection", required=True)
    rc.add_argument("--y", required=True)
    rc.add_argument("--out", required=True)
    rc.add_argument("--method", choices=["l1", "greedy"], default="l1")
    rc.add_argument("--sparsity", type=int, default=None)
    rc.add_argument("--nonneg", action="store_true")
    rc.add_argument("--equality-tol", type=float, default=1e-8)
    rc.add_argument("--max-iters", type=int, default=5000)
    rc.add_argument("--report", default=None)
    rc.set_defaults(func=_cmd_recover)

    ec = sub.add_parser("expander-check", help="certify expansion of a projection")
    ec.add_argument("--config", default=None)
    ec.add_argument("--projection", required=True)
    ec.add_argument("--gamma-n", type=int, default=None,
                    help="max subset size (default floor(d/(p e^5)), at least 1)")
    ec.add_argument("--alpha", type=float, default=0.8)
    ec.add_argument("--mode", choices=["exhaustive", "sampled"], default="sampled")
    ec.add_argument("--trials", type=int, default=10_000)
    ec.add_argument("--sample-seed", type=int, default=0)
    ec.add_argument("--out", default=None)
    ec.set_defaults(func=_cmd_expander_check)

    fz = sub.add_parser("factorize", help="factorize a CSV matrix")
    fz.add_argument("--config", default=None)
    fz.add_argument("--matrix", required=True)
    fz.add_argument("--method", choices=["nmf", "spca"], default="nmf")
    fz.add_argument("--r", type=int, required=True)
    fz.add_argument("--iters", type=int, default=250)
    fz.add_argument("--alpha", type=float, default=0.0)
    fz.add_argument("--seed", type=int, default=0)
    fz.add_argument("--out-w", required=True)
    fz.add_argument("--out-h", required=True)
    fz.add_argument("--report", default=None)
    fz.set_defaults(func=_cmd_factorize)

    pl = sub.add_parser("pipeline", help="factorize-recover or recover-factorize")
    pl.add_argument("--config", default=None)
    pl.add_argument("--mode", choices=["fr", "rf"], required=True)
    pl.add_argument("--projection", required=True)
    pl.add_argument("--matrix", default=None)
    pl.add_argument("--tensor", default=None)
    pl.add_argument("--r", type=int, required=True)
    pl.add_argument("--method", choices=["nmf", "spca"], default="nmf")
    pl.add_argument("--iters", type=int, default=250)
    pl.add_argument("--alpha", type=float, default=0.0)
    pl.add_argument("--nonneg", action="store_true")
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--out-w", required=True)
    pl.add_argument("--out-h", default="H.csv")
    pl.add_argument("--timing", default=None)
    pl.set_defaults(func=_cmd_pipeline)

    un = sub.add_parser("uniqueness", help="uniqueness oracle on an instance directory")
    un.add_argument("--config", default=None)
    un.add_argument("--instance-dir", required=True)
    un.add_argument("--projection", default=None)
    un.add_argument("--d", type=int, default=None)
    un.add_argument("--p", type=int, default=5)
    un.add_argument("--proj-seed", type=int, default=0)
    un.add_argument("--trials", type=int, default=10_000)
    un.add_argument("--seed", type=int, default=0)
    un.add_argument("--out", default=None)
    un.set_defaults(func=_cmd_uniqueness)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    ns = _apply_config(parser, argv)
    return ns.func(ns)


if __name__ == "__main__":
    sys.exit(main())
