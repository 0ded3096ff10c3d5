"""Command-line interface: fit, simulate, evaluate, predict, bench.

Every run that writes artifacts also writes a manifest recording the
resolved configuration and a canonical argv, so the run can be reproduced
exactly with :func:`replay_manifest`. Exit codes: 0 success, 2 usage
error, 3 data error, 4 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from ._kernels import backend_name
from .initialization import init_random, init_svd
from .matrix_io import (
    DataError,
    read_factors,
    read_manifest,
    read_matrix,
    sha256_digest,
    write_fit,
    write_manifest,
    write_matrix,
)
from .metrics import (
    BiclusterSet,
    UndefinedMetricError,
    auc_aupr,
    extract_biclusters,
    match_and_score,
    relevance_recovery,
)
from .model import DEFAULT_LADDER, Hyperparams
from .simulate import SimConfig, simulate_I, simulate_II
from .solver import DivergenceError, fit_ladder

__all__ = ["main", "replay_manifest"]


def _parse_ladder(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad ladder {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("ladder must contain at least one value")
    return values


def _parse_grid(text: str) -> tuple[float, ...]:
    """Either a comma list or an inclusive start:stop:step range."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("range grids use start:stop:step")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}")
        if step == 0.0 or (stop - start) * step < 0.0:
            raise argparse.ArgumentTypeError("grid step must walk from start towards stop")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(n))
    values = tuple(float(tok) for tok in text.split(",") if tok.strip())
    if not values:
        raise argparse.ArgumentTypeError("grid must contain at least one value")
    return values


def _parse_size_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size ranges use lo:hi, got {text!r}")
    return lo, hi


def _package_info() -> dict:
    return {
        "name": "bisslb",
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "backend": backend_name(),
    }


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--k-star", type=int, default=20, help="initial bicluster count cap")
    p.add_argument("--lambda0-ladder", type=_parse_ladder,
                   default=DEFAULT_LADDER, metavar="V1,V2,...",
                   help="increasing spike scales fitted with warm starts")
    p.add_argument("--lambda1", type=float, default=1.0, help="slab scale for both factors")
    p.add_argument("--eta", type=float, default=1e-3, help="proximal step size")
    p.add_argument("--tol", type=float, default=1e-6, help="relative-change stopping tolerance")
    p.add_argument("--max-iter", type=int, default=500, help="iteration cap per ladder rung")
    p.add_argument("--tau-form", choices=("counts", "ibp"), default="counts",
                   help="inclusion-probability update variant")


def _hyperparams(args) -> Hyperparams:
    return Hyperparams(
        K_star=args.k_star,
        lambda0_tilde=args.lambda0_ladder[0],
        lambda1_tilde=args.lambda1,
        lambda0=args.lambda0_ladder[0],
        lambda1=args.lambda1,
        eta=args.eta,
        lambda0_ladder=args.lambda0_ladder,
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
        tau_form=args.tau_form,
    )


def _solver_argv(cfg: dict) -> list[str]:
    return [
        "--k-star", str(cfg["k_star"]),
        "--lambda0-ladder", ",".join(repr(v) for v in cfg["lambda0_ladder"]),
        "--lambda1", repr(cfg["lambda1"]),
        "--eta", repr(cfg["eta"]),
        "--tol", repr(cfg["tol"]),
        "--max-iter", str(cfg["max_iter"]),
        "--tau-form", cfg["tau_form"],
    ]


def _solver_config(args) -> dict:
    return {
        "k_star": args.k_star,
        "lambda0_ladder": list(args.lambda0_ladder),
        "lambda1": args.lambda1,
        "eta": args.eta,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "tau_form": args.tau_form,
    }


def cmd_fit(args) -> int:
    Y = read_matrix(args.input, fmt=args.format, header=args.header)
    hp = _hyperparams(args)
    if args.init == "svd":
        init, tt, ta = init_svd(Y, hp.K_star, scale="sqrt")
    elif args.init == "svd-inverse":
        init, tt, ta = init_svd(Y, hp.K_star, scale="inverse")
    else:
        init, tt, ta = init_random(Y, hp.K_star, seed=args.seed)
    result = fit_ladder(Y, hp, init, tt, ta)
    cfg = _solver_config(args)
    cfg.update(input=str(args.input), format=args.format, init=args.init,
               seed=args.seed, out=str(args.out))
    argv = (["fit", "--input", cfg["input"], "--format", cfg["format"],
             "--init", cfg["init"], "--seed", str(cfg["seed"])]
            + _solver_argv(cfg) + ["--out", cfg["out"]])
    manifest = {
        "command": "fit",
        "package": _package_info(),
        "config": cfg,
        "argv": argv,
        "input": {"path": str(args.input), "format": args.format,
                  "sha256": sha256_digest(args.input)},
    }
    write_fit(result, args.out, manifest)
    print(f"fit: K_hat={result.K_hat} converged={result.converged} "
          f"iterations={result.iterations} out={args.out}")
    return 0


def _sim_config(args) -> SimConfig:
    kwargs = dict(
        n_rows=args.i, n_cols=args.j, K=args.k, seed=args.seed,
        row_size_range=args.row_range, col_size_range=args.col_range,
    )
    if args.sim == 1:
        return SimConfig(noise=args.noise, **kwargs)
    return SimConfig(mu_offset=args.mu, **kwargs)


def _run_sim(cfg: SimConfig, sim: int):
    return simulate_I(cfg) if sim == 1 else simulate_II(cfg)


def cmd_simulate(args) -> int:
    if args.sim == 1 and args.noise is None:
        raise argparse.ArgumentTypeError("--sim 1 requires --noise")
    if args.sim == 2 and args.mu is None:
        raise argparse.ArgumentTypeError("--sim 2 requires --mu")
    cfg = _sim_config(args)
    Y, truth = _run_sim(cfg, args.sim)
    out = Path(args.out)
    os.makedirs(out, exist_ok=True)
    matrix_name = "Y.csv" if args.format == "csv" else "Y.coo"
    write_matrix(Y, out / matrix_name, fmt=args.format)
    truth.to_bicluster_set().to_json(out / "truth.json")
    config = {
        "sim": args.sim, "i": args.i, "j": args.j, "k": args.k,
        "noise": args.noise, "mu": args.mu, "seed": args.seed,
        "row_range": list(args.row_range), "col_range": list(args.col_range),
        "format": args.format, "out": str(args.out),
    }
    level = ["--noise", repr(args.noise)] if args.sim == 1 else ["--mu", repr(args.mu)]
    argv = (["simulate", "--sim", str(args.sim), "--i", str(args.i), "--j", str(args.j),
             "--k", str(args.k)] + level
            + ["--row-range", f"{args.row_range[0]}:{args.row_range[1]}",
               "--col-range", f"{args.col_range[0]}:{args.col_range[1]}",
               "--seed", str(args.seed), "--format", args.format, "--out", str(args.out)])
    write_manifest({"command": "simulate", "package": _package_info(),
                    "config": config, "argv": argv}, out / "manifest.json")
    print(f"simulate: wrote {matrix_name} ({Y.n_rows}x{Y.n_cols}, "
          f"nnz={int(Y.values.sum())}) and truth.json to {out}")
    return 0


_METRIC_KEYS = ("ce", "cs", "rel", "rec")


def _evaluate_sets(truth: BiclusterSet, est: BiclusterSet, wanted, ce_norm: str) -> dict:
    scores = {}
    if "ce" in wanted:
        scores["ce"] = match_and_score(truth, est, kind="ce", ce_norm=ce_norm)
    if "cs" in wanted:
        scores["cs"] = match_and_score(truth, est, kind="cs")
    if "rel" in wanted or "rec" in wanted:
        relevance, recovery = relevance_recovery(truth, est)
        if "rel" in wanted:
            scores["relevance"] = relevance
        if "rec" in wanted:
            scores["recovery"] = recovery
    return scores


def cmd_evaluate(args) -> int:
    wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
    bad = [m for m in wanted if m not in _METRIC_KEYS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown metrics: {','.join(bad)}")
    truth = BiclusterSet.from_json(args.truth)
    est = BiclusterSet.from_json(args.est)
    scores = _evaluate_sets(truth, est, wanted, args.ce_norm)
    print(json.dumps(scores, indent=2, sort_keys=True))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(scores, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_predict(args) -> int:
    fp = read_factors(args.fit)
    Y = read_matrix(args.input, fmt=args.format, header=args.header)
    wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
    bad = [m for m in wanted if m not in ("auc", "aupr")]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown metrics: {','.join(bad)}")
    auc, aupr = auc_aupr(Y, fp)
    scores = {}
    if "auc" in wanted:
        scores["auc"] = auc
    if "aupr" in wanted:
        scores["aupr"] = aupr
    print(json.dumps(scores, indent=2, sort_keys=True))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(scores, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


_BENCH_FIELDS = ("ce", "cs", "relevance", "recovery", "k_hat", "log15_k_hat")


def cmd_bench(args) -> int:
    if args.sim == 1 and args.noise_grid is None:
        raise argparse.ArgumentTypeError("--sim 1 requires --noise-grid")
    if args.sim == 2 and args.mu_grid is None:
        raise argparse.ArgumentTypeError("--sim 2 requires --mu-grid")
    grid = args.noise_grid if args.sim == 1 else args.mu_grid
    if args.replicates < 1:
        raise argparse.ArgumentTypeError("--replicates must be positive")
    out = Path(args.out)
    os.makedirs(out, exist_ok=True)
    hp_args = _hyperparams(args)
    rows = []
    for level in grid:
        for rep in range(args.replicates):
            seed = args.seed + rep
            sim_kwargs = dict(n_rows=args.i, n_cols=args.j, K=args.k, seed=seed,
                              row_size_range=args.row_range,
                              col_size_range=args.col_range)
            if args.sim == 1:
                cfg = SimConfig(noise=level, **sim_kwargs)
            else:
                cfg = SimConfig(mu_offset=level, **sim_kwargs)
            Y, truth = _run_sim(cfg, args.sim)
            result = fit_ladder(Y, hp_args)
            truth_set = truth.to_bicluster_set()
            est_set = extract_biclusters(result.factor_pair)
            relevance, recovery = relevance_recovery(truth_set, est_set)
            log15 = math.log(result.K_hat, 15.0) if result.K_hat > 0 else math.nan
            rows.append({
                "noise": level, "replicate": rep, "seed": seed,
                "ce": match_and_score(truth_set, est_set, kind="ce", ce_norm=args.ce_norm),
                "cs": match_and_score(truth_set, est_set, kind="cs"),
                "relevance": relevance, "recovery": recovery,
                "k_hat": result.K_hat, "log15_k_hat": log15,
                "iterations": result.iterations,
                "converged": int(result.converged),
            })
    rep_path = out / "bench_replicates.csv"
    with open(rep_path, "w") as fh:
        fh.write("noise,replicate,seed,ce,cs,relevance,recovery,"
                 "k_hat,log15_k_hat,iterations,converged\n")
        for r in rows:
            fh.write(f"{repr(float(r['noise']))},{r['replicate']},{r['seed']},"
                     f"{repr(r['ce'])},{repr(r['cs'])},{repr(r['relevance'])},"
                     f"{repr(r['recovery'])},{r['k_hat']},{repr(r['log15_k_hat'])},"
                     f"{r['iterations']},{r['converged']}\n")
    with open(out / "bench_summary.csv", "w") as fh:
        header = ["noise", "n"]
        for name in _BENCH_FIELDS:
            header += [f"{name}_mean", f"{name}_sd"]
        fh.write(",".join(header) + "\n")
        for level in grid:
            group = [r for r in rows if r["noise"] == level]
            cells = [repr(float(level)), str(len(group))]
            for name in _BENCH_FIELDS:
                vals = np.asarray([float(g[name]) for g in group])
                mean = float(vals.mean())
                sd = float(vals.std(ddof=1)) if vals.size > 1 else math.nan
                cells += [repr(mean), repr(sd)]
            fh.write(",".join(cells) + "\n")
    cfg = _solver_config(args)
    cfg.update(sim=args.sim, i=args.i, j=args.j, k=args.k,
               grid=list(grid), replicates=args.replicates, seed=args.seed,
               ce_norm=args.ce_norm, row_range=list(args.row_range),
               col_range=list(args.col_range), out=str(args.out))
    grid_flag = "--noise-grid" if args.sim == 1 else "--mu-grid"
    argv = (["bench", "--sim", str(args.sim), "--i", str(args.i), "--j", str(args.j),
             "--k", str(args.k), grid_flag, ",".join(repr(v) for v in grid),
             "--replicates", str(args.replicates),
             "--row-range", f"{args.row_range[0]}:{args.row_range[1]}",
             "--col-range", f"{args.col_range[0]}:{args.col_range[1]}",
             "--ce-norm", args.ce_norm, "--seed", str(args.seed)]
            + _solver_argv(cfg) + ["--out", cfg["out"]])
    write_manifest({"command": "bench", "package": _package_info(),
                    "config": cfg, "argv": argv}, out / "manifest.json")
    print(f"bench: {len(rows)} runs over {len(grid)} levels -> {out}")
    return 0


def _add_sim_shape_flags(p: argparse.ArgumentParser, i_default: int, j_default: int,
                         k_default: int):
    p.add_argument("--i", type=int, default=i_default, help="rows")
    p.add_argument("--j", type=int, default=j_default, help="columns")
    p.add_argument("--k", type=int, default=k_default, help="planted bicluster count")
    p.add_argument("--row-range", type=_parse_size_range, default=(5, 20),
                   metavar="LO:HI", help="bicluster row-size range")
    p.add_argument("--col-range", type=_parse_size_range, default=(10, 50),
                   metavar="LO:HI", help="bicluster column-size range")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bisslb",
        description="Biclustering of binary matrices by sparse logistic matrix factorization.",
    )
    parser.add_argument("--version", action="version", version=f"bisslb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the model to a binary matrix")
    p.add_argument("--input", required=True, help="matrix file")
    p.add_argument("--format", choices=("csv", "coo"), default="csv")
    p.add_argument("--header", action=argparse.BooleanOptionalAction, default=None,
                   help="force CSV header on/off (default: auto-detect)")
    p.add_argument("--init", choices=("svd", "svd-inverse", "random"), default="svd")
    p.add_argument("--seed", type=int, default=0)
    _add_solver_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="generate a synthetic dataset with planted truth")
    p.add_argument("--sim", type=int, choices=(1, 2), required=True)
    _add_sim_shape_flags(p, 300, 1000, 15)
    p.add_argument("--noise", type=float, default=None, help="flip fraction (sim 1)")
    p.add_argument("--mu", type=float, default=None, help="log-odds offset (sim 2)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "coo"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="score an estimated bicluster set against a truth set")
    p.add_argument("--truth", required=True, help="truth JSON")
    p.add_argument("--est", required=True, help="estimate JSON")
    p.add_argument("--metrics", default="ce,cs,rel,rec")
    p.add_argument("--ce-norm", choices=("union", "max"), default="union")
    p.add_argument("--out", default=None, help="optional JSON output path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="in-sample link prediction scores for a saved fit")
    p.add_argument("--fit", required=True, help="fit output directory")
    p.add_argument("--input", required=True, help="matrix file")
    p.add_argument("--format", choices=("csv", "coo"), default="csv")
    p.add_argument("--header", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--metrics", default="auc,aupr")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bench", help="simulate, fit and score across a difficulty grid")
    p.add_argument("--sim", type=int, choices=(1, 2), default=1)
    _add_sim_shape_flags(p, 100, 300, 5)
    p.add_argument("--noise-grid", type=_parse_grid, default=None,
                   metavar="GRID", help="flip fractions, list or start:stop:step (sim 1)")
    p.add_argument("--mu-grid", type=_parse_grid, default=None,
                   metavar="GRID", help="log-odds offsets (sim 2)")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--ce-norm", choices=("union", "max"), default="union")
    p.add_argument("--seed", type=int, default=0)
    _add_solver_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    return parser


def replay_manifest(path) -> int:
    """Re-run the command recorded in a manifest; outputs are reproduced bitwise."""
    manifest = read_manifest(path)
    return main(list(manifest["argv"]))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.exit(2, f"{parser.prog}: error: {exc}\n")
    except (DataError, UndefinedMetricError, FileNotFoundError) as exc:
        print(f"{parser.prog}: data error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"{parser.prog}: divergence: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        parser.exit(2, f"{parser.prog}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
