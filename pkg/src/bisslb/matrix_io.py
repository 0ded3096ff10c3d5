"""File formats: matrix ingestion, fit artifacts and run manifests.

Matrices travel as dense CSV (rows of 0/1 tokens, optional header) or as a
coordinate listing ("I J NNZ" then 1-based "i j" pairs for the one-cells).
Factor estimates are written with shortest round-trip decimal rendering, so
reading them back reproduces the floats bit for bit; manifests record every
resolved parameter plus a digest of the input bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .metrics import extract_biclusters
from .model import BinaryMatrix, FactorPair
from .solver import FitResult

__all__ = [
    "DataError",
    "read_matrix",
    "write_matrix",
    "write_fit",
    "read_factors",
    "sha256_digest",
    "write_manifest",
    "read_manifest",
]


class DataError(ValueError):
    """Malformed or unreadable input data."""


def sha256_digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _read_lines(path) -> list[str]:
    try:
        with open(path) as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _parse_csv(lines: list[str], path, header: bool | None) -> BinaryMatrix:
    rows: list[list[float]] = []
    start = 0
    if lines and header is not False:
        first = [tok.strip() for tok in lines[0].split(",")]
        if header is True or any(tok not in ("0", "1") for tok in first):
            start = 1
    width = None
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        tokens = [tok.strip() for tok in line.split(",")]
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise DataError(f"{path}:{lineno}: expected {width} columns, found {len(tokens)}")
        row = []
        for colno, tok in enumerate(tokens, start=1):
            if tok == "0":
                row.append(0.0)
            elif tok == "1":
                row.append(1.0)
            else:
                raise DataError(f"{path}:{lineno}:{colno}: non-binary token {tok!r}")
        rows.append(row)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return BinaryMatrix(np.asarray(rows))


def _parse_coo(lines: list[str], path) -> BinaryMatrix:
    content = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if not content:
        raise DataError(f"{path}: empty file")
    lineno, head = content[0]
    parts = head.split()
    if len(parts) != 3:
        raise DataError(f"{path}:{lineno}: expected header 'I J NNZ'")
    try:
        n_rows, n_cols, nnz = (int(p) for p in parts)
    except ValueError as exc:
        raise DataError(f"{path}:{lineno}: non-integer header field") from exc
    if len(content) - 1 != nnz:
        raise DataError(f"{path}: header promises {nnz} entries, found {len(content) - 1}")
    rows, cols = [], []
    for lineno, line in content[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected 'i j'")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-integer index") from exc
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise DataError(f"{path}:{lineno}: index ({i}, {j}) out of bounds")
        rows.append(i - 1)
        cols.append(j - 1)
    try:
        return BinaryMatrix.from_coo(n_rows, n_cols, rows, cols)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def read_matrix(path, fmt: str = "csv", header: bool | None = None) -> BinaryMatrix:
    """Read a binary matrix; ``header=None`` auto-detects a CSV header row."""
    lines = _read_lines(path)
    if fmt == "csv":
        return _parse_csv(lines, path, header)
    if fmt == "coo":
        return _parse_coo(lines, path)
    raise ValueError(f"unknown format {fmt!r}")


def write_matrix(Y: BinaryMatrix, path, fmt: str = "csv"):
    arr = Y.values
    with open(path, "w") as fh:
        if fmt == "csv":
            for row in arr:
                fh.write(",".join("1" if v else "0" for v in row) + "\n")
        elif fmt == "coo":
            rows, cols = Y.nonzero_coords()
            fh.write(f"{Y.n_rows} {Y.n_cols} {rows.size}\n")
            for i, j in zip(rows, cols):
                fh.write(f"{i + 1} {j + 1}\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")


def _write_float_matrix(arr: np.ndarray, path):
    with open(path, "w") as fh:
        for row in arr:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _read_float_matrix(path, n_rows: int | None = None) -> np.ndarray:
    lines = [ln for ln in _read_lines(path) if ln.strip()]
    if not lines:
        return np.zeros((n_rows or 0, 0))
    return np.asarray([[float(tok) for tok in ln.split(",")] for ln in lines])


def write_manifest(manifest: dict, path):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc


def write_fit(result: FitResult, outdir, manifest: dict | None = None):
    """Emit A.csv, B.csv, mu.csv, biclusters.json, trace.csv and manifest.json."""
    outdir = Path(outdir)
    os.makedirs(outdir, exist_ok=True)
    _write_float_matrix(result.A, outdir / "A.csv")
    _write_float_matrix(result.B, outdir / "B.csv")
    _write_float_matrix(result.mu[:, None], outdir / "mu.csv")
    extract_biclusters(result.factor_pair).to_json(outdir / "biclusters.json")
    with open(outdir / "trace.csv", "w") as fh:
        fh.write("rung,lambda0,iteration,log_posterior,K,max_rel_change\n")
        for rec in result.trace:
            fh.write(
                f"{rec.rung},{repr(float(rec.lambda0))},{rec.iteration},"
                f"{repr(float(rec.log_posterior))},{rec.K},{repr(float(rec.max_rel_change))}\n"
            )
    manifest = dict(manifest or {})
    manifest["result"] = {
        "n_rows": int(result.A.shape[0]),
        "n_cols": int(result.B.shape[0]),
        "K_hat": int(result.K_hat),
        "iterations": int(result.iterations),
        "converged": bool(result.converged),
        "log_posterior": float(result.log_posterior),
    }
    write_manifest(manifest, outdir / "manifest.json")


def read_factors(fit_dir) -> FactorPair:
    """Reload the factor estimate written by :func:`write_fit`."""
    fit_dir = Path(fit_dir)
    mu = _read_float_matrix(fit_dir / "mu.csv").ravel()
    A = _read_float_matrix(fit_dir / "A.csv", n_rows=mu.size)
    manifest = read_manifest(fit_dir / "manifest.json")
    n_cols = int(manifest["result"]["n_cols"])
    B = _read_float_matrix(fit_dir / "B.csv", n_rows=n_cols)
    if A.shape[1] == 0:
        A = np.zeros((mu.size, 0))
        B = np.zeros((n_cols, 0))
    return FactorPair(A, B, mu)
