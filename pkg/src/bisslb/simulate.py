"""Synthetic binary matrices with planted, possibly overlapping biclusters.

Both generators plant ``K`` rank-one blocks by giving each factor column a
single contiguous run of ones at a uniformly random start; block sizes are
drawn uniformly from the configured ranges. The first generator observes
the block union exactly and then flips a fixed fraction of cells; the
second pushes block values through a logistic model, so the noise level is
controlled by a scalar offset on the log-odds scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metrics import Bicluster, BiclusterSet
from .model import BinaryMatrix, success_probability

__all__ = ["SimConfig", "PlantedTruth", "simulate_I", "simulate_II"]


@dataclass(frozen=True)
class SimConfig:
    """Generator settings; ``noise`` drives the flip model, ``mu_offset`` the logistic one."""

    n_rows: int = 300
    n_cols: int = 1000
    K: int = 15
    noise: float = 0.0
    mu_offset: float = -5.0
    row_size_range: tuple[int, int] = (5, 20)
    col_size_range: tuple[int, int] = (10, 50)
    seed: int = 0

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1 or self.K < 1:
            raise ValueError("n_rows, n_cols and K must be positive")
        if not 0.0 <= self.noise <= 0.5:
            raise ValueError("noise must lie in [0, 0.5]")
        if not np.isfinite(self.mu_offset):
            raise ValueError("mu_offset must be finite")
        for name, (lo, hi), limit in (
            ("row_size_range", self.row_size_range, self.n_rows),
            ("col_size_range", self.col_size_range, self.n_cols),
        ):
            if not (1 <= lo <= hi):
                raise ValueError(f"{name} must satisfy 1 <= lo <= hi")
            if hi > limit:
                raise ValueError(f"{name} upper bound {hi} exceeds the matrix extent {limit}")


@dataclass
class PlantedTruth:
    """Ground-truth supports of the planted blocks."""

    biclusters: list[tuple[np.ndarray, np.ndarray]]
    A_true: np.ndarray
    B_true: np.ndarray
    K_true: int = field(init=False)

    def __post_init__(self):
        self.K_true = len(self.biclusters)

    def to_bicluster_set(self) -> BiclusterSet:
        return BiclusterSet([Bicluster(rows, cols) for rows, cols in self.biclusters])


def _plant_supports(cfg: SimConfig, rng: np.random.Generator) -> PlantedTruth:
    A = np.zeros((cfg.n_rows, cfg.K))
    B = np.zeros((cfg.n_cols, cfg.K))
    blocks = []
    for k in range(cfg.K):
        r = int(rng.integers(cfg.row_size_range[0], cfg.row_size_range[1] + 1))
        c = int(rng.integers(cfg.col_size_range[0], cfg.col_size_range[1] + 1))
        row_start = int(rng.integers(0, cfg.n_rows - r + 1))
        col_start = int(rng.integers(0, cfg.n_cols - c + 1))
        rows = np.arange(row_start, row_start + r)
        cols = np.arange(col_start, col_start + c)
        A[rows, k] = 1.0
        B[cols, k] = 1.0
        blocks.append((rows, cols))
    return PlantedTruth(blocks, A, B)


def simulate_I(cfg: SimConfig) -> tuple[BinaryMatrix, PlantedTruth]:
    """Block union observed exactly, then ``round(noise * I * J)`` cells flipped.

    The flipped cells are sampled without replacement, so the number of
    cells differing from the noise-free matrix is exact.
    """
    rng = np.random.default_rng(cfg.seed)
    truth = _plant_supports(cfg, rng)
    Yv = (truth.A_true @ truth.B_true.T != 0.0).astype(np.float64)
    n_flips = int(np.rint(cfg.noise * cfg.n_rows * cfg.n_cols))
    if n_flips:
        idx = rng.choice(cfg.n_rows * cfg.n_cols, size=n_flips, replace=False)
        Yv.flat[idx] = 1.0 - Yv.flat[idx]
    return BinaryMatrix(Yv), truth


def simulate_II(cfg: SimConfig) -> tuple[BinaryMatrix, PlantedTruth]:
    """Logistic draw: block cells at log-odds ``mu_offset +- 2``, background at ``mu_offset``.

    Each block gets a random sign for its mean; cell values are Gaussian
    with scale 0.1 around the signed mean (0 outside the blocks). Where
    blocks overlap, the highest-index block wins. Raising ``mu_offset``
    towards 0 brightens the background, i.e. adds noise.
    """
    rng = np.random.default_rng(cfg.seed)
    truth = _plant_supports(cfg, rng)
    V = rng.normal(0.0, 0.1, size=(cfg.n_rows, cfg.n_cols))
    for rows, cols in truth.biclusters:
        sign = 1.0 if rng.integers(0, 2) else -1.0
        V[np.ix_(rows, cols)] = rng.normal(2.0 * sign, 0.1, size=(rows.size, cols.size))
    p = success_probability(cfg.mu_offset + V)
    Yv = (rng.random(size=(cfg.n_rows, cfg.n_cols)) < p).astype(np.float64)
    return BinaryMatrix(Yv), truth
