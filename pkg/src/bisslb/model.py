"""Model core: data types, the logistic likelihood and its gradients.

The observation model is Bernoulli with logits ``M = mu 1^T + A B^T``:
row effects ``mu`` shift the baseline log odds and the sparse factor pair
``(A, B)`` carries the bicluster structure as rank-one blocks. All
functions here are pure; matrices are dense float64 (the likelihood and
gradients materialize the full I x J probability matrix, so memory is
``O(I * J)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .penalty import PenaltyParams, column_penalty

__all__ = [
    "PROB_EPS",
    "BinaryMatrix",
    "FactorPair",
    "Hyperparams",
    "SolverState",
    "success_probability",
    "log_likelihood",
    "log_posterior",
    "gradient_wrt_A",
    "gradient_wrt_B",
]

PROB_EPS = 1e-12

DEFAULT_LADDER = (1.0, 5.0, 10.0, 50.0, 100.0, 1000.0, 10000.0)


class BinaryMatrix:
    """Dense I x J matrix of 0/1 observations."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.ascontiguousarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("matrix must have at least one row and one column")
        if not np.all((arr == 0.0) | (arr == 1.0)):
            raise ValueError("entries must all be 0 or 1")
        self.values = arr

    @classmethod
    def from_coo(cls, n_rows: int, n_cols: int, rows, cols) -> "BinaryMatrix":
        """Build from 0-based coordinates of the one-cells."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.shape != cols.shape:
            raise ValueError("rows and cols must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows):
            raise ValueError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= n_cols):
            raise ValueError("column index out of range")
        arr = np.zeros((n_rows, n_cols))
        arr[rows, cols] = 1.0
        return cls(arr)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def nonzero_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Row/column indices of the one-cells, row-major order."""
        return np.nonzero(self.values)

    def __repr__(self) -> str:
        return f"BinaryMatrix({self.n_rows}x{self.n_cols}, nnz={int(self.values.sum())})"


def _values(Y) -> np.ndarray:
    return Y.values if isinstance(Y, BinaryMatrix) else np.asarray(Y, dtype=np.float64)


@dataclass
class FactorPair:
    """Factor matrices ``A`` (I x K), ``B`` (J x K) and row offsets ``mu`` (I,)."""

    A: np.ndarray
    B: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        self.A = np.ascontiguousarray(self.A, dtype=np.float64)
        self.B = np.ascontiguousarray(self.B, dtype=np.float64)
        self.mu = np.ascontiguousarray(self.mu, dtype=np.float64)
        if self.A.ndim != 2 or self.B.ndim != 2:
            raise ValueError("A and B must be 2-D")
        if self.A.shape[1] != self.B.shape[1]:
            raise ValueError(
                f"A and B must share a column count, got {self.A.shape[1]} and {self.B.shape[1]}"
            )
        if self.mu.ndim != 1 or self.mu.shape[0] != self.A.shape[0]:
            raise ValueError("mu must be a vector with one entry per row of A")
        for name, arr in (("A", self.A), ("B", self.B), ("mu", self.mu)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def n_factors(self) -> int:
        return self.A.shape[1]

    def logits(self) -> np.ndarray:
        """The dense logit matrix ``mu 1^T + A B^T``."""
        return self.mu[:, None] + self.A @ self.B.T

    def copy(self) -> "FactorPair":
        return FactorPair(self.A.copy(), self.B.copy(), self.mu.copy())


@dataclass(frozen=True)
class Hyperparams:
    """Solver hyperparameters.

    ``lambda0_tilde``/``lambda0`` are the spike inverse scales for the row
    and column factors, ``lambda1_tilde``/``lambda1`` the slabs. The
    intensity parameters ``alpha_tilde``/``alpha`` default to
    ``1 / K_star`` when left as ``None``. ``tau_form`` selects the
    inclusion-probability update: ``"counts"`` uses the intensity itself
    in the numerator, ``"ibp"`` divides it by the current column count.
    """

    K_star: int = 20
    lambda0_tilde: float = 1.0
    lambda1_tilde: float = 1.0
    lambda0: float = 1.0
    lambda1: float = 1.0
    alpha_tilde: float | None = None
    alpha: float | None = None
    beta_tilde: float = 1.0
    beta: float = 1.0
    eta: float = 1e-3
    lambda0_ladder: tuple[float, ...] = DEFAULT_LADDER
    tol: float = 1e-6
    max_iter: int = 500
    seed: int = 0
    tau_form: str = "counts"

    def __post_init__(self):
        if self.K_star < 1:
            raise ValueError("K_star must be a positive count")
        if self.alpha_tilde is None:
            object.__setattr__(self, "alpha_tilde", 1.0 / self.K_star)
        if self.alpha is None:
            object.__setattr__(self, "alpha", 1.0 / self.K_star)
        for name in ("lambda0_tilde", "lambda1_tilde", "lambda0", "lambda1",
                     "alpha_tilde", "alpha", "beta_tilde", "beta", "eta", "tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.lambda0_tilde < self.lambda1_tilde:
            raise ValueError("lambda0_tilde must be >= lambda1_tilde")
        if self.lambda0 < self.lambda1:
            raise ValueError("lambda0 must be >= lambda1")
        ladder = tuple(float(v) for v in self.lambda0_ladder)
        if len(ladder) == 0:
            raise ValueError("lambda0_ladder must be non-empty")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("lambda0_ladder must be strictly increasing")
        object.__setattr__(self, "lambda0_ladder", ladder)
        if self.max_iter < 1:
            raise ValueError("max_iter must be a positive count")
        if self.tau_form not in ("counts", "ibp"):
            raise ValueError("tau_form must be 'counts' or 'ibp'")

    def with_lambda0(self, value: float) -> "Hyperparams":
        """Copy with both spike scales set to ``value`` (one ladder rung)."""
        return replace(self, lambda0_tilde=float(value), lambda0=float(value))


@dataclass
class SolverState:
    """Mutable iterate of the coordinate-ascent solver.

    ``fp`` holds the newest factors; ``A_prev``/``B_prev`` the one-step-older
    iterates used by the momentum extrapolation. ``tau_tilde``/``tau`` are
    the per-column inclusion probabilities for the row and column factors.
    """

    fp: FactorPair
    A_prev: np.ndarray
    B_prev: np.ndarray
    tau_tilde: np.ndarray
    tau: np.ndarray
    t: int = 2
    log_posterior: float = -math.inf

    def __post_init__(self):
        self.A_prev = np.ascontiguousarray(self.A_prev, dtype=np.float64)
        self.B_prev = np.ascontiguousarray(self.B_prev, dtype=np.float64)
        self.tau_tilde = np.asarray(self.tau_tilde, dtype=np.float64).copy()
        self.tau = np.asarray(self.tau, dtype=np.float64).copy()
        K = self.fp.n_factors
        if self.A_prev.shape != self.fp.A.shape or self.B_prev.shape != self.fp.B.shape:
            raise ValueError("momentum history must match the current factor shapes")
        if self.tau_tilde.shape != (K,) or self.tau.shape != (K,):
            raise ValueError("tau vectors must have one entry per factor column")
        for name, v in (("tau_tilde", self.tau_tilde), ("tau", self.tau)):
            if np.any(v < 0.0) or np.any(v > 1.0):
                raise ValueError(f"{name} entries must lie in [0, 1]")

    @property
    def n_factors(self) -> int:
        return self.fp.n_factors

    @classmethod
    def from_init(cls, fp: FactorPair, tau_tilde, tau) -> "SolverState":
        """Fresh state with momentum history equal to the starting point."""
        fp = fp.copy()
        return cls(fp=fp, A_prev=fp.A.copy(), B_prev=fp.B.copy(),
                   tau_tilde=tau_tilde, tau=tau)


def success_probability(m):
    """Logistic success probability, clipped to ``[PROB_EPS, 1 - PROB_EPS]``.

    Accepts scalars or arrays; raises on non-finite input.
    """
    arr = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("logit must be finite")
    neg = arr < 0.0
    e = np.exp(np.where(neg, arr, -arr))
    p = np.where(neg, e / (1.0 + e), 1.0 / (1.0 + e))
    p = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    return float(p) if arr.ndim == 0 else p


def _check_dims(Yv: np.ndarray, fp: FactorPair):
    if Yv.shape != (fp.A.shape[0], fp.B.shape[0]):
        raise ValueError(
            f"data of shape {Yv.shape} does not match factors "
            f"({fp.A.shape[0]} x {fp.B.shape[0]})"
        )


def log_likelihood(Y, fp: FactorPair) -> float:
    """Bernoulli log-likelihood of ``Y`` under the factor pair; always <= 0."""
    Yv = _values(Y)
    _check_dims(Yv, fp)
    _, ll = _kernels.sigmoid_residual(fp.logits(), Yv)
    return ll


def log_posterior(Y, state: SolverState, hp: Hyperparams) -> float:
    """Monitoring objective: log-likelihood plus the separable penalty terms.

    The penalty uses the current inclusion probabilities, matching the
    quantity the solver ascends; it vanishes when both factors are zero.
    """
    fp = state.fp
    ll = log_likelihood(Y, fp)
    pen_a = column_penalty(
        fp.A,
        PenaltyParams(theta=state.tau_tilde, xi0=hp.lambda0_tilde,
                      xi1=hp.lambda1_tilde, eta=hp.eta),
    )
    pen_b = column_penalty(
        fp.B,
        PenaltyParams(theta=state.tau, xi0=hp.lambda0, xi1=hp.lambda1, eta=hp.eta),
    )
    return ll + pen_a + pen_b


def gradient_wrt_A(Y, fp: FactorPair) -> np.ndarray:
    """Gradient of the negative log-likelihood with respect to ``A``: ``(W - Y) B``."""
    Yv = _values(Y)
    _check_dims(Yv, fp)
    R, _ = _kernels.sigmoid_residual(fp.logits(), Yv)
    return R @ fp.B


def gradient_wrt_B(Y, fp: FactorPair) -> np.ndarray:
    """Gradient of the negative log-likelihood with respect to ``B``: ``(W - Y)^T A``."""
    Yv = _values(Y)
    _check_dims(Yv, fp)
    R, _ = _kernels.sigmoid_residual(fp.logits(), Yv)
    return R.T @ fp.A
