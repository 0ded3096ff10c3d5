"""Coordinate-ascent solver with momentum proximal steps.

One outer iteration updates, in order:

1. the row factor ``A`` by a momentum-extrapolated gradient step followed
   by the adaptive thresholding operator (soft shrinkage plus a hard
   selection threshold, so entries become exactly zero),
2. the column factor ``B`` the same way,
3. the row offsets ``mu`` by one closed-form minorize-maximize step
   (curvature bound J/4, so the step is ``(4/J) * residual row sums``),
4. the per-column inclusion probabilities from the factor support sizes,
5. a stable descending reorder of the columns by row-factor inclusion,
6. removal of columns whose row or column support is empty (their
   rank-one contribution vanishes), resetting the truncation level,
7. a per-column rescale equalizing the L1 norms of paired columns, which
   leaves ``A B^T`` unchanged.

The momentum extrapolation does not guarantee monotone ascent, so the
objective is logged per iteration but not asserted monotone. Convergence
is declared when the relative change of ``A``, ``B`` and ``mu`` all fall
below ``tol`` in an iteration that also kept the column count stable.

``fit_ladder`` runs ``fit`` over an increasing sequence of spike scales,
warm-starting each rung from the previous solution; sparsity typically
ratchets up along the way and the final rung is returned.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .initialization import init_svd
from .model import FactorPair, Hyperparams, SolverState, _values, log_posterior
from .penalty import PenaltyParams, threshold_upper

__all__ = [
    "DivergenceError",
    "IterationRecord",
    "FitResult",
    "update_A",
    "update_B",
    "update_mu",
    "update_tau",
    "reorder_and_prune",
    "rescale",
    "fit",
    "fit_ladder",
]


class DivergenceError(RuntimeError):
    """Raised when an update produces non-finite entries."""


@dataclass(frozen=True)
class IterationRecord:
    """One trace row: objective, column count and parameter movement."""

    rung: int
    lambda0: float
    iteration: int
    log_posterior: float
    K: int
    max_rel_change: float


@dataclass
class FitResult:
    """Solver output: posterior-mode factors plus bookkeeping."""

    A: np.ndarray
    B: np.ndarray
    mu: np.ndarray
    K_hat: int
    tau_tilde: np.ndarray
    tau: np.ndarray
    trace: list[IterationRecord]
    iterations: int
    converged: bool
    log_posterior: float
    rungs: "list[FitResult] | None" = field(default=None, repr=False)

    @property
    def factor_pair(self) -> FactorPair:
        return FactorPair(self.A.copy(), self.B.copy(), self.mu.copy())


def _check_finite(X: np.ndarray, name: str, eta: float):
    if np.all(np.isfinite(X)):
        return
    i, k = np.unravel_index(np.argmin(np.isfinite(X)), X.shape)
    raise DivergenceError(
        f"non-finite {name}[{i},{k}] after update; try a smaller learning rate than {eta}"
    )


def _momentum_point(cur: np.ndarray, prev: np.ndarray, t: int) -> np.ndarray:
    return cur + ((t - 2.0) / (t + 1.0)) * (cur - prev)


def update_A(state: SolverState, Y, hp: Hyperparams) -> np.ndarray:
    """Momentum proximal step on the row factor; shifts the history."""
    Yv = _values(Y)
    A, B, mu = state.fp.A, state.fp.B, state.fp.mu
    Am = _momentum_point(A, state.A_prev, state.t)
    R, _ = _kernels.sigmoid_residual(mu[:, None] + Am @ B.T, Yv)
    Z = Am - hp.eta * (R @ B)
    pp = PenaltyParams(theta=state.tau_tilde, xi0=hp.lambda0_tilde,
                       xi1=hp.lambda1_tilde, eta=hp.eta)
    delta = np.atleast_1d(threshold_upper(pp))
    A_new = _kernels.adaptive_prox(Z, A, state.tau_tilde, hp.lambda0_tilde,
                                   hp.lambda1_tilde, hp.eta, delta)
    _check_finite(A_new, "A", hp.eta)
    state.A_prev = A
    state.fp.A = A_new
    return A_new


def update_B(state: SolverState, Y, hp: Hyperparams) -> np.ndarray:
    """Momentum proximal step on the column factor; mirrors :func:`update_A`."""
    Yv = _values(Y)
    A, B, mu = state.fp.A, state.fp.B, state.fp.mu
    Bm = _momentum_point(B, state.B_prev, state.t)
    R, _ = _kernels.sigmoid_residual(mu[:, None] + A @ Bm.T, Yv)
    Z = Bm - hp.eta * (R.T @ A)
    pp = PenaltyParams(theta=state.tau, xi0=hp.lambda0, xi1=hp.lambda1, eta=hp.eta)
    delta = np.atleast_1d(threshold_upper(pp))
    B_new = _kernels.adaptive_prox(Z, B, state.tau, hp.lambda0, hp.lambda1,
                                   hp.eta, delta)
    _check_finite(B_new, "B", hp.eta)
    state.B_prev = B
    state.fp.B = B_new
    return B_new


def update_mu(state: SolverState, Y) -> np.ndarray:
    """One minorize-maximize step on the row offsets.

    Uses probabilities from the pre-update ``mu`` together with the freshly
    updated factors; the per-row objective never decreases.
    """
    Yv = _values(Y)
    fp = state.fp
    n_cols = Yv.shape[1]
    R, _ = _kernels.sigmoid_residual(fp.logits(), Yv)
    state.fp.mu = fp.mu - (4.0 / n_cols) * R.sum(axis=1)
    return state.fp.mu


def update_tau(state: SolverState, hp: Hyperparams) -> tuple[np.ndarray, np.ndarray]:
    """Refresh inclusion probabilities from the factor support sizes."""
    n_rows = state.fp.A.shape[0]
    n_cols = state.fp.B.shape[0]
    na = np.count_nonzero(state.fp.A, axis=0)
    nb = np.count_nonzero(state.fp.B, axis=0)
    if hp.tau_form == "counts":
        at, a = hp.alpha_tilde, hp.alpha
    else:
        K = max(state.n_factors, 1)
        at, a = hp.alpha_tilde / K, hp.alpha / K
    state.tau_tilde = (at + na) / (at + hp.beta_tilde + n_rows)
    state.tau = (a + nb) / (a + hp.beta + n_cols)
    return state.tau_tilde, state.tau


def reorder_and_prune(state: SolverState) -> SolverState:
    """Sort columns by descending row-factor inclusion, drop dead columns.

    A single stable permutation (ties broken by original index) is applied
    to both factors, both momentum buffers and ``tau_tilde``; the ``tau``
    values are rank-matched to the new order so both vectors end
    descending. Columns with an empty row or column support contribute
    nothing to ``A B^T`` and are removed everywhere; the truncation level
    becomes the remaining column count.
    """
    order = np.argsort(-state.tau_tilde, kind="stable")
    A = state.fp.A[:, order]
    B = state.fp.B[:, order]
    A_prev = state.A_prev[:, order]
    B_prev = state.B_prev[:, order]
    tau_tilde = state.tau_tilde[order]
    tau = np.sort(state.tau)[::-1]
    keep = (np.count_nonzero(A, axis=0) > 0) & (np.count_nonzero(B, axis=0) > 0)
    if not keep.all():
        A, B = A[:, keep], B[:, keep]
        A_prev, B_prev = A_prev[:, keep], B_prev[:, keep]
        tau_tilde, tau = tau_tilde[keep], tau[keep]
    if A.shape[1] == 0 and state.fp.A.shape[1] > 0:
        warnings.warn("degenerate: empty model; continuing with offsets only", stacklevel=2)
    state.fp.A, state.fp.B = A, B
    state.A_prev, state.B_prev = np.ascontiguousarray(A_prev), np.ascontiguousarray(B_prev)
    state.tau_tilde, state.tau = tau_tilde, np.ascontiguousarray(tau)
    return state


def rescale(state: SolverState) -> SolverState:
    """Equalize per-column L1 norms of the paired factors; ``A B^T`` unchanged.

    Must run after pruning, so both norms are positive. The momentum
    buffers get the same per-column scales, keeping the extrapolation
    consistent with the rescaled trajectory.
    """
    if state.n_factors == 0:
        return state
    norm_a = np.abs(state.fp.A).sum(axis=0)
    norm_b = np.abs(state.fp.B).sum(axis=0)
    assert norm_b.min() > 0.0 and norm_a.min() > 0.0, "rescale requires pruned columns"
    c = np.sqrt(norm_a / norm_b)
    state.fp.A = state.fp.A / c
    state.fp.B = state.fp.B * c
    state.A_prev = state.A_prev / c
    state.B_prev = state.B_prev * c
    return state


def _rel_change(X: np.ndarray, X_old: np.ndarray) -> float:
    if X.size == 0 and X_old.size == 0:
        return 0.0
    return float(np.linalg.norm(X - X_old) / (1.0 + np.linalg.norm(X_old)))


@dataclass
class _Snapshot:
    A: np.ndarray
    B: np.ndarray
    mu: np.ndarray
    tau_tilde: np.ndarray
    tau: np.ndarray
    log_posterior: float


def _take_snapshot(state: SolverState) -> _Snapshot:
    return _Snapshot(state.fp.A.copy(), state.fp.B.copy(), state.fp.mu.copy(),
                     state.tau_tilde.copy(), state.tau.copy(), state.log_posterior)


def fit(
    Y,
    hp: Hyperparams,
    init: FactorPair,
    tau_tilde: np.ndarray | None = None,
    tau: np.ndarray | None = None,
    rung: int = 0,
) -> FitResult:
    """Run the coordinate-ascent loop from ``init`` until convergence.

    ``tau_tilde``/``tau`` default to 0.5 per column. The output is
    deterministic given identical inputs. If ``max_iter`` is reached the
    iterate with the highest recorded objective is returned and
    ``converged`` is False.
    """
    Yv = _values(Y)
    if init.A.shape[0] != Yv.shape[0] or init.B.shape[0] != Yv.shape[1]:
        raise ValueError("initial factors do not match the data dimensions")
    K0 = init.n_factors
    tt = np.full(K0, 0.5) if tau_tilde is None else np.asarray(tau_tilde, dtype=float)
    ta = np.full(K0, 0.5) if tau is None else np.asarray(tau, dtype=float)
    state = SolverState.from_init(init, tt, ta)
    state.log_posterior = log_posterior(Yv, state, hp)
    trace: list[IterationRecord] = []
    best: _Snapshot | None = None
    converged = False

    for _ in range(hp.max_iter):
        A0 = state.fp.A.copy()
        B0 = state.fp.B.copy()
        mu0 = state.fp.mu.copy()
        K_before = state.n_factors

        update_A(state, Yv, hp)
        update_B(state, Yv, hp)
        update_mu(state, Yv)
        update_tau(state, hp)
        reorder_and_prune(state)
        rescale(state)

        state.log_posterior = log_posterior(Yv, state, hp)
        K_after = state.n_factors
        if K_after == K_before:
            rel = max(
                _rel_change(state.fp.A, A0),
                _rel_change(state.fp.B, B0),
                _rel_change(state.fp.mu, mu0),
            )
        else:
            rel = math.nan
        trace.append(IterationRecord(rung, hp.lambda0, state.t,
                                     state.log_posterior, K_after, rel))
        if best is None or state.log_posterior > best.log_posterior:
            best = _take_snapshot(state)
        state.t += 1
        if K_after == K_before and rel < hp.tol:
            converged = True
            break

    chosen = _take_snapshot(state) if converged else best
    return FitResult(
        A=chosen.A,
        B=chosen.B,
        mu=chosen.mu,
        K_hat=chosen.A.shape[1],
        tau_tilde=chosen.tau_tilde,
        tau=chosen.tau,
        trace=trace,
        iterations=len(trace),
        converged=converged,
        log_posterior=chosen.log_posterior,
    )


def fit_ladder(
    Y,
    hp: Hyperparams,
    init: FactorPair | None = None,
    tau_tilde: np.ndarray | None = None,
    tau: np.ndarray | None = None,
) -> FitResult:
    """Fit along the increasing spike-scale ladder with warm starts.

    Rung ``r`` sets both spike scales to ``hp.lambda0_ladder[r]`` and
    starts from the previous rung's solution (the first rung uses ``init``
    or an SVD start). Returns the final rung's result carrying the
    concatenated trace and all per-rung results in ``rungs``.
    """
    Yv = _values(Y)
    if init is None:
        init, tau_tilde, tau = init_svd(Yv, hp.K_star, scale="sqrt")
    results: list[FitResult] = []
    trace: list[IterationRecord] = []
    cur_init, tt, ta = init, tau_tilde, tau
    for r, lam0 in enumerate(hp.lambda0_ladder):
        res = fit(Yv, hp.with_lambda0(lam0), cur_init, tt, ta, rung=r)
        results.append(res)
        trace.extend(res.trace)
        cur_init = FactorPair(res.A.copy(), res.B.copy(), res.mu.copy())
        tt, ta = res.tau_tilde.copy(), res.tau.copy()
    final = results[-1]
    return replace(final, trace=trace, iterations=len(trace), rungs=results)
