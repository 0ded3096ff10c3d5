"""Pure-NumPy implementations of the hot inner-loop kernels.

This module is the always-available fallback; semantics must match the
compiled versions in ``_native.pyx`` (same clipping constant, same
zero-vs-nonzero decisions). The adaptive prox is expressed through the
reference penalty functions so there is a single source of truth for the
shrinkage math.
"""

from __future__ import annotations

import numpy as np

from ..penalty import PenaltyParams, lambda_star, soft_threshold

PROB_EPS = 1e-12


def sigmoid_residual(M: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, float]:
    """Return ``(W - Y, loglik)`` for the logistic model at logits ``M``.

    ``W`` is the entrywise logistic of ``M`` clipped to
    ``[PROB_EPS, 1 - PROB_EPS]`` and ``loglik = sum(Y * M - softplus(M))``,
    both computed with the usual sign-split stable forms.
    """
    neg = M < 0.0
    e = np.exp(np.where(neg, M, -M))
    w = np.where(neg, e / (1.0 + e), 1.0 / (1.0 + e))
    softplus = np.log1p(e) + np.where(neg, 0.0, M)
    loglik = float(np.sum(Y * M) - np.sum(softplus))
    np.clip(w, PROB_EPS, 1.0 - PROB_EPS, out=w)
    return w - Y, loglik


def adaptive_prox(
    Z: np.ndarray,
    X_prev: np.ndarray,
    tau: np.ndarray,
    xi0: float,
    xi1: float,
    eta: float,
    delta: np.ndarray,
) -> np.ndarray:
    """Entrywise thresholded update of a factor matrix.

    ``Z`` is the gradient-step point, ``X_prev`` the previous iterate at
    which the adaptive weights are evaluated, ``tau`` the per-column
    inclusion probabilities and ``delta`` the per-column selection
    thresholds.
    """
    if Z.size == 0:
        return np.zeros_like(Z)
    pp = PenaltyParams(theta=np.asarray(tau, dtype=float), xi0=xi0, xi1=xi1, eta=eta)
    lam = lambda_star(X_prev, pp)
    return soft_threshold(Z, lam, np.asarray(delta, dtype=float), eta)
