"""Adaptive spike-and-slab lasso penalty machinery.

Each factor entry carries a two-component Laplace mixture prior: a sharp
"spike" with inverse scale ``xi0`` concentrated at zero and a diffuse
"slab" with inverse scale ``xi1`` (``xi0 >= xi1``). Integrating out the
mixture indicators yields a non-separable penalty whose local behaviour is
captured by three quantities:

* :func:`p_star` - posterior probability that an entry of a given
  magnitude came from the slab,
* :func:`lambda_star` - the resulting adaptive L1 weight, which
  interpolates between ``xi1`` (large entries, light shrinkage) and
  ``xi0`` (small entries, heavy shrinkage),
* :func:`threshold_upper` - the magnitude below which one proximal step
  maps an entry to exactly zero, combining soft and hard thresholding.

All functions broadcast: ``theta`` may be a vector of per-column inclusion
probabilities and ``x`` an entire factor matrix. Boundary values
``theta = 0`` (spike only) and ``theta = 1`` (slab only) are handled
without raising; ``g_check`` returns ``-inf`` in the spike-only case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

__all__ = [
    "PenaltyParams",
    "p_star",
    "lambda_star",
    "g_check",
    "threshold_upper",
    "soft_threshold",
    "column_penalty",
]


@dataclass(frozen=True)
class PenaltyParams:
    """Parameters of the Laplace-mixture penalty for one factor matrix.

    ``theta`` is the slab inclusion probability (scalar or per-column
    vector), ``xi0``/``xi1`` the spike/slab inverse scales and ``eta`` the
    proximal step size.
    """

    theta: float | np.ndarray
    xi0: float
    xi1: float
    eta: float

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if not np.all(np.isfinite(th)) or np.any(th < 0.0) or np.any(th > 1.0):
            raise ValueError("theta must lie in [0, 1]")
        if not (self.xi0 >= self.xi1 > 0.0):
            raise ValueError("require xi0 >= xi1 > 0")
        if not self.eta > 0.0:
            raise ValueError("eta must be positive")


def _maybe_scalar(out: np.ndarray) -> float | np.ndarray:
    return float(out) if np.ndim(out) == 0 else out


def p_star(x, pp: PenaltyParams):
    """Posterior slab probability of an entry with value ``x``.

    Computed through the log ratio of the two mixture densities, so the
    result is stable for arbitrarily large ``|x|`` and exact at the
    ``theta`` boundaries (0 maps to 0, 1 maps to 1).
    """
    ax = np.abs(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(ax)):
        raise ValueError("x must be finite")
    theta = np.asarray(pp.theta, dtype=float)
    with np.errstate(divide="ignore"):
        log_ratio = (
            np.log((1.0 - theta) * pp.xi0)
            - np.log(theta * pp.xi1)
            - (pp.xi0 - pp.xi1) * ax
        )
    return _maybe_scalar(expit(-log_ratio))


def lambda_star(x, pp: PenaltyParams):
    """Adaptive L1 weight; always in ``[xi1, xi0]`` and non-increasing in ``|x|``."""
    p = p_star(x, pp)
    return _maybe_scalar(pp.xi1 * p + pp.xi0 * (1.0 - p))


def g_check(x, pp: PenaltyParams, slab: float | None = None):
    """Case selector deciding which threshold formula applies at ``x``.

    Positive values select the hard-threshold branch of
    :func:`threshold_upper`. The squared term is referenced to this
    penalty's own slab scale by default; pass ``slab`` to reference a
    different one. With ``theta = 0`` the log term is ``log 0`` and the
    result is ``-inf``, which callers treat as "spike only".
    """
    s = pp.xi1 if slab is None else slab
    p = p_star(x, pp)
    with np.errstate(divide="ignore"):
        log_p = np.log(p)
    return _maybe_scalar((lambda_star(x, pp) - s) ** 2 + (2.0 / pp.eta) * log_p)


def threshold_upper(pp: PenaltyParams, slab: float | None = None):
    """Selection threshold: magnitudes at or below it are zeroed by the prox.

    Uses ``sqrt(2 * eta * log(1 / p_star(0))) + eta * slab`` when
    ``g_check(0) > 0`` and ``eta * lambda_star(0)`` otherwise. Both
    ``theta`` boundaries fall into the second branch, giving
    ``eta * xi1`` (slab only) and ``eta * xi0`` (spike only).
    """
    s = pp.xi1 if slab is None else slab
    p0 = p_star(0.0, pp)
    g0 = np.asarray(g_check(0.0, pp, slab=slab))
    with np.errstate(divide="ignore", invalid="ignore"):
        hard = np.sqrt(-2.0 * pp.eta * np.log(p0)) + pp.eta * s
    soft = pp.eta * np.asarray(lambda_star(0.0, pp))
    return _maybe_scalar(np.where(g0 > 0.0, hard, soft))


def soft_threshold(z, lam, delta, eta: float):
    """Generalized soft-thresholding: shrink by ``eta * lam``, kill below ``delta``.

    Returns ``(|z| - eta * lam)_+ * sign(z)`` where ``|z| > delta`` and an
    exact ``0.0`` elsewhere, so supports can be read off with ``!= 0``.
    """
    z = np.asarray(z, dtype=float)
    shrunk = np.maximum(np.abs(z) - eta * np.asarray(lam, dtype=float), 0.0)
    return _maybe_scalar(np.where(np.abs(z) > delta, shrunk * np.sign(z), 0.0))


def column_penalty(x, pp: PenaltyParams) -> float:
    """Separable penalty value ``-sum(lambda_star(x) * |x|)``, zero at the origin."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return 0.0
    return float(-np.sum(lambda_star(x, pp) * np.abs(x)))
