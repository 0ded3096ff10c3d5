"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the NumPy
fallback is used. ``BISSLB_BACKEND=python`` or ``=native`` forces a choice
(forcing ``native`` raises if the extension is missing). Call
:func:`set_backend` to switch at runtime, e.g. for benchmarking.
"""

from __future__ import annotations

import os

import numpy as np

from . import _python

_BACKENDS: dict[str, object] = {"python": _python}
try:
    from . import _native

    _BACKENDS["native"] = _native
    _DEFAULT = "native"
except ImportError:
    _DEFAULT = "python"

_requested = os.environ.get("BISSLB_BACKEND", "").strip().lower()
if _requested:
    if _requested not in ("python", "native"):
        raise ValueError(f"BISSLB_BACKEND must be 'python' or 'native', got {_requested!r}")
    if _requested not in _BACKENDS:
        raise ImportError("BISSLB_BACKEND=native requested but the compiled extension is unavailable")
    _DEFAULT = _requested

_impl = _BACKENDS[_DEFAULT]


def backend_name() -> str:
    """Name of the active backend, ``"native"`` or ``"python"``."""
    return "native" if _impl is _BACKENDS.get("native") else "python"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def set_backend(name: str) -> str:
    """Switch the active backend; returns the previous backend's name."""
    global _impl
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available_backends()}")
    previous = backend_name()
    _impl = _BACKENDS[name]
    return previous


def _c2(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)


def sigmoid_residual(M: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, float]:
    """Logistic residual ``W - Y`` and Bernoulli log-likelihood at logits ``M``."""
    return _impl.sigmoid_residual(_c2(M), _c2(Y))


def adaptive_prox(Z, X_prev, tau, xi0, xi1, eta, delta) -> np.ndarray:
    """Entrywise thresholded factor update (see backend modules)."""
    Z = _c2(Z)
    if Z.size == 0:
        return np.zeros_like(Z)
    return _impl.adaptive_prox(
        Z,
        _c2(X_prev),
        np.ascontiguousarray(tau, dtype=np.float64),
        float(xi0),
        float(xi1),
        float(eta),
        np.ascontiguousarray(delta, dtype=np.float64),
    )
