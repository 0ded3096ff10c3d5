# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner-loop kernels.

Fused single-pass versions of the logistic residual and the adaptive
thresholded update. Semantics (clipping constant, branch structure,
zero-vs-nonzero decisions) mirror ``_python.py``; only summation order may
differ at the last ulp.
"""

from libc.math cimport exp, log, log1p, fabs

import numpy as np

DEF PROB_EPS = 1e-12


def sigmoid_residual(double[:, ::1] M, double[:, ::1] Y):
    """Return ``(W - Y, loglik)`` with W the clipped logistic of M."""
    cdef Py_ssize_t I = M.shape[0]
    cdef Py_ssize_t J = M.shape[1]
    cdef Py_ssize_t i, j
    out = np.empty((I, J), dtype=np.float64)
    cdef double[:, ::1] R = out
    cdef double acc = 0.0
    cdef double m, y, e, w, sp
    for i in range(I):
        for j in range(J):
            m = M[i, j]
            y = Y[i, j]
            if m >= 0.0:
                e = exp(-m)
                w = 1.0 / (1.0 + e)
                sp = m + log1p(e)
            else:
                e = exp(m)
                w = e / (1.0 + e)
                sp = log1p(e)
            acc += y * m - sp
            if w < PROB_EPS:
                w = PROB_EPS
            elif w > 1.0 - PROB_EPS:
                w = 1.0 - PROB_EPS
            R[i, j] = w - y
    return out, acc


def adaptive_prox(double[:, ::1] Z, double[:, ::1] X_prev, double[::1] tau,
                  double xi0, double xi1, double eta, double[::1] delta):
    """Entrywise thresholded update with per-column adaptive weights."""
    cdef Py_ssize_t I = Z.shape[0]
    cdef Py_ssize_t K = Z.shape[1]
    cdef Py_ssize_t i, k
    out = np.zeros((I, K), dtype=np.float64)
    cdef double[:, ::1] O = out
    cdef double dxi = xi0 - xi1
    cdef double th, dk, log_c, log_r, p, lam, z, az, mag
    cdef bint boundary
    for k in range(K):
        th = tau[k]
        dk = delta[k]
        boundary = th <= 0.0 or th >= 1.0
        if not boundary:
            log_c = log((1.0 - th) * xi0) - log(th * xi1)
        for i in range(I):
            if boundary:
                lam = xi0 if th <= 0.0 else xi1
            else:
                log_r = log_c - dxi * fabs(X_prev[i, k])
                if log_r > 700.0:
                    p = 0.0
                elif log_r < -700.0:
                    p = 1.0
                else:
                    p = 1.0 / (1.0 + exp(log_r))
                lam = xi1 * p + xi0 * (1.0 - p)
            z = Z[i, k]
            az = fabs(z)
            if az > dk:
                mag = az - eta * lam
                if mag > 0.0:
                    O[i, k] = mag if z > 0.0 else -mag
    return out
