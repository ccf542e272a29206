# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Euler-Maruyama paths and contrast terms for the
builtin models.  Semantics match difftest._kernels_py.

Model kinds: 0=OU (constant sigma), 1=GBM (sigma*x), 2=CIR (sigma*sqrt(max(x,0))).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, log, sqrt

from .errors import NumericDomainError, SimulationBlowupError

cnp.import_array()

cdef double BLOWUP_LIMIT = 1e8

BACKEND = "compiled"


cdef inline double _step_1d(int kind, double a0, double a1, double b0,
                            double x, double delta, double sqdt, double zval) nogil:
    cdef double dif
    if kind == 0:
        dif = b0
    elif kind == 1:
        dif = b0 * x
    else:
        dif = b0 * sqrt(x) if x > 0.0 else 0.0
    return x + (a0 - a1 * x) * delta + dif * sqdt * zval


def euler_path_1d(int kind, double a0, double a1, double b0, double x0,
                  int n, int m_sub, double delta, double[::1] z, int skip=0):
    """Euler path of a 1-d builtin model, recording every m_sub-th substate."""
    cdef double sqdt = sqrt(delta)
    cdef double x = x0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] obs = np.empty(n + 1)
    cdef double[::1] ov = obs
    cdef Py_ssize_t zi = 0
    cdef Py_ssize_t i, j
    for i in range(skip):
        x = _step_1d(kind, a0, a1, b0, x, delta, sqdt, z[zi])
        zi += 1
        if not isfinite(x) or fabs(x) > BLOWUP_LIMIT:
            raise SimulationBlowupError(zi)
    ov[0] = x
    for i in range(1, n + 1):
        for j in range(m_sub):
            x = _step_1d(kind, a0, a1, b0, x, delta, sqdt, z[zi])
            zi += 1
        if not isfinite(x) or fabs(x) > BLOWUP_LIMIT:
            raise SimulationBlowupError(zi)
        ov[i] = x
    return obs


def euler_path_mou(double mu1, double mu2, double s1, double s2,
                   double x01, double x02, int n, int m_sub, double delta,
                   double[:, ::1] z, int skip=0):
    """Euler path of the two-component OU model; z has shape (substeps, 2)."""
    cdef double sqdt = sqrt(delta)
    cdef double x1 = x01
    cdef double x2 = x02
    cdef cnp.ndarray[cnp.float64_t, ndim=2] obs = np.empty((n + 1, 2))
    cdef double[:, ::1] ov = obs
    cdef Py_ssize_t zi = 0
    cdef Py_ssize_t i, j
    for i in range(skip):
        x1 = x1 + (2.0 - mu1 * x1) * delta + s1 * sqdt * z[zi, 0]
        x2 = x2 + (2.0 - mu2 * x2) * delta + s2 * sqdt * z[zi, 1]
        zi += 1
        if not isfinite(x1) or fabs(x1) > BLOWUP_LIMIT or not isfinite(x2) or fabs(x2) > BLOWUP_LIMIT:
            raise SimulationBlowupError(zi)
    ov[0, 0] = x1
    ov[0, 1] = x2
    for i in range(1, n + 1):
        for j in range(m_sub):
            x1 = x1 + (2.0 - mu1 * x1) * delta + s1 * sqdt * z[zi, 0]
            x2 = x2 + (2.0 - mu2 * x2) * delta + s2 * sqdt * z[zi, 1]
            zi += 1
        if not isfinite(x1) or fabs(x1) > BLOWUP_LIMIT or not isfinite(x2) or fabs(x2) > BLOWUP_LIMIT:
            raise SimulationBlowupError(zi)
        ov[i, 0] = x1
        ov[i, 1] = x2
    return obs


cdef inline double _sigma_1d(int kind, double b0, double xl) nogil:
    if kind == 0:
        return b0 * b0
    if kind == 1:
        return (b0 * xl) * (b0 * xl)
    return b0 * b0 * xl if xl > 0.0 else 0.0


def contrast_terms_1d(int kind, double[::1] x, double delta,
                      double a0, double a1, double b0):
    """Per-observation contrast terms H_i for a 1-d builtin model."""
    cdef Py_ssize_t n = x.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] terms = np.empty(n)
    cdef double[::1] tv = terms
    cdef Py_ssize_t i
    cdef double xl, sig, xbar
    for i in range(n):
        xl = x[i]
        sig = _sigma_1d(kind, b0, xl)
        if sig <= 0.0:
            raise NumericDomainError("Sigma vanished along the path")
        xbar = x[i + 1] - xl - delta * (a0 - a1 * xl)
        tv[i] = 0.5 * (log(sig) + xbar * xbar / (delta * sig))
    return terms


def contrast_total_1d(int kind, double[::1] x, double delta,
                      double a0, double a1, double b0):
    """Kahan-summed total contrast H_n for a 1-d builtin model."""
    cdef Py_ssize_t n = x.shape[0] - 1
    cdef Py_ssize_t i
    cdef double xl, sig, xbar, term
    cdef double total = 0.0, comp = 0.0, y, t
    for i in range(n):
        xl = x[i]
        sig = _sigma_1d(kind, b0, xl)
        if sig <= 0.0:
            raise NumericDomainError("Sigma vanished along the path")
        xbar = x[i + 1] - xl - delta * (a0 - a1 * xl)
        term = 0.5 * (log(sig) + xbar * xbar / (delta * sig))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def contrast_terms_mou(double[:, ::1] x, double delta,
                       double mu1, double mu2, double s1, double s2):
    """Per-observation contrast terms for the two-component OU model."""
    cdef Py_ssize_t n = x.shape[0] - 1
    if s1 <= 0.0 or s2 <= 0.0:
        raise NumericDomainError("diffusion parameters must be positive")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] terms = np.empty(n)
    cdef double[::1] tv = terms
    cdef double v1 = s1 * s1
    cdef double v2 = s2 * s2
    cdef double ld = log(v1) + log(v2)
    cdef Py_ssize_t i
    cdef double xb1, xb2
    for i in range(n):
        xb1 = x[i + 1, 0] - x[i, 0] - delta * (2.0 - mu1 * x[i, 0])
        xb2 = x[i + 1, 1] - x[i, 1] - delta * (2.0 - mu2 * x[i, 1])
        tv[i] = 0.5 * (ld + (xb1 * xb1 / v1 + xb2 * xb2 / v2) / delta)
    return terms


def contrast_total_mou(double[:, ::1] x, double delta,
                       double mu1, double mu2, double s1, double s2):
    """Kahan-summed total contrast H_n for the two-component OU model."""
    cdef Py_ssize_t n = x.shape[0] - 1
    if s1 <= 0.0 or s2 <= 0.0:
        raise NumericDomainError("diffusion parameters must be positive")
    cdef double v1 = s1 * s1
    cdef double v2 = s2 * s2
    cdef double ld = log(v1) + log(v2)
    cdef Py_ssize_t i
    cdef double xb1, xb2, term
    cdef double total = 0.0, comp = 0.0, y, t
    for i in range(n):
        xb1 = x[i + 1, 0] - x[i, 0] - delta * (2.0 - mu1 * x[i, 0])
        xb2 = x[i + 1, 1] - x[i, 1] - delta * (2.0 - mu2 * x[i, 1])
        term = 0.5 * (ld + (xb1 * xb1 / v1 + xb2 * xb2 / v2) / delta)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total
