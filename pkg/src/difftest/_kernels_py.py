"""Pure-Python/numpy kernels: Euler-Maruyama paths and contrast terms.

Fallback used when the compiled extension is unavailable (or when
DIFFTEST_BACKEND=python).  Same call signatures and semantics as
difftest._kernels; path loops run in plain Python floats, contrast terms
are vectorized numpy.

Model kinds: 0=OU (constant sigma), 1=GBM (sigma*x), 2=CIR (sigma*sqrt(max(x,0))).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericDomainError, SimulationBlowupError

BLOWUP_LIMIT = 1e8

BACKEND = "python"


def euler_path_1d(kind, a0, a1, b0, x0, n, m_sub, delta, z, skip=0):
    """Euler path of a 1-d builtin model, recording every m_sub-th substate.

    z holds skip + n*m_sub standard normal draws; the first `skip` substeps
    are burn-in and are discarded.  Returns the (n+1,) observation array.
    """
    sqdt = math.sqrt(delta)
    x = float(x0)
    obs = np.empty(n + 1)
    zi = 0
    for _ in range(skip):
        x = _step_1d(kind, a0, a1, b0, x, delta, sqdt, float(z[zi]))
        zi += 1
        _guard(x, zi)
    obs[0] = x
    for i in range(1, n + 1):
        for _ in range(m_sub):
            x = _step_1d(kind, a0, a1, b0, x, delta, sqdt, float(z[zi]))
            zi += 1
        _guard(x, zi)
        obs[i] = x
    return obs


def _step_1d(kind, a0, a1, b0, x, delta, sqdt, zval):
    if kind == 0:
        dif = b0
    elif kind == 1:
        dif = b0 * x
    else:
        dif = b0 * math.sqrt(x) if x > 0.0 else 0.0
    return x + (a0 - a1 * x) * delta + dif * sqdt * zval


def _guard(x, step):
    if not math.isfinite(x) or abs(x) > BLOWUP_LIMIT:
        raise SimulationBlowupError(step)


def euler_path_mou(mu1, mu2, s1, s2, x01, x02, n, m_sub, delta, z, skip=0):
    """Euler path of the two-component OU model; z has shape (substeps, 2)."""
    sqdt = math.sqrt(delta)
    x1 = float(x01)
    x2 = float(x02)
    obs = np.empty((n + 1, 2))
    zi = 0
    for _ in range(skip):
        x1 += (2.0 - mu1 * x1) * delta + s1 * sqdt * float(z[zi, 0])
        x2 += (2.0 - mu2 * x2) * delta + s2 * sqdt * float(z[zi, 1])
        zi += 1
        _guard(x1, zi)
        _guard(x2, zi)
    obs[0, 0] = x1
    obs[0, 1] = x2
    for i in range(1, n + 1):
        for _ in range(m_sub):
            x1 += (2.0 - mu1 * x1) * delta + s1 * sqdt * float(z[zi, 0])
            x2 += (2.0 - mu2 * x2) * delta + s2 * sqdt * float(z[zi, 1])
            zi += 1
        _guard(x1, zi)
        _guard(x2, zi)
        obs[i, 0] = x1
        obs[i, 1] = x2
    return obs


def _sigma_1d(kind, b0, xl):
    if kind == 0:
        return np.full(xl.shape, b0 * b0)
    if kind == 1:
        return (b0 * xl) ** 2
    return b0 * b0 * np.maximum(xl, 0.0)


def contrast_terms_1d(kind, x, delta, a0, a1, b0):
    """Per-observation contrast terms H_i for a 1-d builtin model."""
    x = np.asarray(x)
    xl = x[:-1]
    sig = _sigma_1d(kind, b0, xl)
    if np.any(sig <= 0.0):
        raise NumericDomainError("Sigma vanished along the path")
    xbar = x[1:] - xl - delta * (a0 - a1 * xl)
    return 0.5 * (np.log(sig) + xbar * xbar / (delta * sig))


def contrast_total_1d(kind, x, delta, a0, a1, b0):
    return math.fsum(contrast_terms_1d(kind, x, delta, a0, a1, b0))


def contrast_terms_mou(x, delta, mu1, mu2, s1, s2):
    """Per-observation contrast terms for the two-component OU model."""
    x = np.asarray(x)
    if s1 <= 0.0 or s2 <= 0.0:
        raise NumericDomainError("diffusion parameters must be positive")
    x1l = x[:-1, 0]
    x2l = x[:-1, 1]
    xbar1 = x[1:, 0] - x1l - delta * (2.0 - mu1 * x1l)
    xbar2 = x[1:, 1] - x2l - delta * (2.0 - mu2 * x2l)
    v1 = s1 * s1
    v2 = s2 * s2
    quad = xbar1 * xbar1 / v1 + xbar2 * xbar2 / v2
    return 0.5 * (math.log(v1) + math.log(v2) + quad / delta)


def contrast_total_mou(x, delta, mu1, mu2, s1, s2):
    return math.fsum(contrast_terms_mou(x, delta, mu1, mu2, s1, s2))
