"""Gaussian quasi-likelihood contrast for discretely observed diffusions.

H_n(theta) = sum_i H_i(theta) with
H_i = 0.5 * [ log det Sigma(beta, X_{i-1})
              + (1/delta) * xbar_i' Xi(beta, X_{i-1}) xbar_i ],
xbar_i = X_i - X_{i-1} - delta * b(alpha, X_{i-1}).

The drift is evaluated at the left endpoint, consistent with the Euler
discretization generating the approximation.  Derivatives are central
finite differences so arbitrary coefficient callbacks are supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import ConfigurationError
from .models import KERNEL_MOU, Model, ParamVector, sigma_ops
from .sampling import Sample

DEFAULT_FD_STEP = 1e-6


@dataclass(frozen=True)
class RateMatrix:
    """Diagonal rate matrix: 1/(n*delta) for the p drift components,
    1/n for the q diffusion components."""

    p: int
    q: int
    n: int
    delta_n: float

    @property
    def drift_rate(self) -> float:
        return 1.0 / (self.n * self.delta_n)

    @property
    def diffusion_rate(self) -> float:
        return 1.0 / self.n

    def diagonal(self) -> np.ndarray:
        return np.concatenate([np.full(self.p, self.drift_rate),
                               np.full(self.q, self.diffusion_rate)])

    def sqrt_diagonal(self) -> np.ndarray:
        return np.sqrt(self.diagonal())

    def inv_sqrt_diagonal(self) -> np.ndarray:
        return 1.0 / self.sqrt_diagonal()


@dataclass(frozen=True)
class ContrastValue:
    total: float
    per_term: np.ndarray


@dataclass(frozen=True)
class ScoreMatrix:
    """Lambda_n = sum_i g_i g_i' of per-term contrast gradients, plus the
    rate-normalized information estimate."""

    lambda_n: np.ndarray
    rate: RateMatrix
    normalized: np.ndarray  # phi(n)^{1/2} Lambda_n phi(n)^{1/2}


def contrast_terms(model: Model, sample: Sample, theta: ParamVector) -> np.ndarray:
    """Per-observation terms H_i as an (n,) array."""
    model.check_bounds(theta)
    delta = sample.scheme.delta_n
    kid = model.kernel_id
    obs = sample.observations
    if kid is not None and kid != KERNEL_MOU:
        return kernels.contrast_terms_1d(kid, np.ascontiguousarray(obs[:, 0]), delta,
                                         theta.alpha[0], theta.alpha[1], theta.beta[0])
    if kid == KERNEL_MOU:
        return kernels.contrast_terms_mou(np.ascontiguousarray(obs), delta,
                                          theta.alpha[0], theta.alpha[1],
                                          theta.beta[0], theta.beta[1])
    return _contrast_terms_generic(model, sample, theta)


def _contrast_terms_generic(model, sample, theta):
    delta = sample.scheme.delta_n
    obs = sample.observations
    n = sample.n
    terms = np.empty(n)
    for i in range(n):
        xl = obs[i]
        so = sigma_ops(model, theta.beta, xl)
        b = np.asarray(model.drift(theta.alpha, xl), dtype=float)
        xbar = obs[i + 1] - xl - delta * b
        terms[i] = 0.5 * (so.log_det + float(xbar @ so.xi_mat @ xbar) / delta)
    return terms


def contrast(model: Model, sample: Sample, theta: ParamVector) -> ContrastValue:
    terms = contrast_terms(model, sample, theta)
    return ContrastValue(total=math.fsum(terms), per_term=terms)


def make_contrast_fn(model: Model, sample: Sample):
    """Fast closure theta_vector -> H_n total, for the optimizer hot loop."""
    delta = sample.scheme.delta_n
    kid = model.kernel_id
    if kid is not None and kid != KERNEL_MOU:
        x = np.ascontiguousarray(sample.observations[:, 0])

        def fn(th):
            return kernels.contrast_total_1d(kid, x, delta, th[0], th[1], th[2])

        return fn
    if kid == KERNEL_MOU:
        x2 = np.ascontiguousarray(sample.observations)

        def fn(th):
            return kernels.contrast_total_mou(x2, delta, th[0], th[1], th[2], th[3])

        return fn
    p, q = model.p, model.q

    def fn(th):
        return contrast(model, sample, ParamVector.from_theta(th, p, q)).total

    return fn


def _fd_steps(model: Model, theta: ParamVector, step: float) -> np.ndarray:
    """Componentwise central-difference steps, shrunk once if a perturbed
    point would leave the parameter bounds."""
    th = theta.theta
    h = step * np.maximum(1.0, np.abs(th))
    for k in range(th.size):
        if th[k] + h[k] > model.upper[k] or th[k] - h[k] < model.lower[k]:
            h[k] *= 0.1
            if th[k] + h[k] > model.upper[k] or th[k] - h[k] < model.lower[k]:
                raise ConfigurationError(
                    f"theta component {k} too close to its bound for finite differences")
    return h


def contrast_gradient(model: Model, sample: Sample, theta: ParamVector,
                      step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central finite-difference gradient of H_n."""
    th = theta.theta
    h = _fd_steps(model, theta, step)
    p, q = theta.p, theta.q
    grad = np.empty(th.size)
    for k in range(th.size):
        up = th.copy()
        dn = th.copy()
        up[k] += h[k]
        dn[k] -= h[k]
        fu = contrast(model, sample, ParamVector.from_theta(up, p, q)).total
        fd = contrast(model, sample, ParamVector.from_theta(dn, p, q)).total
        grad[k] = (fu - fd) / (2.0 * h[k])
    return grad


def per_term_gradients(model: Model, sample: Sample, theta: ParamVector,
                       step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central finite-difference gradients of each H_i; shape (n, p+q)."""
    th = theta.theta
    h = _fd_steps(model, theta, step)
    p, q = theta.p, theta.q
    out = np.empty((sample.n, th.size))
    for k in range(th.size):
        up = th.copy()
        dn = th.copy()
        up[k] += h[k]
        dn[k] -= h[k]
        tu = contrast_terms(model, sample, ParamVector.from_theta(up, p, q))
        td = contrast_terms(model, sample, ParamVector.from_theta(dn, p, q))
        out[:, k] = (tu - td) / (2.0 * h[k])
    return out


def score_matrix(model: Model, sample: Sample, theta: ParamVector,
                 step: float = DEFAULT_FD_STEP) -> ScoreMatrix:
    """Outer-product score matrix Lambda_n and its rate-normalized form."""
    g = per_term_gradients(model, sample, theta, step)
    lam = g.T @ g
    lam = 0.5 * (lam + lam.T)  # enforce exact symmetry of the accumulation
    rate = RateMatrix(p=theta.p, q=theta.q, n=sample.n, delta_n=sample.scheme.delta_n)
    s = rate.sqrt_diagonal()
    return ScoreMatrix(lambda_n=lam, rate=rate, normalized=lam * np.outer(s, s))
