"""Parametric diffusion models dX = b(alpha, X) dt + sigma(beta, X) dW.

Ships the four benchmark models (OU, GBM, CIR, MOU) with their default
true parameters and starting states, and accepts user-defined models as
coefficient callbacks.  All objects are immutable after construction and
coefficient callbacks must be pure and re-entrant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericDomainError

BETA_LOWER = 1e-6  # positivity floor for diffusion parameters of the shipped models

# Kernel identifiers understood by the compiled/fallback backends.
KERNEL_OU = 0
KERNEL_GBM = 1
KERNEL_CIR = 2
KERNEL_MOU = 3

MODEL_IDS = {"OU": 0, "GBM": 1, "CIR": 2, "MOU": 3}


@dataclass(frozen=True)
class ParamVector:
    """Split parameter vector theta = (alpha, beta)."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, dtype=float)))
        object.__setattr__(self, "beta", np.atleast_1d(np.asarray(self.beta, dtype=float)))
        if self.alpha.size < 1 or self.beta.size < 1:
            raise ConfigurationError("alpha and beta must each have at least one component")

    @property
    def p(self) -> int:
        return self.alpha.size

    @property
    def q(self) -> int:
        return self.beta.size

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.beta])

    @staticmethod
    def from_theta(theta, p: int, q: int) -> "ParamVector":
        theta = np.asarray(theta, dtype=float)
        if theta.size != p + q:
            raise ConfigurationError(f"theta has length {theta.size}, expected p+q={p + q}")
        return ParamVector(theta[:p].copy(), theta[p:].copy())


@dataclass(frozen=True)
class Model:
    """Diffusion model with pure coefficient callbacks.

    drift(alpha, x) -> (d,) vector; diffusion(beta, x) -> (d, m) matrix.
    Sigma = sigma sigma' must be symmetric positive definite for all valid
    (beta, x); the shipped models satisfy this by construction, user models
    must document it.
    """

    name: str
    state_dim: int
    noise_dim: int
    p: int
    q: int
    drift: object
    diffusion: object
    lower: np.ndarray  # box bounds on theta = (alpha, beta)
    upper: np.ndarray
    theta0: ParamVector | None = None
    x0: np.ndarray | None = None
    kernel_id: int | None = None
    state_floor: float | None = field(default=None)  # e.g. 0.0 for CIR

    def in_bounds(self, params: ParamVector, margin: float = 0.0) -> bool:
        th = params.theta
        return bool(np.all(th >= self.lower + margin) and np.all(th <= self.upper - margin))

    def check_bounds(self, params: ParamVector):
        if params.p != self.p or params.q != self.q:
            raise ConfigurationError(
                f"parameter blocks ({params.p},{params.q}) do not match model ({self.p},{self.q})"
            )
        if not self.in_bounds(params):
            raise ConfigurationError(f"theta {params.theta} outside bounds of model {self.name}")


@dataclass(frozen=True)
class SigmaOps:
    """Sigma = sigma sigma', its inverse Xi and log-determinant at one (beta, x)."""

    sigma_mat: np.ndarray
    xi_mat: np.ndarray
    log_det: float


def sigma_ops(model: Model, beta, x) -> SigmaOps:
    """Compute Sigma, Xi = Sigma^{-1} and log det Sigma via Cholesky.

    Raises NumericDomainError when Sigma is not positive definite.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = np.atleast_2d(np.asarray(model.diffusion(beta, x), dtype=float))
    sig = s @ s.T
    d = sig.shape[0]
    if d == 1:
        v = float(sig[0, 0])
        if not (v > 0.0) or not np.isfinite(v):
            raise NumericDomainError(f"Sigma={v} not positive at beta={beta}, x={x}")
        return SigmaOps(sig, np.array([[1.0 / v]]), float(np.log(v)))
    try:
        chol = np.linalg.cholesky(sig)
    except np.linalg.LinAlgError as exc:
        raise NumericDomainError(f"Sigma not positive definite at beta={beta}, x={x}") from exc
    log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    if not np.isfinite(log_det):
        raise NumericDomainError(f"log det Sigma not finite at beta={beta}, x={x}")
    ident = np.eye(d)
    xi = np.linalg.solve(chol.T, np.linalg.solve(chol, ident))
    return SigmaOps(sig, xi, log_det)


def _linear_drift(alpha, x):
    # b(alpha, x) = alpha0 - alpha1 * x, componentwise not applicable (d=1)
    return np.array([alpha[0] - alpha[1] * x[0]])


def _const_diffusion(beta, x):
    return np.array([[beta[0]]])


def _gbm_diffusion(beta, x):
    return np.array([[beta[0] * x[0]]])


def _cir_diffusion(beta, x):
    # full truncation: sqrt(max(x, 0)) so transient negative Euler states stay finite
    return np.array([[beta[0] * np.sqrt(max(x[0], 0.0))]])


def _mou_drift(alpha, x):
    return np.array([2.0 - alpha[0] * x[0], 2.0 - alpha[1] * x[1]])


def _mou_diffusion(beta, x):
    return np.array([[beta[0], 0.0], [0.0, beta[1]]])


def make_builtin_model(name: str) -> Model:
    """Benchmark model by name (OU, GBM, CIR, MOU), with its experiment defaults.

    OU:  dX = (a - b X) dt + s dW,        theta0 = (0.5, 0.5, 0.25),  X0 = 1
    GBM: dX = (a - b X) dt + s X dW,      theta0 = (0.5, 0.5, 0.25),  X0 = 1
    CIR: dX = (a - b X) dt + s sqrt(X) dW, theta0 = (0.5, 0.5, 0.125), X0 = 1
    MOU: dX_k = (2 - m_k X_k) dt + s_k dW_k, theta0 = (1, 1, 0.3, 0.5), X0 = (1, 1)
    """
    key = name.strip().upper()
    if key not in MODEL_IDS:
        raise ConfigurationError(f"unknown model {name!r}; expected one of OU, GBM, CIR, MOU")
    inf = np.inf
    if key == "OU":
        return Model(
            name="OU", state_dim=1, noise_dim=1, p=2, q=1,
            drift=_linear_drift, diffusion=_const_diffusion,
            lower=np.array([-inf, -inf, BETA_LOWER]), upper=np.array([inf, inf, inf]),
            theta0=ParamVector([0.5, 0.5], [0.25]), x0=np.array([1.0]),
            kernel_id=KERNEL_OU,
        )
    if key == "GBM":
        return Model(
            name="GBM", state_dim=1, noise_dim=1, p=2, q=1,
            drift=_linear_drift, diffusion=_gbm_diffusion,
            lower=np.array([-inf, -inf, BETA_LOWER]), upper=np.array([inf, inf, inf]),
            theta0=ParamVector([0.5, 0.5], [0.25]), x0=np.array([1.0]),
            kernel_id=KERNEL_GBM,
        )
    if key == "CIR":
        return Model(
            name="CIR", state_dim=1, noise_dim=1, p=2, q=1,
            drift=_linear_drift, diffusion=_cir_diffusion,
            lower=np.array([-inf, -inf, BETA_LOWER]), upper=np.array([inf, inf, inf]),
            theta0=ParamVector([0.5, 0.5], [0.125]), x0=np.array([1.0]),
            kernel_id=KERNEL_CIR, state_floor=0.0,
        )
    return Model(
        name="MOU", state_dim=2, noise_dim=2, p=2, q=2,
        drift=_mou_drift, diffusion=_mou_diffusion,
        lower=np.array([-inf, -inf, BETA_LOWER, BETA_LOWER]),
        upper=np.array([inf, inf, inf, inf]),
        theta0=ParamVector([1.0, 1.0], [0.3, 0.5]), x0=np.array([1.0, 1.0]),
        kernel_id=KERNEL_MOU,
    )
