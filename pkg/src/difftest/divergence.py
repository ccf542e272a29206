"""The phi test family and the divergence-type statistics built from it.

Family members are convex phi on (0, inf) with phi(1) = phi'(1) = 0:
  akl           1 - x + x log x                  (phi''(1) = 1)
  power:<lam>   (x^(lam+1) - x - lam(x-1)) / (lam(lam+1)),  lam not in {-1, 0}
  bs            ((x-1)/(x+1))^2                  (phi''(1) = 1/2 as published;
                use bs2 for the 2x-rescaled member with phi''(1) = 1 --
                rejection decisions under empirical thresholds are invariant
                to the factor)
  log           log x; not a family member, defines the generalized
                quasi-likelihood ratio statistic.

The per-observation likelihood ratio is r_i = exp(l_i(theta) - l_i(theta0))
with l_i = -H_i, so the estimated statistics are nonnegative and the
ratio statistic equals 2[H_n(theta0) - H_n(theta_hat)] >= 0 at the
minimizer.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .errors import ConfigurationError, NumericDomainError
from .models import Model, ParamVector, sigma_ops
from .quasilik import contrast_terms
from .sampling import Sample, SamplingScheme, simulate

EXP_CLAMP = 700.0  # exponent clamp for ratio computation in the log domain


@dataclass(frozen=True)
class PhiFunction:
    """One member of the test family: value and first two derivatives on x > 0."""

    name: str
    kind: str                  # akl | power | bs | log
    lam: float | None = None
    scale: float = 1.0         # bs2 uses scale 2
    is_member: bool = True     # log is flagged non-member

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        x = self._check(x)
        if self.kind == "akl":
            v = 1.0 - x + x * np.log(x)
        elif self.kind == "bs":
            v = ((x - 1.0) / (x + 1.0)) ** 2
        elif self.kind == "log":
            v = np.log(x)
        else:
            v = self._power_eval(x)
        return self.scale * v

    def d1(self, x):
        x = self._check(x)
        if self.kind == "akl":
            v = np.log(x)
        elif self.kind == "bs":
            v = 4.0 * (x - 1.0) / (x + 1.0) ** 3
        elif self.kind == "log":
            v = 1.0 / x
        else:
            v = (self._pow(x, self.lam) - 1.0) / self.lam
        return self.scale * v

    def d2(self, x):
        x = self._check(x)
        if self.kind == "akl":
            v = 1.0 / x
        elif self.kind == "bs":
            v = (16.0 - 8.0 * x) / (x + 1.0) ** 4
        elif self.kind == "log":
            v = -1.0 / x**2
        else:
            v = self._pow(x, self.lam - 1.0)
        return self.scale * v

    @staticmethod
    def _check(x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0.0):
            raise NumericDomainError("phi functions are defined on x > 0")
        return x if x.ndim else float(x)

    @staticmethod
    def _pow(x, expo):
        # log-domain power guarded against overflow; saturates to +inf
        with np.errstate(over="ignore"):
            t = expo * np.log(x)
            return np.where(t > EXP_CLAMP, np.inf, np.exp(np.minimum(t, EXP_CLAMP)))

    def _power_eval(self, x):
        lam = self.lam
        xp = self._pow(x, lam + 1.0)
        return (xp - x - lam * (x - 1.0)) / (lam * (lam + 1.0))


def make_phi(name: str) -> PhiFunction:
    """Parse a phi selector: akl, bs, bs2, log, power:<lambda>."""
    key = name.strip().lower()
    if key == "akl":
        return PhiFunction(name="akl", kind="akl")
    if key == "bs":
        return PhiFunction(name="bs", kind="bs")
    if key == "bs2":
        return PhiFunction(name="bs2", kind="bs", scale=2.0)
    if key in ("log", "gqlrt"):
        return PhiFunction(name="log", kind="log", is_member=False)
    if key.startswith("power:"):
        try:
            lam = float(key.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigurationError(f"bad power lambda in {name!r}") from exc
        if lam in (-1.0, 0.0):
            raise ConfigurationError("power lambda must not be -1 or 0")
        return PhiFunction(name=f"power:{lam:g}", kind="power", lam=lam)
    raise ConfigurationError(f"unknown phi {name!r}")


DEFAULT_PHIS = ("akl", "log", "bs", "power:-20", "power:-10", "power:-3")


def phi_eval(phi: PhiFunction, x) -> float:
    return phi.eval(x)


@dataclass(frozen=True)
class DivergenceValue:
    value: float
    saturated: bool  # some log-ratio hit the exponent clamp


@dataclass(frozen=True)
class TestStatistic:
    value: float
    df: int
    phi_name: str
    theta_hat: ParamVector
    theta0: ParamVector
    saturated: bool = False

    def rejects(self, threshold: float) -> bool:
        return self.value > threshold


def _log_ratios(model, sample, theta, theta0):
    h_theta = contrast_terms(model, sample, theta)
    h_theta0 = contrast_terms(model, sample, theta0)
    return h_theta0 - h_theta


def d_phi_n(model: Model, sample: Sample, theta: ParamVector,
            theta0: ParamVector, phi: PhiFunction) -> DivergenceValue:
    """(1/n) sum_i phi(r_i), ratios computed in the log domain with the
    exponent clamped to +-700 (saturation is flagged, never silent)."""
    logr = _log_ratios(model, sample, theta, theta0)
    if phi.kind == "log":
        return DivergenceValue(value=math.fsum(logr) / sample.n, saturated=False)
    saturated = bool(np.any(np.abs(logr) > EXP_CLAMP))
    r = np.exp(np.clip(logr, -EXP_CLAMP, EXP_CLAMP))
    vals = phi.eval(r)
    return DivergenceValue(value=math.fsum(np.atleast_1d(vals)) / sample.n,
                           saturated=saturated)


def t_statistic(model: Model, sample: Sample, theta_hat: ParamVector,
                theta0: ParamVector, phi: PhiFunction) -> TestStatistic:
    """T = 2n * D_phi,n(theta_hat, theta0); chi-squared with p+q degrees of
    freedom in the large-sample limit under the null."""
    d = d_phi_n(model, sample, theta_hat, theta0, phi)
    return TestStatistic(value=2.0 * sample.n * d.value, df=theta0.p + theta0.q,
                         phi_name=phi.name, theta_hat=theta_hat, theta0=theta0,
                         saturated=d.saturated)


def gqlrt(model: Model, sample: Sample, theta_hat: ParamVector,
          theta0: ParamVector) -> TestStatistic:
    """Generalized quasi-likelihood ratio statistic
    S = 2[H_n(theta0) - H_n(theta_hat)], identical to the log-kind T."""
    stat = t_statistic(model, sample, theta_hat, theta0, make_phi("log"))
    if stat.value < -1e-6 * sample.n:
        warnings.warn(
            f"S_n = {stat.value:.6g} < 0: theta_hat does not minimize the contrast",
            RuntimeWarning, stacklevel=2)
    return stat


def all_statistics(model, sample, theta_hat, theta0, phis) -> list[TestStatistic]:
    """All statistics on one sample, sharing the two contrast evaluations."""
    logr = _log_ratios(model, sample, theta_hat, theta0)
    n = sample.n
    df = theta0.p + theta0.q
    out = []
    for phi in phis:
        if phi.kind == "log":
            val = 2.0 * math.fsum(logr)
            sat = False
        else:
            sat = bool(np.any(np.abs(logr) > EXP_CLAMP))
            r = np.exp(np.clip(logr, -EXP_CLAMP, EXP_CLAMP))
            val = 2.0 * math.fsum(np.atleast_1d(phi.eval(r)))
        out.append(TestStatistic(value=val, df=df, phi_name=phi.name,
                                 theta_hat=theta_hat, theta0=theta0, saturated=sat))
    return out


def u_phi_limit(model: Model, theta: ParamVector, theta0: ParamVector,
                phi: PhiFunction, stationary_draws: int = 10_000, seed: int = 0,
                match_ratio_convention: bool = False) -> float:
    """Large-sample limit functional of D_phi,n, evaluated by averaging the
    limit integrand over approximately stationary states (long-path
    subsampling under theta0).

    Default: the integrand in the determinant-ratio direction
    det Sigma(beta) / det Sigma(beta0), i.e.
      phi(s) + (1/2) phi'(s) s (tr(Xi(beta) Sigma(beta0)) - d),
    s = (det Sigma(beta)/det Sigma(beta0))^(1/2).

    With match_ratio_convention=True the integrand is re-derived for the
    ratio orientation actually used by d_phi_n (l = -H), which flips the
    determinant ratio and negates the trace term; for the log kind this
    variant is the exact limit of d_phi_n.
    """
    if stationary_draws < 10_000:
        raise ConfigurationError("stationary_draws must be at least 10^4")
    states = _stationary_states(model, theta0, stationary_draws, seed)
    vals = np.empty(len(states))
    d = model.state_dim
    for i, x in enumerate(states):
        so = sigma_ops(model, theta.beta, x)
        so0 = sigma_ops(model, theta0.beta, x)
        log_s = 0.5 * (so.log_det - so0.log_det)
        trace_term = float(np.trace(so.xi_mat @ so0.sigma_mat)) - d
        if match_ratio_convention:
            s = math.exp(-log_s)
            vals[i] = phi.eval(s) + 0.5 * phi.d1(s) * s * (-trace_term)
        else:
            s = math.exp(log_s)
            vals[i] = phi.eval(s) + 0.5 * phi.d1(s) * s * trace_term
    return math.fsum(vals) / len(vals)


def _stationary_states(model, theta0, draws, seed):
    # long ergodic path at a coarse step, first 10% discarded as burn-in
    burn = max(draws // 10, 10)
    scheme = SamplingScheme(n=draws + burn, delta_n=0.1, substeps=10)
    sample = simulate(model, theta0, model.x0, scheme,
                      _rng.derive_seed(seed, _rng.STREAM_STATIONARY))
    return sample.observations[burn + 1:]
