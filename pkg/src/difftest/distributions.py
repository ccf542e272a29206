"""Chi-squared and noncentral chi-squared distribution functions.

Self-contained implementations (regularized incomplete gamma via series /
continued fraction) so the limiting rejection thresholds and theoretical
power curves carry no dependency beyond the standard library and numpy.
"""

from __future__ import annotations

import math

from .errors import ConfigurationError, NumericError

_GAMMA_TOL = 1e-15
_MAX_ITER = 10_000
_TINY = 1e-300


def regularized_gamma_p(a: float, x: float) -> float:
    """P(a, x) = gamma(a, x) / Gamma(a), the regularized lower incomplete
    gamma function; series expansion for x < a + 1, Lentz continued
    fraction for the upper tail otherwise."""
    if a <= 0.0:
        raise ConfigurationError(f"gamma shape must be positive, got {a}")
    if x < 0.0:
        raise ConfigurationError(f"gamma argument must be nonnegative, got {x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_p_series(a, x)
    return 1.0 - _gamma_q_contfrac(a, x)


def _gamma_p_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_TOL:
            return total * math.exp(a * math.log(x) - x - math.lgamma(a))
    raise NumericError(f"incomplete gamma series failed to converge (a={a}, x={x})")


def _gamma_q_contfrac(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_TOL:
            return h * math.exp(a * math.log(x) - x - math.lgamma(a))
    raise NumericError(f"incomplete gamma continued fraction failed to converge (a={a}, x={x})")


def chisq_cdf(x: float, df: float) -> float:
    """Central chi-squared CDF with df degrees of freedom."""
    if df <= 0.0:
        raise ConfigurationError(f"degrees of freedom must be positive, got {df}")
    if x <= 0.0:
        return 0.0
    return regularized_gamma_p(0.5 * df, 0.5 * x)


def chisq_quantile(prob: float, df: float) -> float:
    """Inverse central chi-squared CDF; bracketed bisection followed by a
    Newton polish to about 1e-10 absolute accuracy."""
    if not 0.0 < prob < 1.0:
        raise ConfigurationError(f"probability must be in (0, 1), got {prob}")
    lo, hi = 0.0, max(4.0 * df, 10.0)
    while chisq_cdf(hi, df) < prob:
        hi *= 2.0
        if hi > 1e12:
            raise NumericError(f"chi-squared quantile bracket failed (p={prob}, df={df})")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chisq_cdf(mid, df) < prob:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-8 * (1.0 + hi):
            break
    x = 0.5 * (lo + hi)
    for _ in range(50):
        fx = chisq_cdf(x, df) - prob
        pdf = _chisq_pdf(x, df)
        if pdf <= 0.0:
            break
        step = fx / pdf
        x_new = x - step
        if x_new <= 0.0:
            x_new = 0.5 * x
        x = x_new
        if abs(step) < 1e-10 * (1.0 + x):
            break
    return x


def _chisq_pdf(x: float, df: float) -> float:
    if x <= 0.0:
        return 0.0
    k = 0.5 * df
    return math.exp((k - 1.0) * math.log(x) - 0.5 * x - k * math.log(2.0) - math.lgamma(k))


def noncentral_chisq_cdf(x: float, df: float, noncentrality: float) -> float:
    """Noncentral chi-squared CDF as a Poisson(mu/2) mixture of central
    chi-squared CDFs, summed outward from the modal mixture index until the
    untouched Poisson mass falls below 1e-14."""
    if df <= 0.0:
        raise ConfigurationError(f"degrees of freedom must be positive, got {df}")
    if noncentrality < 0.0:
        raise ConfigurationError(f"noncentrality must be nonnegative, got {noncentrality}")
    if x <= 0.0:
        return 0.0
    if noncentrality == 0.0:
        return chisq_cdf(x, df)
    half_mu = 0.5 * noncentrality
    j0 = int(half_mu)
    log_w0 = -half_mu + j0 * math.log(half_mu) - math.lgamma(j0 + 1.0)
    w_mid = math.exp(log_w0)

    total = w_mid * chisq_cdf(x, df + 2.0 * j0)
    mass = w_mid

    w = w_mid
    j = j0
    while j + 1 <= j0 + _MAX_ITER:
        j += 1
        w *= half_mu / j
        total += w * chisq_cdf(x, df + 2.0 * j)
        mass += w
        if w < 1e-14 and 1.0 - mass < 1e-14:
            break

    w = w_mid
    j = j0
    while j > 0:
        w *= j / half_mu
        j -= 1
        total += w * chisq_cdf(x, df + 2.0 * j)
        mass += w
        if w < 1e-14 and j < j0 - 5:
            break

    if 1.0 - mass > 1e-12:
        raise NumericError(
            f"noncentral chi-squared mixture left mass {1.0 - mass:.3e} unaccounted")
    return min(total, 1.0)


def theoretical_power(noncentrality: float, df: int, alpha: float = 0.05) -> float:
    """Limiting rejection probability of a chi-squared level-alpha test under
    a local alternative with the given noncentrality."""
    crit = chisq_quantile(1.0 - alpha, df)
    return 1.0 - noncentral_chisq_cdf(crit, df, noncentrality)
