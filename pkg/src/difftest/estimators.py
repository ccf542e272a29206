"""Quasi-maximum-likelihood estimation: theta_hat = argmin H_n.

Derivative-free Nelder-Mead simplex in a transformed space where
positivity-bounded coordinates are mapped through log, so the optimizer
never leaves the parameter bounds.  Fully deterministic given its inputs
(fixed initial simplex construction, no randomness).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .models import Model, ParamVector
from .quasilik import RateMatrix, make_contrast_fn
from .sampling import Sample, SamplingScheme

SIMPLEX_EDGE = 0.05          # initial edge as fraction of max(1, |theta_k|)
DIAMETER_TOL = 1e-8          # relative simplex diameter for convergence
SPREAD_TOL = 1e-10           # contrast spread for convergence
MAX_EVALS_PER_DIM = 2000
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerOptions:
    max_evals: int | None = None
    diameter_tol: float = DIAMETER_TOL
    spread_tol: float = SPREAD_TOL
    polish: bool = True


@dataclass(frozen=True)
class Estimate:
    theta_hat: ParamVector
    contrast_at_min: float
    iterations: int
    n_evals: int
    converged: bool


class _BoundTransform:
    """Coordinate transform mapping the feasible box onto R^k.

    Identity for unbounded coordinates, y = log(x - lo) for coordinates
    bounded below (the only bounded case the shipped models use).
    """

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if np.any(np.isfinite(self.upper)):
            raise ConfigurationError("finite upper parameter bounds are not supported")
        self.bounded = np.isfinite(self.lower)

    def to_y(self, x):
        y = np.array(x, dtype=float)
        b = self.bounded
        y[b] = np.log(y[b] - self.lower[b])
        return y

    def to_x(self, y):
        x = np.array(y, dtype=float)
        b = self.bounded
        x[b] = self.lower[b] + np.exp(x[b])
        return x

    def edge(self, x, dx):
        """Per-coordinate y-step producing an x-displacement of about dx."""
        e = np.array(dx, dtype=float)
        b = self.bounded
        gap = x[b] - self.lower[b]
        e[b] = np.log1p(dx[b] / gap)
        return e


def qmle(model: Model, sample: Sample, init: ParamVector,
         opts: OptimizerOptions | None = None) -> Estimate:
    """Minimize H_n by Nelder-Mead with a coordinate-wise golden-section
    polish pass.  Non-convergence is reported, not raised."""
    opts = opts or OptimizerOptions()
    model.check_bounds(init)
    dim = model.p + model.q
    max_evals = opts.max_evals or MAX_EVALS_PER_DIM * dim
    contrast_fn = make_contrast_fn(model, sample)
    trans = _BoundTransform(model.lower, model.upper)

    evals = 0

    def f(y):
        nonlocal evals
        evals += 1
        return contrast_fn(trans.to_x(y))

    x_init = init.theta
    y0 = trans.to_y(x_init)
    edges = trans.edge(x_init, SIMPLEX_EDGE * np.maximum(1.0, np.abs(x_init)))

    verts = [y0.copy()]
    for k in range(dim):
        v = y0.copy()
        v[k] += edges[k]
        verts.append(v)
    fvals = [f(v) for v in verts]

    iterations = 0
    converged = False
    while evals < max_evals:
        order = np.argsort(fvals, kind="stable")
        verts = [verts[i] for i in order]
        fvals = [fvals[i] for i in order]
        best = verts[0]
        diameter = max(np.max(np.abs(v - best)) for v in verts[1:])
        if diameter <= opts.diameter_tol * (1.0 + np.max(np.abs(best))):
            converged = True
            break
        if fvals[-1] - fvals[0] <= opts.spread_tol * (1.0 + abs(fvals[0])):
            converged = True
            break
        iterations += 1

        centroid = np.mean(verts[:-1], axis=0)
        worst = verts[-1]
        refl = centroid + (centroid - worst)
        f_refl = f(refl)
        if fvals[0] <= f_refl < fvals[-2]:
            verts[-1], fvals[-1] = refl, f_refl
        elif f_refl < fvals[0]:
            expd = centroid + 2.0 * (centroid - worst)
            f_expd = f(expd)
            if f_expd < f_refl:
                verts[-1], fvals[-1] = expd, f_expd
            else:
                verts[-1], fvals[-1] = refl, f_refl
        else:
            if f_refl < fvals[-1]:
                contr = centroid + 0.5 * (refl - centroid)
                f_contr = f(contr)
                accept = f_contr <= f_refl
            else:
                contr = centroid + 0.5 * (worst - centroid)
                f_contr = f(contr)
                accept = f_contr < fvals[-1]
            if accept:
                verts[-1], fvals[-1] = contr, f_contr
            else:
                for i in range(1, dim + 1):
                    verts[i] = verts[0] + 0.5 * (verts[i] - verts[0])
                    fvals[i] = f(verts[i])

    i_best = int(np.argmin(fvals))
    y_best = verts[i_best]
    f_best = fvals[i_best]

    if opts.polish:
        y_best, f_best = _golden_polish(f, y_best, f_best, np.abs(edges))

    theta_hat = ParamVector.from_theta(trans.to_x(y_best), model.p, model.q)
    return Estimate(theta_hat=theta_hat, contrast_at_min=f_best,
                    iterations=iterations, n_evals=evals, converged=converged)


def _golden_polish(f, y, fy, windows):
    """One coordinate-wise golden-section pass; keeps only improvements."""
    y = y.copy()
    for k in range(y.size):
        incumbent = y[k]
        w = max(windows[k], 1e-10)
        a = incumbent - w
        b = incumbent + w
        tol = 1e-10 * (1.0 + abs(incumbent))

        def fk(v, _k=k):
            y[_k] = v
            return f(y)

        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        fc, fd = fk(c), fk(d)
        while b - a > tol:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - GOLDEN * (b - a)
                fc = fk(c)
            else:
                a, c, fc = c, d, fd
                d = a + GOLDEN * (b - a)
                fd = fk(d)
        v = 0.5 * (a + b)
        fv = fk(v)
        if fv < fy:
            y[k], fy = v, fv
        else:
            y[k] = incumbent
    return y, fy


def standardize_error(estimate: Estimate, theta0: ParamVector,
                      scheme: SamplingScheme) -> np.ndarray:
    """phi(n)^{-1/2} (theta_hat - theta0): drift components scaled by
    sqrt(n*delta_n), diffusion components by sqrt(n)."""
    diff = estimate.theta_hat.theta - theta0.theta
    rate = RateMatrix(p=theta0.p, q=theta0.q, n=scheme.n, delta_n=scheme.delta_n)
    return diff * rate.inv_sqrt_diagonal()
