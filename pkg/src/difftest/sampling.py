"""Discrete observation of diffusion paths by Euler-Maruyama simulation.

Paths are stepped at high frequency (substeps per observation step) and
resampled so that the recorded i-th observation equals the (i*M)-th
internal state exactly.  Identical (model, theta, x0, scheme, seed) input
yields a bit-identical sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .backend import kernels
from .errors import ConfigurationError, SimulationBlowupError
from .models import KERNEL_MOU, Model, ParamVector

DEFAULT_SUBSTEPS = 10


@dataclass(frozen=True)
class SamplingScheme:
    """n observed increments of size delta_n, simulated with `substeps` Euler
    steps per observation step.  The horizon T = n * delta_n is derived."""

    n: int
    delta_n: float
    substeps: int = DEFAULT_SUBSTEPS

    def __post_init__(self):
        if self.n < 1 or self.substeps < 1 or not self.delta_n > 0.0:
            raise ConfigurationError(f"invalid sampling scheme {self!r}")

    @property
    def horizon(self) -> float:
        return self.n * self.delta_n

    @property
    def sub_delta(self) -> float:
        return self.delta_n / self.substeps

    @classmethod
    def rapidly_increasing(cls, n: int, substeps: int = DEFAULT_SUBSTEPS) -> "SamplingScheme":
        """The experiment default T = n^(1/3), i.e. delta_n = n^(-2/3)."""
        return cls(n=n, delta_n=float(n) ** (-2.0 / 3.0), substeps=substeps)


@dataclass(frozen=True)
class Sample:
    """Discrete observation record {X_{t_i}}, shape (n+1, d)."""

    observations: np.ndarray
    scheme: SamplingScheme
    model_name: str
    seed: int

    @property
    def n(self) -> int:
        return self.observations.shape[0] - 1

    @property
    def state_dim(self) -> int:
        return self.observations.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.scheme.delta_n


def simulate(model: Model, theta: ParamVector, x0, scheme: SamplingScheme,
             seed: int, burn_in: int = 0) -> Sample:
    """Simulate a discretely observed Euler-Maruyama path.

    burn_in extra observation steps are simulated and discarded before the
    first recorded state (default 0: X_0 = x0 exactly).
    """
    model.check_bounds(theta)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size != model.state_dim:
        raise ConfigurationError(f"x0 has dimension {x0.size}, expected {model.state_dim}")
    gen = _rng.generator(seed)
    skip = burn_in * scheme.substeps
    total = skip + scheme.n * scheme.substeps
    delta = scheme.sub_delta
    kid = model.kernel_id
    if kid is not None and kid != KERNEL_MOU:
        z = gen.standard_normal(total)
        path = kernels.euler_path_1d(kid, theta.alpha[0], theta.alpha[1], theta.beta[0],
                                     x0[0], scheme.n, scheme.substeps, delta, z, skip)
        obs = path.reshape(-1, 1)
    elif kid == KERNEL_MOU:
        z = gen.standard_normal((total, 2))
        obs = kernels.euler_path_mou(theta.alpha[0], theta.alpha[1],
                                     theta.beta[0], theta.beta[1],
                                     x0[0], x0[1], scheme.n, scheme.substeps, delta, z, skip)
    else:
        obs = _euler_generic(model, theta, x0, scheme, gen, skip)
    return Sample(observations=obs, scheme=scheme, model_name=model.name, seed=int(seed))


def _euler_generic(model, theta, x0, scheme, gen, skip):
    # callback-driven path for user models; one normal draw block per substep
    delta = scheme.sub_delta
    sqdt = math.sqrt(delta)
    x = x0.copy()
    obs = np.empty((scheme.n + 1, model.state_dim))
    step = 0
    for _ in range(skip):
        z = gen.standard_normal(model.noise_dim)
        x = x + np.asarray(model.drift(theta.alpha, x)) * delta \
            + np.atleast_2d(model.diffusion(theta.beta, x)) @ z * sqdt
        step += 1
        _check_state(x, step)
    obs[0] = x
    for i in range(1, scheme.n + 1):
        for _ in range(scheme.substeps):
            z = gen.standard_normal(model.noise_dim)
            x = x + np.asarray(model.drift(theta.alpha, x)) * delta \
                + np.atleast_2d(model.diffusion(theta.beta, x)) @ z * sqdt
            step += 1
        _check_state(x, step)
        obs[i] = x
    return obs


def _check_state(x, step):
    if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > 1e8:
        raise SimulationBlowupError(step)


@dataclass(frozen=True)
class MomentReport:
    """Monte Carlo estimates of the conditional moments of one observation
    increment X_bar = X_delta - x - delta*b(alpha, x) from a fixed state x."""

    delta_n: float
    reps: int
    mean_increment: np.ndarray          # E X_bar
    second_moment: np.ndarray           # E X_bar X_bar'
    fourth_moment: float | None         # E X_bar^4 (d=1 only)
    first_moment_ratio: float           # max |E X_bar| / delta^2
    second_moment_error_ratio: float    # max |E X_bar X_bar' - delta*Sigma| / delta^2


def validate_conditional_moments(model: Model, theta: ParamVector, scheme: SamplingScheme,
                                 reps: int, seed: int, x=None) -> MomentReport:
    """Simulator validation against the one-step conditional moment expansion:
    E X_bar = O(delta^2) and E X_bar X_bar' = delta*Sigma + O(delta^2)."""
    if reps < 1000:
        raise ConfigurationError("reps must be at least 1000")
    from .models import sigma_ops

    x = np.atleast_1d(np.asarray(model.x0 if x is None else x, dtype=float))
    gen = _rng.generator(_rng.derive_seed(seed, _rng.STREAM_MOMENTS))
    delta = scheme.sub_delta
    sqdt = math.sqrt(delta)
    d = model.state_dim
    states = np.tile(x, (reps, 1))
    for _ in range(scheme.substeps):
        z = gen.standard_normal((reps, model.noise_dim))
        states = states + _drift_batch(model, theta.alpha, states) * delta \
            + _diffusion_noise_batch(model, theta.beta, states, z) * sqdt
    b0 = np.asarray(model.drift(theta.alpha, x), dtype=float)
    xbar = states - x - scheme.delta_n * b0
    mean_inc = xbar.mean(axis=0)
    second = xbar.T @ xbar / reps
    sig = sigma_ops(model, theta.beta, x).sigma_mat
    dn = scheme.delta_n
    fourth = float(np.mean(xbar[:, 0] ** 4)) if d == 1 else None
    return MomentReport(
        delta_n=dn, reps=reps,
        mean_increment=mean_inc, second_moment=second, fourth_moment=fourth,
        first_moment_ratio=float(np.max(np.abs(mean_inc)) / dn**2),
        second_moment_error_ratio=float(np.max(np.abs(second - dn * sig)) / dn**2),
    )


def _drift_batch(model, alpha, states):
    if model.kernel_id is not None and model.kernel_id != KERNEL_MOU:
        return alpha[0] - alpha[1] * states
    if model.kernel_id == KERNEL_MOU:
        return 2.0 - np.array([alpha[0], alpha[1]]) * states
    return np.stack([np.asarray(model.drift(alpha, s)) for s in states])


def _diffusion_noise_batch(model, beta, states, z):
    kid = model.kernel_id
    if kid == 0:
        return beta[0] * z
    if kid == 1:
        return beta[0] * states * z
    if kid == 2:
        return beta[0] * np.sqrt(np.maximum(states, 0.0)) * z
    if kid == KERNEL_MOU:
        return np.array([beta[0], beta[1]]) * z
    return np.stack([np.atleast_2d(model.diffusion(beta, s)) @ zi for s, zi in zip(states, z)])


def write_sample_csv(sample: Sample, path):
    """Write the sample as CSV: header t,x1..xd, one row per observation."""
    d = sample.state_dim
    header = "t," + ",".join(f"x{k + 1}" for k in range(d))
    times = sample.times
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(sample.n + 1):
            row = ",".join(format(v, ".17g") for v in sample.observations[i])
            fh.write(f"{format(times[i], '.17g')},{row}\n")


def read_sample_csv(path, model_name: str = "", substeps: int = DEFAULT_SUBSTEPS) -> Sample:
    """Read a sample written by write_sample_csv; delta_n inferred from times."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    if names is None or names[0] != "t" or len(names) < 2:
        raise ConfigurationError(f"{path}: expected CSV header t,x1..xd")
    t = np.asarray(data["t"], dtype=float)
    if t.size < 2:
        raise ConfigurationError(f"{path}: need at least two observations")
    obs = np.column_stack([np.asarray(data[c], dtype=float) for c in names[1:]])
    delta = float(t[1] - t[0])
    scheme = SamplingScheme(n=t.size - 1, delta_n=delta, substeps=substeps)
    return Sample(observations=obs, scheme=scheme, model_name=model_name, seed=0)
