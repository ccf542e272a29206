"""Monte Carlo power study: empirical thresholds under the null and
empirical power over local alternatives, for every test family member.

Protocol per (model, n): R calibration replications (simulate at theta0,
estimate, compute every statistic against theta0 on the shared path) give
the empirical (1-alpha) threshold per family member, and directly yield the
h = 0 row, whose rejection rate therefore equals alpha up to order-statistic
discreteness (within 1/R).  The h > 0 rows use a second, independent stream
of paths, again simulated under theta0; on each path theta_hat is estimated
once and the statistics are evaluated against every shifted point
theta0 + h/rate, so one simulation serves all (h, member) cells and the
member comparison is a paired one.

Replication seeds derive from (master_seed, stream, model, n, r, attempt),
so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .divergence import all_statistics, make_phi
from .errors import ConfigurationError, DiffTestError
from .estimators import qmle
from .models import MODEL_IDS, ParamVector, make_builtin_model
from .quasilik import RateMatrix
from .sampling import SamplingScheme, simulate

DEFAULT_H_GRID = (0.0, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
DEFAULT_PHI_NAMES = ("log", "akl", "bs", "power:-3", "power:-10", "power:-20")
MAX_RETRIES = 5


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one power experiment; everything that affects the
    numbers, including the master seed, lives here."""

    model_name: str
    n_list: tuple = (1000,)
    h_grid: tuple = DEFAULT_H_GRID
    phi_names: tuple = DEFAULT_PHI_NAMES
    replications: int = 1000
    alpha_level: float = 0.05
    master_seed: int = 0
    substeps: int = 10
    theta0: ParamVector | None = None  # None: the model's default
    x0: object = None                  # None: the model's default

    def __post_init__(self):
        if self.replications < 100:
            raise ConfigurationError("replications must be at least 100")
        if not 0.0 < self.alpha_level < 1.0:
            raise ConfigurationError(f"alpha_level {self.alpha_level} not in (0, 1)")
        if not any(h == 0.0 for h in self.h_grid):
            raise ConfigurationError("h_grid must contain 0 (the null point)")
        if any(h < 0.0 or h > 1.0 for h in self.h_grid):
            raise ConfigurationError("h_grid values must lie in [0, 1]")
        for name in self.phi_names:
            make_phi(name)
        make_builtin_model(self.model_name)


@dataclass(frozen=True)
class PowerTable:
    """Empirical power by (h, family member) for one (model, n)."""

    model_name: str
    n: int
    replications: int
    alpha_level: float
    master_seed: int
    phi_names: tuple
    h_values: np.ndarray
    powers: np.ndarray       # shape (len(h_values), len(phi_names))
    thresholds: np.ndarray   # per family member
    failures: np.ndarray     # dropped replications per h row
    effective_r: np.ndarray = field(default=None)  # completed replications per h row

    def row(self, h: float) -> np.ndarray:
        idx = int(np.argmin(np.abs(self.h_values - h)))
        if abs(self.h_values[idx] - h) > 1e-12:
            raise ConfigurationError(f"h={h} not in table grid")
        return self.powers[idx]


def local_alternative(theta0: ParamVector, h: float, n: int,
                      scheme: SamplingScheme, model) -> ParamVector:
    """theta0 shifted by h/sqrt(n*delta_n) on every drift component and
    h/sqrt(n) on every diffusion component."""
    drift_shift = h / math.sqrt(n * scheme.delta_n)
    diff_shift = h / math.sqrt(n)
    shifted = ParamVector(theta0.alpha + drift_shift, theta0.beta + diff_shift)
    if not model.in_bounds(shifted):
        raise ConfigurationError(
            f"local alternative h={h} leaves the bounds of model {model.name}")
    return shifted


def _replication(phi_names, model_name, theta_gen, theta_targets, x0, n,
                 delta_n, substeps, master_seed, stream, r):
    """One replication: simulate under theta_gen, estimate once, evaluate
    every statistic against every target parameter on the shared path.

    Retries with fresh derived seeds on simulation or estimation failure;
    returns (values (n_targets, n_phis) or None, retries_used).
    Module-level so process pools can pickle it.
    """
    model = make_builtin_model(model_name)
    p, q = model.p, model.q
    theta_gen = ParamVector.from_theta(np.asarray(theta_gen), p, q)
    targets = [ParamVector.from_theta(np.asarray(t), p, q) for t in theta_targets]
    scheme = SamplingScheme(n=n, delta_n=delta_n, substeps=substeps)
    phis = [make_phi(name) for name in phi_names]
    model_id = MODEL_IDS[model.name]
    for attempt in range(MAX_RETRIES + 1):
        seed = _rng.derive_seed(master_seed, stream, model_id, n, r, attempt)
        try:
            sample = simulate(model, theta_gen, x0, scheme, seed)
            est = qmle(model, sample, theta_gen)
            if not est.converged:
                continue
            values = [[s.value for s in
                       all_statistics(model, sample, est.theta_hat, t, phis)]
                      for t in targets]
            return values, attempt
        except DiffTestError:
            continue
    return None, MAX_RETRIES


def _run_task(task):
    # ProcessPoolExecutor entry point
    return _replication(*task)


def _run_batch(config: ExperimentConfig, model, n, scheme, theta_targets,
               stream, threads):
    """R replications simulated at theta0; returns (statistics array of shape
    (R_eff, n_targets, n_phis), failure count)."""
    x0 = np.asarray(model.x0 if config.x0 is None else config.x0, dtype=float)
    theta0 = config.theta0 or model.theta0
    tasks = [
        (tuple(config.phi_names), model.name, tuple(theta0.theta),
         tuple(tuple(t.theta) for t in theta_targets), x0, n, scheme.delta_n,
         config.substeps, config.master_seed, stream, r)
        for r in range(config.replications)
    ]
    if threads <= 1:
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=8))
    values = [v for v, _ in results if v is not None]
    failures = sum(1 for v, _ in results if v is None)
    return np.asarray(values, dtype=float), failures


def threshold_from_statistics(stats: np.ndarray, alpha_level: float) -> float:
    """Empirical (1-alpha) quantile: the k-th order statistic with
    k = ceil((1-alpha) * R)."""
    r = stats.size
    if r < 1:
        raise ConfigurationError("no statistics to calibrate from")
    k = math.ceil((1.0 - alpha_level) * r)
    return float(np.sort(stats)[k - 1])


def run_null_statistics(config: ExperimentConfig, n: int, threads: int = 1):
    """R null replications; returns (statistics matrix (R_eff, n_phis), failures)."""
    model = make_builtin_model(config.model_name)
    theta0 = config.theta0 or model.theta0
    scheme = SamplingScheme.rapidly_increasing(n, config.substeps)
    stats, failures = _run_batch(config, model, n, scheme, [theta0],
                                 _rng.STREAM_NULL, threads)
    return stats[:, 0, :], failures


def calibrate_threshold(config: ExperimentConfig, n: int, phi_name: str,
                        threads: int = 1) -> float:
    """Empirical threshold for one family member at one sample size."""
    if phi_name not in config.phi_names:
        raise ConfigurationError(f"{phi_name!r} not in the configured family")
    stats, _ = run_null_statistics(config, n, threads)
    col = config.phi_names.index(phi_name)
    return threshold_from_statistics(stats[:, col], config.alpha_level)


def empirical_power(config: ExperimentConfig, threads: int = 1) -> list[PowerTable]:
    """One PowerTable per n in config.n_list.

    Thresholds and the h = 0 row come from the calibration stream; the
    h > 0 rows come from an independent stream of paths simulated under
    theta0 on which each statistic is evaluated against the shifted points.
    """
    model = make_builtin_model(config.model_name)
    theta0 = config.theta0 or model.theta0
    tables = []
    for n in config.n_list:
        scheme = SamplingScheme.rapidly_increasing(n, config.substeps)
        null_stats, null_failures = _run_batch(
            config, model, n, scheme, [theta0], _rng.STREAM_NULL, threads)
        null_stats = null_stats[:, 0, :]
        thresholds = np.array([
            threshold_from_statistics(null_stats[:, j], config.alpha_level)
            for j in range(len(config.phi_names))
        ])
        h_values = np.asarray(sorted(config.h_grid), dtype=float)
        h_alt = [h for h in h_values if h > 0.0]
        targets = [local_alternative(theta0, h, n, scheme, model) for h in h_alt]
        if targets:
            alt_stats, alt_failures = _run_batch(
                config, model, n, scheme, targets, _rng.STREAM_POWER, threads)
        else:
            alt_stats, alt_failures = np.empty((0, 0, 0)), 0
        powers = np.empty((h_values.size, len(config.phi_names)))
        failures = np.zeros(h_values.size, dtype=int)
        effective = np.zeros(h_values.size, dtype=int)
        k = 0
        for i, h in enumerate(h_values):
            if h == 0.0:
                powers[i] = (null_stats > thresholds).mean(axis=0)
                failures[i] = null_failures
                effective[i] = null_stats.shape[0]
            else:
                powers[i] = (alt_stats[:, k, :] > thresholds).mean(axis=0)
                failures[i] = alt_failures
                effective[i] = alt_stats.shape[0]
                k += 1
        tables.append(PowerTable(
            model_name=model.name, n=n, replications=config.replications,
            alpha_level=config.alpha_level, master_seed=config.master_seed,
            phi_names=tuple(config.phi_names), h_values=h_values,
            powers=powers, thresholds=thresholds, failures=failures,
            effective_r=effective))
    return tables


def dominance_summary(tables: list[PowerTable]) -> dict:
    """Per (model, n, h): the family members attaining the row maximum
    (ties listed together), plus the members that are never dominated."""
    rows = {}
    for table in tables:
        for i, h in enumerate(table.h_values):
            row = table.powers[i]
            best = np.max(row)
            winners = [table.phi_names[j] for j in range(row.size)
                       if row[j] >= best - 1e-12]
            rows[(table.model_name, table.n, float(h))] = tuple(winners)
    counts = {}
    for winners in rows.values():
        for name in winners:
            counts[name] = counts.get(name, 0) + 1
    return {"argmax": rows, "win_counts": counts}


# ---------------------------------------------------------------------------
# CSV and text rendering

CSV_HEADER = "model,n,phi,h,power,R,failures,threshold"


def table_csv_rows(table: PowerTable) -> list[str]:
    rows = []
    for i, h in enumerate(table.h_values):
        for j, name in enumerate(table.phi_names):
            rows.append(
                f"{table.model_name},{table.n},{name},{h:g},"
                f"{table.powers[i, j]:.6f},{table.replications},"
                f"{table.failures[i]},{table.thresholds[j]:.6f}")
    return rows


def write_power_csv(tables: list[PowerTable], path):
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for table in tables:
            for row in table_csv_rows(table):
                fh.write(row + "\n")


def read_power_csv(path) -> list[PowerTable]:
    """Rebuild PowerTable objects from the CSV emitted by write_power_csv."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigurationError(f"{path}: expected header {CSV_HEADER!r}")
    groups: dict[tuple, dict] = {}
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 8:
            raise ConfigurationError(f"{path}: malformed row {ln!r}")
        model, n, phi, h, power, reps, fails, thr = parts
        key = (model, int(n))
        g = groups.setdefault(key, {"phis": [], "cells": {}, "thr": {}, "fails": {},
                                    "reps": int(reps)})
        if phi not in g["phis"]:
            g["phis"].append(phi)
        g["cells"][(float(h), phi)] = float(power)
        g["thr"][phi] = float(thr)
        g["fails"][float(h)] = int(fails)
    tables = []
    for (model, n), g in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        h_values = np.asarray(sorted({h for h, _ in g["cells"]}), dtype=float)
        phis = tuple(g["phis"])
        powers = np.array([[g["cells"][(h, p)] for p in phis] for h in h_values])
        tables.append(PowerTable(
            model_name=model, n=n, replications=g["reps"], alpha_level=float("nan"),
            master_seed=0, phi_names=phis, h_values=h_values, powers=powers,
            thresholds=np.array([g["thr"][p] for p in phis]),
            failures=np.array([g["fails"][h] for h in h_values], dtype=int),
            effective_r=None))
    return tables


def render_text_table(table: PowerTable) -> str:
    """Aligned text table, three decimals, `*` marking each row's maximum."""
    width = max(10, max(len(p) for p in table.phi_names) + 2)
    head = f"{table.model_name}, n = {table.n}, R = {table.replications}"
    lines = [head, "-" * (6 + width * len(table.phi_names))]
    lines.append("h".rjust(6) + "".join(p.rjust(width) for p in table.phi_names))
    for i, h in enumerate(table.h_values):
        row = table.powers[i]
        best = np.max(row)
        cells = []
        for v in row:
            mark = "*" if v >= best - 1e-12 else ""
            cells.append(f"{v:.3f}{mark}".rjust(width))
        lines.append(f"{h:6.2f}" + "".join(cells))
    return "\n".join(lines)
