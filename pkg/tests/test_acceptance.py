"""End-to-end acceptance suite.

Each test covers one numbered criterion and prints a single
[PASS]/[FAIL] line directly to the terminal (bypassing capture) before
asserting.  Heavy Monte Carlo runs are cached at module level and shared
between criteria.  Everything is seeded; reruns are bit-identical.
"""

import functools
import math
import sys

import numpy as np
import pytest

from difftest import rng as _rng
from difftest.cli import main as cli_main
from difftest.distributions import (chisq_quantile, noncentral_chisq_cdf,
                                    theoretical_power)
from difftest.divergence import d_phi_n, make_phi
from difftest.errors import DiffTestError
from difftest.estimators import qmle, standardize_error
from difftest.models import MODEL_IDS, ParamVector, make_builtin_model
from difftest.power_study import (ExperimentConfig, empirical_power,
                                  run_null_statistics)
from difftest.quasilik import score_matrix
from difftest.sampling import SamplingScheme, simulate

MASTER_SEED = 0
PHIS = ("log", "akl", "bs", "power:-3", "power:-10", "power:-20")
CHI3_95 = 7.814727903251179

# stationary-law information matrix of the mean-reverting constant-sigma
# model at theta0 = (0.5, 0.5, 0.25): drift block [[16, -16], [-16, 17]],
# diffusion block [32]
ORACLE_INFO = np.array([[16.0, -16.0, 0.0],
                        [-16.0, 17.0, 0.0],
                        [0.0, 0.0, 32.0]])
ORACLE_INV = np.linalg.inv(ORACLE_INFO)


# verdict lines, one per criterion, printed by the conftest terminal
# summary hook so they survive output capture
RESULTS = {}


def _criterion(num, desc, checks):
    failures = [msg for ok, msg in checks if not ok]
    verdict = "FAIL" if failures else "PASS"
    line = f"[{verdict}] criterion {num}: {desc}"
    RESULTS[num] = line
    print(line, file=sys.__stdout__, flush=True)
    assert not failures, "; ".join(failures)


def _within(value, target, tol, label):
    return (abs(value - target) <= tol,
            f"{label}: {value:.4f} vs {target:.4f} (tol {tol:g})")


def _in_range(value, lo, hi, label):
    return lo <= value <= hi, f"{label}: {value:.4f} not in [{lo:g}, {hi:g}]"


@functools.lru_cache(maxsize=None)
def _ou_table(n):
    cfg = ExperimentConfig(
        model_name="OU", n_list=(n,), h_grid=(0.0, 0.2, 0.3, 0.4, 0.5, 0.6),
        phi_names=PHIS, replications=1000, master_seed=MASTER_SEED)
    return empirical_power(cfg)[0]


@functools.lru_cache(maxsize=None)
def _cir_table():
    cfg = ExperimentConfig(
        model_name="CIR", n_list=(250,), h_grid=(0.0, 0.3),
        phi_names=PHIS, replications=1000, master_seed=MASTER_SEED)
    return empirical_power(cfg)[0]


@functools.lru_cache(maxsize=None)
def _ou_null_stats():
    cfg = ExperimentConfig(
        model_name="OU", n_list=(1000,), phi_names=("log", "akl"),
        replications=2000, master_seed=MASTER_SEED)
    stats, failures = run_null_statistics(cfg, 1000)
    assert failures == 0
    return stats


@functools.lru_cache(maxsize=None)
def _standardized_errors(n=1000, reps=500):
    ou = make_builtin_model("OU")
    scheme = SamplingScheme.rapidly_increasing(n)
    model_id = MODEL_IDS["OU"]
    rows = []
    for r in range(reps):
        seed = _rng.derive_seed(MASTER_SEED, _rng.STREAM_MOMENTS, model_id, n, r)
        try:
            sample = simulate(ou, ou.theta0, ou.x0, scheme, seed)
            est = qmle(ou, sample, ou.theta0)
        except DiffTestError:
            continue
        rows.append(standardize_error(est, ou.theta0, scheme))
    return np.asarray(rows)


@functools.lru_cache(maxsize=None)
def _normalized_score_summary(n, reps=200):
    """Average normalized score matrix plus the per-replication median
    magnitude of the drift x diffusion cross entries."""
    ou = make_builtin_model("OU")
    scheme = SamplingScheme.rapidly_increasing(n)
    model_id = MODEL_IDS["OU"]
    mats = []
    for r in range(reps):
        seed = _rng.derive_seed(MASTER_SEED, _rng.STREAM_MOMENTS, model_id, n, r)
        try:
            sample = simulate(ou, ou.theta0, ou.x0, scheme, seed)
        except DiffTestError:
            continue
        mats.append(score_matrix(ou, sample, ou.theta0).normalized)
    mats = np.asarray(mats)
    cross = np.median(np.abs(mats[:, :2, 2]), axis=0)
    return mats.mean(axis=0), cross


def _divergence_medians(theta, phi_name, n_values, reps=100):
    ou = make_builtin_model("OU")
    phi = make_phi(phi_name)
    model_id = MODEL_IDS["OU"]
    medians = []
    for n in n_values:
        scheme = SamplingScheme.rapidly_increasing(n)
        vals = []
        for r in range(reps):
            seed = _rng.derive_seed(MASTER_SEED, _rng.STREAM_MOMENTS,
                                    model_id, n, r)
            sample = simulate(ou, ou.theta0, ou.x0, scheme, seed)
            vals.append(d_phi_n(ou, sample, theta, ou.theta0, phi).value)
        medians.append(float(np.median(vals)))
    return medians


def test_criterion_01_family_identities():
    checks = []
    for name in ("akl", "power:-20", "power:-10", "power:-3", "bs"):
        phi = make_phi(name)
        h = 1e-5
        d1 = (phi.eval(1 + h) - phi.eval(1 - h)) / (2 * h)
        d2 = (phi.eval(1 + h) - 2 * phi.eval(1.0) + phi.eval(1 - h)) / h**2
        curvature = 0.5 if name == "bs" else 1.0
        grid = np.logspace(-3, 3, 200)
        checks.append((phi.eval(1.0) == 0.0, f"{name}: phi(1) != 0"))
        checks.append((abs(d1) < 1e-6, f"{name}: phi'(1) = {d1:.2e}"))
        checks.append((abs(d2 - curvature) < 1e-4,
                       f"{name}: phi''(1) = {d2:.6f} vs {curvature}"))
        checks.append((bool(np.all(phi.eval(grid) >= 0.0)),
                       f"{name}: negative value on grid"))
    _criterion(1, "family identities (value and first two derivatives at 1, "
               "nonnegativity on a log grid)", checks)


def test_criterion_02_null_calibration():
    stats = _ou_null_stats()
    size_log = float((stats[:, 0] > CHI3_95).mean())
    size_akl = float((stats[:, 1] > CHI3_95).mean())
    mean_s = float(stats[:, 0].mean())
    _criterion(2, "null rejection rates at the theoretical chi-square "
               "threshold and mean statistic (n=1000, R=2000)", [
        _in_range(size_log, 0.03, 0.08, "log-statistic size"),
        _in_range(size_akl, 0.03, 0.08, "akl-statistic size"),
        _in_range(mean_s, 2.5, 3.6, "mean S_n"),
    ])


def test_criterion_03_power_cells_mean_reverting():
    t50 = _ou_table(50)
    t1000 = _ou_table(1000)
    _criterion(3, "reference power cells, mean-reverting model "
               "(R=1000, empirical thresholds)", [
        _within(t50.row(0.5)[PHIS.index("log")], 0.616, 0.06,
                "n=50 log-statistic h=0.5"),
        _within(t1000.row(0.4)[PHIS.index("power:-10")], 0.640, 0.06,
                "n=1000 power:-10 h=0.4"),
        _within(t1000.row(0.5)[PHIS.index("akl")], 0.494, 0.06,
                "n=1000 akl h=0.5"),
    ])


def test_criterion_04_power_cells_square_root_diffusion():
    table = _cir_table()
    checks = [_within(table.row(0.3)[PHIS.index("log")], 0.812, 0.06,
                      "n=250 log-statistic h=0.3")]
    for j, name in enumerate(PHIS):
        checks.append(_within(table.row(0.0)[j], 0.05, 1.0 / 1000,
                              f"h=0 row, {name}"))
    _criterion(4, "reference power cells, square-root-diffusion model "
               "(n=250, R=1000)", checks)


def test_criterion_05_dominance_pattern():
    t50 = _ou_table(50)
    t1000 = _ou_table(1000)
    log_idx = PHIS.index("log")
    checks = []
    for h in (0.2, 0.3, 0.4, 0.5, 0.6):
        row = t50.row(h)
        ok = row[log_idx] >= np.max(row) - 1e-12
        checks.append((ok, f"n=50 h={h}: log-statistic {row[log_idx]:.3f} "
                       f"below row max {np.max(row):.3f}"))
    beats = any(
        t1000.row(h)[j] > t1000.row(h)[log_idx]
        for h in (0.2, 0.3, 0.4, 0.5, 0.6)
        for j, name in enumerate(PHIS) if name.startswith("power:"))
    checks.append((beats, "n=1000: no power member ever exceeds the "
                   "log statistic for h >= 0.2"))
    _criterion(5, "small-sample dominance of the log statistic, overtaken "
               "by power members at n=1000", checks)


def test_criterion_06_estimator_convergence():
    z = _standardized_errors()
    cov = np.cov(z, rowvar=False)
    mean = z.mean(axis=0)
    se = z.std(axis=0, ddof=1) / math.sqrt(z.shape[0])
    checks = []
    for i in range(3):
        for j in range(i, 3):
            target = ORACLE_INV[i, j]
            # 20% of zero is meaningless for the exactly-zero cross
            # entries; scale those by the diagonal instead
            scale = abs(target) or math.sqrt(ORACLE_INV[i, i] * ORACLE_INV[j, j])
            tol = 0.2 * scale
            checks.append(_within(cov[i, j], target, tol, f"cov[{i},{j}]"))
    for i in range(3):
        checks.append((abs(mean[i]) <= 3 * se[i],
                       f"mean[{i}] = {mean[i]:.4f} beyond 3 SE ({se[i]:.4f})"))
    _criterion(6, "standardized estimation error covariance vs the "
               "stationary-law information inverse (n=1000, 500 reps)", checks)


def test_criterion_07_score_matrix_convergence():
    avg250, cross250 = _normalized_score_summary(250)
    avg1000, cross1000 = _normalized_score_summary(1000)
    dev250 = float(np.max(np.abs(avg250 - ORACLE_INFO)))
    dev1000 = float(np.max(np.abs(avg1000 - ORACLE_INFO)))
    # per-replication cross (drift x diffusion) magnitudes must shrink at
    # least as fast as sqrt of the step-size ratio
    shrink = math.sqrt((250 / 1000) ** (2.0 / 3.0))
    ratios = cross1000 / cross250
    _criterion(7, "normalized score matrix approaches the information "
               "oracle, cross block vanishing at the step-size rate", [
        (dev1000 < dev250,
         f"max deviation grew: {dev250:.3f} -> {dev1000:.3f}"),
        (float(np.median(ratios)) <= shrink,
         f"cross-block median ratio {np.median(ratios):.3f} > {shrink:.3f}"),
    ])


def test_criterion_08_divergence_limit():
    drift_theta = ParamVector([0.8, 0.5], [0.25])
    med = _divergence_medians(drift_theta, "akl", (250, 1000, 4000))
    checks = [
        (med[0] > med[1] > med[2] > 0.0,
         f"drift-shift medians not decreasing: {med}"),
        (med[2] < 0.5 * med[0],
         f"drift-shift median barely moved: {med}"),
    ]
    # constant-sigma closed forms for sigma 0.25 -> 0.30, ratio convention:
    # log member 0.5*(log(s0/s1) + 1 - s0/s1) with s = sigma^2; akl member
    # E[phi(R)] under the chi-square(1) mixing law, quadrature oracle
    diff_theta = ParamVector([0.5, 0.5], [0.30])
    s0, s1 = 0.0625, 0.09
    log_limit = 0.5 * (math.log(s0 / s1) + 1.0 - s0 / s1)
    akl_limit = 0.03767844320605
    med_log = _divergence_medians(diff_theta, "log", (4000,))[0]
    med_akl = _divergence_medians(diff_theta, "akl", (4000,))[0]
    checks.append(_within(med_log, log_limit, 0.1 * abs(log_limit),
                          "diffusion-shift log median at n=4000"))
    checks.append(_within(med_akl, akl_limit, 0.1 * abs(akl_limit),
                          "diffusion-shift akl median at n=4000"))
    _criterion(8, "divergence vanishes under drift-only shifts and hits the "
               "constant-coefficient limit under a diffusion shift", checks)


def test_criterion_09_distribution_functions():
    checks = [
        _within(chisq_quantile(0.95, 3), 7.814727903251179, 1e-6,
                "chi-square(3) 0.95 quantile"),
        _within(chisq_quantile(0.95, 4), 9.487729036781154, 1e-6,
                "chi-square(4) 0.95 quantile"),
    ]
    draws = np.random.default_rng(11).noncentral_chisquare(3.0, 4.0, 10_000_000)
    for x in (2.0, 5.0, 8.0, 12.0):
        emp = float((draws <= x).mean())
        se = math.sqrt(emp * (1.0 - emp) / draws.size)
        cdf = noncentral_chisq_cdf(x, 3, 4.0)
        checks.append((abs(cdf - emp) <= 3 * se,
                       f"noncentral cdf at {x}: {cdf:.6f} vs MC {emp:.6f} "
                       f"(3 SE = {3 * se:.2e})"))
    for alpha in (0.01, 0.05, 0.10):
        checks.append((abs(theoretical_power(0.0, 3, alpha) - alpha) < 1e-12,
                       f"power at zero noncentrality != alpha {alpha}"))
    _criterion(9, "chi-square quantiles, noncentral CDF vs a 1e7-draw Monte "
               "Carlo oracle, exact size at zero shift", checks)


def test_criterion_10_determinism(tmp_path):
    import json
    outs = []
    for threads, name in ((1, "a.csv"), (2, "b.csv")):
        out = tmp_path / name
        cfg = tmp_path / f"cfg{threads}.json"
        cfg.write_text(json.dumps({
            "models": ["OU"], "n_list": [100], "h_grid": [0.0, 0.5],
            "phis": ["log", "bs"], "replications": 100, "seed": 7,
            "threads": threads, "out": str(out)}))
        code = cli_main(["power", "--config", str(cfg)])
        assert code == 0
        outs.append(out.read_bytes())
    _criterion(10, "power run CSV byte-identical across worker counts", [
        (outs[0] == outs[1], "CSV output differs between 1 and 2 workers"),
    ])
