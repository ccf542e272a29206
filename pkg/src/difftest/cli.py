"""Command-line front end.

Verbs: simulate, estimate, test, power, tables.  A power run is driven by a
JSON config (committable next to its result CSVs); command-line flags
override config values.  All randomness flows from the seed in flags or
config; nothing is seeded from the clock.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 partial results.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .distributions import chisq_quantile, theoretical_power
from .divergence import make_phi, t_statistic
from .errors import ConfigurationError, NumericError
from .estimators import qmle, standardize_error
from .models import ParamVector, make_builtin_model
from .power_study import (DEFAULT_H_GRID, DEFAULT_PHI_NAMES, ExperimentConfig,
                          dominance_summary, empirical_power, read_power_csv,
                          render_text_table, write_power_csv)
from .quasilik import score_matrix
from .sampling import (DEFAULT_SUBSTEPS, SamplingScheme, read_sample_csv,
                       simulate, write_sample_csv)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_PARTIAL = 4

POWER_CONFIG_KEYS = {
    "models", "n_list", "h_grid", "phis", "replications", "alpha",
    "seed", "substeps", "out", "threads",
}


def _parse_theta(text: str, model) -> ParamVector:
    vals = np.array([float(v) for v in text.split(",")])
    return ParamVector.from_theta(vals, model.p, model.q)


def _resolve_threads(flag_value):
    if flag_value is not None:
        return max(1, int(flag_value))
    env = os.environ.get("DIFFTEST_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _load_sample(args, model):
    sample = read_sample_csv(args.sample, model_name=model.name,
                             substeps=args.substeps)
    if sample.state_dim != model.state_dim:
        raise ConfigurationError(
            f"sample has dimension {sample.state_dim}, model {model.name} "
            f"expects {model.state_dim}")
    return sample


def cmd_simulate(args) -> int:
    model = make_builtin_model(args.model)
    theta = _parse_theta(args.theta, model) if args.theta else model.theta0
    scheme = SamplingScheme.rapidly_increasing(args.n, args.substeps)
    sample = simulate(model, theta, model.x0, scheme, args.seed)
    write_sample_csv(sample, args.out)
    print(f"model={model.name} n={scheme.n} T={scheme.horizon:.6g} "
          f"delta_n={scheme.delta_n:.6g} substeps={scheme.substeps} seed={args.seed}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    model = make_builtin_model(args.model)
    sample = _load_sample(args, model)
    init = _parse_theta(args.init, model) if args.init else model.theta0
    est = qmle(model, sample, init)
    print(f"theta_hat = {np.array2string(est.theta_hat.theta, precision=6)}")
    print(f"contrast  = {est.contrast_at_min:.6f}")
    print(f"converged = {est.converged} (iterations={est.iterations}, "
          f"evals={est.n_evals})")
    if args.theta0:
        theta0 = _parse_theta(args.theta0, model)
        z = standardize_error(est, theta0, sample.scheme)
        print(f"standardized error vs theta0 = {np.array2string(z, precision=4)}")
    if not est.converged:
        print("warning: optimizer did not converge", file=sys.stderr)
    return EXIT_OK


def cmd_test(args) -> int:
    model = make_builtin_model(args.model)
    sample = _load_sample(args, model)
    theta0 = _parse_theta(args.theta0, model) if args.theta0 else model.theta0
    init = _parse_theta(args.init, model) if args.init else theta0
    phi = make_phi(args.phi)
    est = qmle(model, sample, init)
    stat = t_statistic(model, sample, est.theta_hat, theta0, phi)
    crit = chisq_quantile(1.0 - args.alpha, stat.df)
    decision = "reject" if stat.value > crit else "accept"
    print(f"phi={phi.name} statistic={stat.value:.6f} df={stat.df} "
          f"threshold={crit:.6f} alpha={args.alpha:g}")
    print(f"decision: {decision} H0")
    if stat.saturated:
        print("warning: likelihood-ratio exponent clamp hit", file=sys.stderr)
    if args.power_h is not None:
        info = score_matrix(model, sample, theta0).normalized
        hvec = np.full(stat.df, args.power_h)
        mu = float(hvec @ info @ hvec)
        print(f"theoretical power at h={args.power_h:g}: "
              f"{theoretical_power(mu, stat.df, args.alpha):.4f} "
              f"(noncentrality {mu:.4f})")
    if not est.converged:
        print("warning: optimizer did not converge; decision may be unreliable",
              file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _power_settings(args) -> dict:
    cfg = {
        "models": None, "n_list": None, "h_grid": list(DEFAULT_H_GRID),
        "phis": list(DEFAULT_PHI_NAMES), "replications": 1000, "alpha": 0.05,
        "seed": 0, "substeps": DEFAULT_SUBSTEPS, "out": "power.csv",
        "threads": None,
    }
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"{args.config}: expected a JSON object")
        unknown = set(loaded) - POWER_CONFIG_KEYS
        if unknown:
            raise ConfigurationError(
                f"{args.config}: unknown config keys {sorted(unknown)}")
        cfg.update(loaded)
    # flags override config
    if args.model:
        cfg["models"] = [args.model]
    if args.n is not None:
        cfg["n_list"] = [args.n]
    if args.replications is not None:
        cfg["replications"] = args.replications
    if args.alpha is not None:
        cfg["alpha"] = args.alpha
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out:
        cfg["out"] = args.out
    if args.threads is not None:
        cfg["threads"] = args.threads
    if args.fast:
        cfg["replications"] = min(cfg["replications"], 200)
    if not cfg["models"]:
        raise ConfigurationError("no model given (flag --model or config 'models')")
    if not cfg["n_list"]:
        raise ConfigurationError("no sample sizes given (flag --n or config 'n_list')")
    return cfg


def cmd_power(args) -> int:
    cfg = _power_settings(args)
    threads = _resolve_threads(cfg["threads"])
    tables = []
    errors = []
    for model_name in cfg["models"]:
        try:
            econf = ExperimentConfig(
                model_name=model_name, n_list=tuple(cfg["n_list"]),
                h_grid=tuple(cfg["h_grid"]), phi_names=tuple(cfg["phis"]),
                replications=int(cfg["replications"]),
                alpha_level=float(cfg["alpha"]), master_seed=int(cfg["seed"]),
                substeps=int(cfg["substeps"]))
            tables.extend(empirical_power(econf, threads=threads))
        except (ConfigurationError, NumericError) as exc:
            errors.append(f"{model_name}: {exc}")
    if not tables:
        raise ConfigurationError("; ".join(errors) or "nothing to run")
    write_power_csv(tables, cfg["out"])
    for table in tables:
        print(render_text_table(table))
        print()
    summary = dominance_summary(tables)
    print("win counts:", dict(sorted(summary["win_counts"].items())))
    print(f"wrote {cfg['out']}")
    if errors:
        for msg in errors:
            print(f"failed: {msg}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_tables(args) -> int:
    tables = read_power_csv(args.csv)
    for table in tables:
        print(render_text_table(table))
        print()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="difftest",
        description="Quasi-likelihood divergence tests for discretely observed diffusions")
    sub = parser.add_subparsers(dest="verb", required=True)

    ps = sub.add_parser("simulate", help="simulate a discretely observed path")
    ps.add_argument("--model", required=True)
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--theta", help="comma-separated theta (default: model theta0)")
    ps.add_argument("--substeps", type=int, default=DEFAULT_SUBSTEPS)
    ps.add_argument("--out", default="sample.csv")
    ps.set_defaults(fn=cmd_simulate)

    pe = sub.add_parser("estimate", help="fit theta_hat to a sample CSV")
    pe.add_argument("--model", required=True)
    pe.add_argument("--sample", required=True)
    pe.add_argument("--init", help="comma-separated initial theta")
    pe.add_argument("--theta0", help="known truth; prints standardized error")
    pe.add_argument("--substeps", type=int, default=DEFAULT_SUBSTEPS)
    pe.set_defaults(fn=cmd_estimate)

    pt = sub.add_parser("test", help="run one hypothesis test on a sample CSV")
    pt.add_argument("--model", required=True)
    pt.add_argument("--sample", required=True)
    pt.add_argument("--phi", default="log")
    pt.add_argument("--theta0", help="null parameter (default: model theta0)")
    pt.add_argument("--init", help="optimizer start (default: theta0)")
    pt.add_argument("--alpha", type=float, default=0.05)
    pt.add_argument("--power-h", type=float, dest="power_h",
                    help="also print theoretical power at this local shift")
    pt.add_argument("--substeps", type=int, default=DEFAULT_SUBSTEPS)
    pt.set_defaults(fn=cmd_test)

    pp = sub.add_parser("power", help="run a Monte Carlo power study")
    pp.add_argument("--config", help="JSON config file")
    pp.add_argument("--model")
    pp.add_argument("--n", type=int)
    pp.add_argument("--replications", type=int)
    pp.add_argument("--alpha", type=float)
    pp.add_argument("--seed", type=int)
    pp.add_argument("--out")
    pp.add_argument("--threads", type=int)
    pp.add_argument("--fast", action="store_true",
                    help="cap replications at 200 for a quick pass")
    pp.set_defaults(fn=cmd_power)

    pb = sub.add_parser("tables", help="re-render a power CSV as text tables")
    pb.add_argument("--csv", required=True)
    pb.set_defaults(fn=cmd_tables)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
