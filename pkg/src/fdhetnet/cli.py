"""Command-line experiment driver.

``fdhetnet run <experiment> [--config FILE] [--override key=value ...]``
writes one CSV table. Experiments:

``rates``      analytic bounds over the lambda2 and nu grids
``validate``   bounds against Monte Carlo estimates
``sumrate``    decoupled (MDROA) against coupled association sum rates
``region``     corners of the FD, HD and inner regions plus the outer frontier
``schedule``   sum rates of the scheduling policies for both traffic mixes
``stability``  trend-test verdicts for arrivals around the outer frontier
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace

import numpy as np

from .association import AssociationScheme, Scheme
from .config import ExperimentConfig, load_config
from .errors import NumericalError, ParameterError, SchemaError
from .montecarlo import OperatingPoint, SimPlan, validate_bound
from .rates import rate_pair
from .region import RateCurve, build_regions, regions_csv
from .scheduler import stability_sweep, sum_rate_experiment

__all__ = ["EXPERIMENTS", "run_experiment", "main"]

RATE = "[nats/s/Hz]"


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.10g}"
    return str(x)


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _rates(cfg: ExperimentConfig, workers):
    rows = []
    for lam2 in cfg.run.lambda2_grid:
        net = cfg.at_lambda2(lam2)
        for nu in cfg.run.nu_grid:
            dl, ul = rate_pair(replace(net, nu=nu), nu)
            rows.append((lam2, nu, dl, ul))
    return _table(["lambda2 [BS/km^2]", "nu [-]", f"C_dl_bound {RATE}", f"C_ul_bound {RATE}"], rows)


def _validate(cfg: ExperimentConfig, workers):
    rows = []
    net0 = cfg.network
    pts = tuple(OperatingPoint(nu, net0.eps0, net0.eps_star) for nu in cfg.run.nu_grid)
    for lam2 in cfg.run.lambda2_grid:
        plan = SimPlan(cfg.at_lambda2(lam2), trials=cfg.run.trials, seed=cfg.run.seed, points=pts)
        for r in validate_bound(plan, threshold=cfg.run.threshold, workers=workers):
            rows.append((lam2, r["nu"], r["direction"], r["bound"], r["estimate"], r["ci"], r["gap"], r["verdict"]))
    return _table(["lambda2 [BS/km^2]", "nu [-]", "direction", f"bound {RATE}", f"estimate {RATE}",
                   f"ci_halfwidth {RATE}", "gap [-]", "verdict"], rows)


def _sumrate(cfg: ExperimentConfig, workers):
    rows = []
    coupled = AssociationScheme(Scheme.COUPLED_MROA, Scheme.COUPLED_MROA)
    for lam2 in cfg.run.lambda2_grid:
        net = cfg.at_lambda2(lam2)
        for nu in cfg.run.nu_grid:
            dec = sum(rate_pair(replace(net, nu=nu), nu))
            cou = sum(rate_pair(replace(net, nu=nu, scheme=coupled), nu))
            rows.append((lam2, nu, dec, cou, dec - cou))
    return _table(["lambda2 [BS/km^2]", "nu [-]", f"decoupled_sum {RATE}", f"coupled_sum {RATE}",
                   f"gap {RATE}"], rows)


def _region(cfg: ExperimentConfig, workers):
    return regions_csv(build_regions(cfg.network))


def _schedule(cfg: ExperimentConfig, workers):
    curve = RateCurve(cfg.network)
    rows = []
    for mix in ("downlink", "uplink"):
        rows += [(mix, *r) for r in sum_rate_experiment(curve, mix)]
    return _table(["mix", "policy", "nu [-]", f"sum_rate {RATE}"], rows)


def _stability(cfg: ExperimentConfig, workers):
    curve = RateCurve(cfg.network)
    rows = stability_sweep(curve, loads=cfg.run.loads, seeds=cfg.run.seeds, horizon=cfg.run.horizon)
    keys = ("nu", "branch", "policy", "load", "eta_dl", "eta_ul", "seed", "z", "p_value", "final_mean", "stable")
    header = ["nu [-]", "branch", "policy", "load [-]", "eta_dl [packets/slot]", "eta_ul [packets/slot]",
              "seed", "trend_z [-]", "p_value [-]", "final_mean [packets]", "stable"]
    return _table(header, [tuple(r[k] for k in keys) for r in rows])


EXPERIMENTS = {
    "rates": _rates,
    "validate": _validate,
    "sumrate": _sumrate,
    "region": _region,
    "schedule": _schedule,
    "stability": _stability,
}


def run_experiment(name: str, config: ExperimentConfig, workers: int | None = None) -> str:
    """CSV text of experiment ``name``."""
    if name not in EXPERIMENTS:
        raise SchemaError(f"unknown experiment: {name}")
    return EXPERIMENTS[name](config, workers)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdhetnet", description="Two-way multi-tier network experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a named experiment and write CSV")
    r.add_argument("experiment", choices=sorted(EXPERIMENTS))
    r.add_argument("--config", help="YAML configuration file (defaults: reference network)")
    r.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="override a configuration value; repeatable")
    r.add_argument("--output", help="CSV path; overrides run.output")
    r.add_argument("--threads", type=int, help="worker processes for Monte Carlo (default: FDHETNET_THREADS or 1)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.override)
        if args.threads is not None and args.threads < 1:
            raise SchemaError("--threads must be >= 1")
        text = run_experiment(args.experiment, cfg, args.threads)
        out = args.output or cfg.run.output
        if out:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (SchemaError, ParameterError, NumericalError) as exc:
        print(f"fdhetnet: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fdhetnet: error: cannot write output: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
