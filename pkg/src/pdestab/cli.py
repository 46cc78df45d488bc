"""Command-line entry point.

Exit codes:
    0  success (all certificates pass)
    1  configuration error
    2  assumption breach
    3  solver failure
    4  certificate failure
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .certify import (
    SWEEP_COLUMNS,
    certify_exponential,
    certify_stability,
    sweep,
    trajectory_series,
)
from .config import RunConfig, load
from .errors import AssumptionError, ConfigError, PdestabError, PreconditionError, SolverError
from .liapunov import LiapunovParams
from .problem import verify_assumptions_I
from .solver import integrate
from .thresholds import compute_thresholds

EXIT_OK, EXIT_CONFIG, EXIT_ASSUMPTION, EXIT_SOLVER, EXIT_CERTIFY = 0, 1, 2, 3, 4

log = logging.getLogger("pdestab")


def _out_dir(args, cfg: RunConfig) -> Path:
    d = Path(args.out) if args.out else cfg.output_dir
    d.mkdir(parents=True, exist_ok=True)
    return d


def _thresholds(cfg: RunConfig):
    cc = cfg.certify
    return compute_thresholds(cfg.spec, cc.theta_margin, cc.xi_default, cc.xi_fraction,
                              cfg.scan_horizon, cfg.scan_samples)


def cmd_check(args, cfg: RunConfig) -> int:
    report = verify_assumptions_I(cfg.spec, cfg.scan_horizon, cfg.scan_samples)
    out = _out_dir(args, cfg)
    if "json" in cfg.formats:
        serialize.write_json(out / "assumptions.json", report.to_dict())
    for c in report.clauses:
        margin = "" if c.margin is None else f"  margin={serialize.fmt_float(c.margin)}"
        print(f"{c.status:>13}  {c.name}{margin}")
    print("assumptions: " + ("pass" if report.passed else "FAIL"))
    return EXIT_OK if report.passed else EXIT_ASSUMPTION


def cmd_thresholds(args, cfg: RunConfig) -> int:
    aI = verify_assumptions_I(cfg.spec, cfg.scan_horizon, cfg.scan_samples)
    if not aI.passed:
        bad = ", ".join(c.name for c in aI.clauses if c.status == "fail")
        print(f"error: assumptions not met: {bad}", file=sys.stderr)
        return EXIT_ASSUMPTION
    report = _thresholds(cfg)
    text = serialize.dumps(report)
    out = _out_dir(args, cfg)
    if "json" in cfg.formats:
        (out / "thresholds.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args, cfg: RunConfig) -> int:
    solver_cfg = cfg.solver_config()
    if args.horizon is not None:
        solver_cfg = dataclasses.replace(solver_cfg, t_end=cfg.t0 + args.horizon)
    try:
        traj = integrate(cfg.spec, cfg.u0, cfg.u1, cfg.t0, solver_cfg, cfg.scale)
    except ValueError as exc:
        raise ConfigError(f"[initial] {exc}") from exc
    out = _out_dir(args, cfg)

    try:
        report = _thresholds(cfg)
        sigma = cfg.sigmas[0] if cfg.sigmas else report.params_sigma
        params = LiapunovParams(report.gamma3_of_sigma(sigma), report.theta_used)
        series = trajectory_series(traj, cfg.spec, report, params, sigma, cfg.t0)
    except AssumptionError as exc:
        log.warning("thresholds unavailable (%s); only t and d are exported", exc)
        from .grid import d_norm

        t = traj.times
        d = np.array([d_norm(traj.state(i), t[i], cfg.spec, traj.grid) for i in range(len(t))])
        nan = np.full_like(t, np.nan)
        series = {"t": t, "d": d, "W": nan, "lower_bound": nan, "upper_bound": nan,
                  "y_comparison": nan, "envelope": nan}
    if "csv" in cfg.formats:
        cols = ("t", "d", "W", "lower_bound", "upper_bound", "y_comparison", "envelope")
        serialize.write_columns(out / "trajectory.csv", {k: series[k] for k in cols})
        for ts in cfg.snapshots:
            i = int(np.argmin(np.abs(traj.times - ts)))
            serialize.write_columns(out / f"snapshot_t{serialize.fmt_float(traj.times[i])}.csv",
                                    {"x": traj.grid.x, "u": traj.u[i], "v": traj.v[i]})
    print(f"simulated {len(traj) - 1} steps to t={serialize.fmt_float(traj.times[-1])}; "
          f"d(t_end)={serialize.fmt_float(series['d'][-1])}")
    return EXIT_OK


def _certify_config(args, cfg):
    cc = cfg.certify
    if args.horizon is not None:
        cc = dataclasses.replace(cc, horizon=args.horizon)
    return cc


def cmd_certify(args, cfg: RunConfig) -> int:
    report = _thresholds(cfg)
    cc = _certify_config(args, cfg)
    out = _out_dir(args, cfg)
    sigmas = cfg.sigmas or [report.params_sigma]
    runs = [("stability", s, t0, sh) for s in sigmas for t0 in cfg.t0s for sh in cfg.shapes]
    if cfg.exponential:
        runs += [("exponential", None, t0, sh) for t0 in cfg.t0s for sh in cfg.shapes]
    all_pass = True
    for i, (kind, s, t0, sh) in enumerate(runs):
        try:
            if kind == "stability":
                cert = certify_stability(cfg.spec, s, t0, sh, cc, report)
            else:
                cert = certify_exponential(cfg.spec, t0, sh, cc, report)
        except PreconditionError as exc:
            print(f"{kind} sigma={s} t0={t0}: precondition error: {exc}", file=sys.stderr)
            all_pass = False
            continue
        stem = f"certificate_{i:03d}"
        if "csv" in cfg.formats:
            cert.write(out, stem)
        elif "json" in cfg.formats:
            serialize.write_json(out / f"{stem}.json", cert)
        all_pass &= cert.passed
        print(f"{stem}: {kind} sigma={serialize.fmt_float(cert.inputs['sigma'])} "
              f"t0={serialize.fmt_float(t0)} -> {cert.verdict}")
        for c in cert.clauses:
            print(f"    {c.status:>14}  {c.kind:<10}  {c.name}")
    return EXIT_OK if all_pass else EXIT_CERTIFY


def cmd_sweep(args, cfg: RunConfig) -> int:
    report = _thresholds(cfg)
    cc = _certify_config(args, cfg)
    out = _out_dir(args, cfg)
    rows = sweep(cfg.spec, cfg.sigmas, cfg.t0s, cfg.shapes, cc, threads=args.threads, report=report)
    for i, row in enumerate(rows):
        if row.certificate is not None and "json" in cfg.formats:
            serialize.write_json(out / f"sweep_{i:03d}.json", row.certificate)
    serialize.write_csv(out / "summary.csv", ("index",) + SWEEP_COLUMNS,
                        ([i] + row.summary() for i, row in enumerate(rows)))
    for i, row in enumerate(rows):
        print(" ".join(str(x) for x in [i] + row.summary()[:7]))
    ok = all(r.certificate is not None and r.certificate.passed for r in rows)
    return EXIT_OK if ok else EXIT_CERTIFY


COMMANDS = {
    "check": (cmd_check, "verify the structural assumptions by sampling"),
    "thresholds": (cmd_thresholds, "compute the derived constants as JSON"),
    "simulate": (cmd_simulate, "integrate the initial data and export the trajectory CSV"),
    "certify": (cmd_certify, "run stability certificates"),
    "sweep": (cmd_sweep, "certify a (sigma, t0, shape) grid concurrently"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="TOML run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides [output] directory)")
    common.add_argument("--threads", type=int, default=None, metavar="N", help="sweep worker threads")
    common.add_argument("--horizon", type=float, default=None, metavar="T",
                        help="run length beyond t0 (overrides the configured horizon)")
    common.add_argument("--seed", type=int, default=None, metavar="N",
                        help="seed for randomized checks (no command here draws random numbers)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="pdestab", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.horizon is not None and not (args.horizon > 0 and math.isfinite(args.horizon)):
        print("error: --horizon must be a positive number", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load(args.config)
        fn, _ = COMMANDS[args.command]
        return fn(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssumptionError as exc:
        print(f"assumption error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except PdestabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CERTIFY


if __name__ == "__main__":
    sys.exit(main())
