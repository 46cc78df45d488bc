"""
Verification runs: integrate from data scaled to the admissible radius
and check each conclusion of the stability result along the trajectory.

Every clause is tagged as a hypothesis or a conclusion, so a run whose
hypotheses fail ("hypothesis-not-met") is never confused with a run
that contradicts the result ("conclusion-violated").
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import serialize
from .errors import AssumptionError, BlowUpError, PdestabError, PreconditionError
from .grid import Grid, d_norm_eps
from .liapunov import MONOTONE_ABS, MONOTONE_REL_FACTOR, B, LiapunovParams, W, monotone_slack
from .problem import DEFAULT_HORIZON, DEFAULT_SAMPLES, ProblemSpec, verify_assumptions_I
from .solver import SolverConfig, Trajectory, initial_state, integrate_state
from .thresholds import (
    ThresholdReport,
    comparison_y,
    compute_thresholds,
    decay_envelope,
    delta_detail,
)

SCHEMA = "pdestab.certificate/1"
COMPARISON_RTOL = 1e-6
SERIES_COLUMNS = ("t", "d", "W", "lower_bound", "upper_bound", "y_comparison", "envelope")


@dataclass(frozen=True)
class CertifyConfig:
    n_interior: int = 199
    dt: float = 0.01
    horizon: float | None = None  # run length beyond t0; None -> max(200, 10/E)
    scale_fraction: float = 0.9
    d0: float | None = None  # overrides the scaling when given
    nu: float | None = None  # settling tolerance; None -> d(t0)/2
    xi_fraction: float = 0.5
    theta_margin: float = 0.5
    xi_default: float = 1.0
    picard_tol: float = 1e-10
    picard_max: int = 50
    scan_horizon: float = DEFAULT_HORIZON
    scan_samples: int = DEFAULT_SAMPLES

    def solver(self, t_end: float) -> SolverConfig:
        return SolverConfig(n_interior=self.n_interior, dt=self.dt, t_end=t_end,
                            picard_tol=self.picard_tol, picard_max=self.picard_max)


@dataclass
class ClauseResult:
    name: str
    kind: str  # "hypothesis" | "conclusion"
    status: str  # "pass" | "fail" | "not-applicable"
    margin: float | None = None
    first_violation: float | None = None
    note: str = ""

    def to_dict(self):
        return {"name": self.name, "kind": self.kind, "status": self.status, "margin": self.margin,
                "first_violation": self.first_violation, "note": self.note}


def _check(name, kind, ok, margin=None, first=None, note=""):
    return ClauseResult(name, kind, "pass" if ok else "fail",
                        None if margin is None else float(margin), first, note)


@dataclass
class Certificate:
    kind: str  # "stability" | "exponential"
    problem_digest: str
    inputs: dict
    thresholds: dict
    clauses: list
    settling: dict
    diagnostics: dict
    series: dict = field(default_factory=dict, repr=False)
    trajectory_files: list = field(default_factory=list)

    def clause(self, name) -> ClauseResult:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def hypotheses_met(self) -> bool:
        return all(c.status != "fail" for c in self.clauses if c.kind == "hypothesis")

    @property
    def conclusions_hold(self) -> bool:
        return all(c.status != "fail" for c in self.clauses if c.kind == "conclusion")

    @property
    def passed(self) -> bool:
        return self.hypotheses_met and self.conclusions_hold

    @property
    def verdict(self) -> str:
        if self.passed:
            return "pass"
        return "hypothesis-not-met" if not self.hypotheses_met else "conclusion-violated"

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "kind": self.kind,
            "verdict": self.verdict,
            "passed": self.passed,
            "problem_digest": self.problem_digest,
            "inputs": self.inputs,
            "thresholds": self.thresholds,
            "clauses": [c.to_dict() for c in self.clauses],
            "settling": self.settling,
            "diagnostics": self.diagnostics,
            "trajectory_files": list(self.trajectory_files),
        }

    def write(self, directory, stem="certificate"):
        """Write <stem>.json and the <stem>_trajectory.csv time series."""
        directory = Path(directory)
        csv_path = serialize.write_columns(directory / f"{stem}_trajectory.csv",
                                           {k: self.series[k] for k in SERIES_COLUMNS})
        self.trajectory_files = [csv_path.name]
        json_path = serialize.write_json(directory / f"{stem}.json", self)
        return json_path, csv_path


def measure_settling(times, d, nu: float) -> float:
    """Smallest sampled T with d(t) < nu for every sampled t >= t0 + T (inf if none)."""
    times = np.asarray(times, dtype=float)
    d = np.asarray(d, dtype=float)
    if not nu > 0:
        return math.inf
    bad = np.flatnonzero(d >= nu)
    if bad.size == 0:
        return 0.0
    last = bad[-1]
    if last == len(d) - 1:
        return math.inf
    return float(times[last + 1] - times[0])


def _first_violation(times, ok):
    bad = np.flatnonzero(~ok)
    return None if bad.size == 0 else float(times[bad[0]])


def default_horizon(report: ThresholdReport) -> float:
    E = report.E
    return max(200.0, 10.0 / E) if E is not None and E > 0 else 200.0


def _scaled_state(spec, shape, t0, grid, target):
    u0, u1 = shape
    base = initial_state(u0, u1, grid)
    d_base = d_norm_eps(base, spec.eps_at(t0), grid)
    if d_base == 0 or target == 0:
        return base.scaled(0.0)
    return base.scaled(target / d_base)


def _certify(spec: ProblemSpec, sigma: float, t0: float, shape, config: CertifyConfig,
             report: ThresholdReport, kind: str) -> Certificate:
    xi, kappa = report.xi, report.kappa
    if not 0 < sigma < xi:
        raise PreconditionError(f"need 0 < sigma < xi = {xi:.6g}, got sigma = {sigma:.6g}")
    if kappa is None:
        raise PreconditionError("Assumption II fails: no admissible initial time")
    if t0 < kappa:
        raise PreconditionError(f"need t0 >= kappa = {kappa:.6g}")

    theta = report.theta_used
    consts = report.consts
    gamma = report.gamma3_of_sigma(sigma)
    params = LiapunovParams(gamma, theta)
    clauses = []

    aI = verify_assumptions_I(spec, config.scan_horizon, config.scan_samples, gamma=gamma)
    failed = [c.name for c in aI.clauses if c.status == "fail"]
    clauses.append(_check("assumptions_I", "hypothesis", aI.passed, note="; ".join(failed)))
    clauses.append(_check("assumption_II", "hypothesis", True, margin=-kappa, note=f"kappa = {kappa:.6g}"))
    note = "" if sigma < report.rho2 else f"sigma >= rho2 = {report.rho2:.6g}"
    clauses.append(_check("sigma", "hypothesis", sigma < report.rho2, margin=xi - sigma, note=note))
    clauses.append(_check("t0", "hypothesis", True, margin=t0 - kappa))

    dd = delta_detail(sigma, t0, spec, theta, consts)
    dlt = dd.value
    clauses.append(_check("delta", "hypothesis", dlt > 0, margin=dlt,
                          note=f"first = {dd.first:.6g}, second = {dd.second:.6g}, S via {dd.S.method}"))

    grid = Grid(config.n_interior)
    target = config.d0 if config.d0 is not None else config.scale_fraction * dlt
    state0 = _scaled_state(spec, shape, t0, grid, target)
    d0 = d_norm_eps(state0, spec.eps_at(t0), grid)
    clauses.append(_check("d_t0", "hypothesis", d0 < dlt, margin=dlt - d0))

    horizon = config.horizon if config.horizon is not None else default_horizon(report)
    traj = integrate_state(state0, spec, t0, config.solver(t0 + horizon))
    series = trajectory_series(traj, spec, report, params, sigma, t0)
    t, d, Wt = series["t"], series["d"], series["W"]

    ok = d < sigma
    clauses.append(_check("d_below_sigma", "conclusion", ok.all(), margin=np.min(sigma - d),
                          first=_first_violation(t, ok)))

    slack = np.array([monotone_slack(config.dt, grid.spacing, w) for w in Wt[:-1]])
    inc = np.diff(Wt)
    ok_m = inc <= slack
    clauses.append(_check("W_monotone", "conclusion", ok_m.all(), margin=np.min(slack - inc) if inc.size else 0.0,
                          first=_first_violation(t[1:], ok_m),
                          note=f"slack = {MONOTONE_ABS:g} + {MONOTONE_REL_FACTOR:g} (dt^2 + dx^2) |W|"))

    y = series["y_comparison"]
    if np.all(np.isnan(y)):
        clauses.append(ClauseResult("comparison_envelope", "conclusion", "not-applicable",
                                    note=series["_y_note"]))
    else:
        ok_y = Wt <= y * (1 + COMPARISON_RTOL)
        clauses.append(_check("comparison_envelope", "conclusion", ok_y.all(),
                              margin=np.min(y * (1 + COMPARISON_RTOL) - Wt), first=_first_violation(t, ok_y),
                              note=f"W <= y (1 + {COMPARISON_RTOL:g})"))

    nu = config.nu if config.nu is not None else d0 / 2
    T = measure_settling(t, d, nu) if d0 > 0 else 0.0
    if d0 == 0:
        clauses.append(ClauseResult("settling", "conclusion", "not-applicable", note="zero initial data"))
    else:
        clauses.append(_check("settling", "conclusion", math.isfinite(T),
                              margin=(t[-1] - t0) - T if math.isfinite(T) else None,
                              note=f"nu = {nu:.6g}"))

    env = series["envelope"]
    env_diag = series["_envelope"]
    if np.all(np.isnan(env)):
        clauses.append(ClauseResult("exponential_envelope", "conclusion", "not-applicable",
                                    note=env_diag.get("note", "")))
    else:
        ok_e = d <= env * (1 + 1e-12)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(env > 0, d / env, 0.0)
        env_diag["worst_ratio"] = float(np.max(ratio))
        clauses.append(_check("exponential_envelope", "conclusion", ok_e.all(), margin=1 - np.max(ratio),
                              first=_first_violation(t, ok_e), note="d <= D exp(-E (t - t0)) d(t0)"))

    inputs = {
        "sigma": sigma, "t0": t0, "shape": {"u0": str(shape[0]), "u1": str(shape[1])},
        "config": {k: getattr(config, k) for k in config.__dataclass_fields__},
        "horizon": horizon, "gamma": gamma, "theta": theta, "d0": d0, "delta": dlt,
    }
    diagnostics = {
        "monotone_slack": {"abs": MONOTONE_ABS, "rel_factor": MONOTONE_REL_FACTOR,
                           "max_slack": float(slack.max()) if slack.size else 0.0},
        "picard_max_iterations": max(traj.picard_iterations, default=0),
        "step_halvings": traj.halvings,
        "assumptions_I": aI.to_dict(),
        "envelope": env_diag,
        "d_max": float(d.max()),
        "d_final": float(d[-1]),
    }
    return Certificate(
        kind=kind,
        problem_digest=spec.digest(),
        inputs=inputs,
        thresholds=report.to_dict(),
        clauses=clauses,
        settling={"nu": nu, "T": T},
        diagnostics=diagnostics,
        series={k: v for k, v in series.items() if not k.startswith("_")},
    )


def trajectory_series(traj: Trajectory, spec: ProblemSpec, report: ThresholdReport,
                      params: LiapunovParams, sigma: float, t0: float) -> dict:
    """Time series of d, W, the sandwich bounds, the comparison curve and the envelope."""
    grid = traj.grid
    t = traj.times
    n = len(t)
    d = np.empty(n)
    Wt = np.empty(n)
    for i in range(n):
        s = traj.state(i)
        d[i] = d_norm_eps(s, spec.eps_at(t[i]), grid)
        Wt[i] = W(s, t[i], spec, params, grid)
    g = np.broadcast_to(np.asarray(spec.g_at(t), dtype=float), t.shape)
    lower = report.chi * d**2
    upper = (1 + params.gamma) * g * np.array([B(x, spec) ** 2 for x in d])

    y_note = ""
    try:
        y = comparison_y(t, t0, Wt[0], sigma, spec, params.theta, report.consts)
    except BlowUpError as exc:
        y = np.full(n, np.nan)
        y_note = str(exc)

    env = np.full(n, np.nan)
    diag = {}
    if report.E is None:
        diag["note"] = "sup g is infinite"
    else:
        sig_e = report.params_sigma
        try:
            dd = delta_detail(sig_e, t0, spec, params.theta, report.consts)
            p_e = LiapunovParams(report.gamma3_of_sigma(sig_e), params.theta)
            W0 = W(traj.state(0), t0, spec, p_e, grid)
            e = decay_envelope(spec, params.theta, report.xi, t0, W0, report.xi_fraction, report.consts, dd.S)
            diag.update(D=e.D, E=e.E, Delta=e.Delta, D_printed_exponent=e.D_printed_exponent,
                        delta_envelope=dd.value)
            if d[0] < dd.value:
                env = e.D * np.exp(-e.E * (t - t0)) * d[0]
            else:
                diag["note"] = f"d(t0) = {d[0]:.6g} is not below delta(xi/2, t0) = {dd.value:.6g}"
        except AssumptionError as exc:
            diag["note"] = str(exc)
    return {"t": t, "d": d, "W": Wt, "lower_bound": lower, "upper_bound": upper,
            "y_comparison": y, "envelope": env, "_y_note": y_note, "_envelope": diag}


def _report(spec, config, report):
    if report is not None:
        return report
    return compute_thresholds(spec, config.theta_margin, config.xi_default, config.xi_fraction,
                              config.scan_horizon, config.scan_samples)


def certify_stability(spec: ProblemSpec, sigma: float, t0: float, shape=("sin(x)", "0"),
                      config: CertifyConfig | None = None,
                      report: ThresholdReport | None = None) -> Certificate:
    """Scale ``shape`` to d(t0) = 0.9 delta(sigma, t0), integrate, and check every clause."""
    config = config or CertifyConfig()
    return _certify(spec, sigma, t0, shape, config, _report(spec, config, report), "stability")


def certify_exponential(spec: ProblemSpec, t0: float, shape=("sin(x)", "0"),
                        config: CertifyConfig | None = None,
                        report: ThresholdReport | None = None) -> Certificate:
    """Run at sigma = xi_fraction * xi and check d <= D exp(-E (t - t0)) d(t0)."""
    config = config or CertifyConfig()
    report = _report(spec, config, report)
    return _certify(spec, report.params_sigma, t0, shape, config, report, "exponential")


@dataclass
class SweepRow:
    sigma: float
    t0: float
    shape: tuple
    certificate: Certificate | None
    error: str | None = None

    def summary(self):
        c = self.certificate
        if c is None:
            return [self.sigma, self.t0, self.shape[0], self.shape[1], None, None, "error", self.error]
        d = c.inputs
        return [self.sigma, self.t0, self.shape[0], self.shape[1], d["delta"], d["d0"], c.verdict,
                ";".join(x.name for x in c.clauses if x.status == "fail")]


SWEEP_COLUMNS = ("sigma", "t0", "u0", "u1", "delta", "d0", "verdict", "failed_clauses")


def sweep(spec: ProblemSpec, sigmas, t0s, shapes, config: CertifyConfig | None = None,
          threads: int | None = None, report: ThresholdReport | None = None) -> list:
    """Certify every (sigma, t0, shape) combination; rows come back in product order."""
    config = config or CertifyConfig()
    items = [(s, t, tuple(sh)) for s in sigmas for t in t0s for sh in shapes]
    if not items:
        return []
    report = _report(spec, config, report)

    def run(item):
        s, t, sh = item
        try:
            return SweepRow(s, t, sh, certify_stability(spec, s, t, sh, config, report))
        except (PdestabError, ValueError) as exc:
            return SweepRow(s, t, sh, None, f"{type(exc).__name__}: {exc}")

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, items))


__all__ = [
    "SCHEMA", "CertifyConfig", "ClauseResult", "Certificate", "measure_settling", "certify_stability",
    "certify_exponential", "sweep", "SweepRow", "SWEEP_COLUMNS", "trajectory_series", "default_horizon",
]
