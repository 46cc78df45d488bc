"""TOML run configuration: loading, key validation and conversion to domain objects."""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .certify import CertifyConfig
from .errors import ConfigError, ExprError
from .problem import DEFAULT_HORIZON, DEFAULT_SAMPLES, DeclaredBounds, ProblemSpec
from .solver import SolverConfig

EXPR_KEYS = ("eps", "C", "a", "F", "F_z", "eps_dot", "eps_ddot", "C_dot", "F_antideriv")
REAL_KEYS = ("a_prime", "k", "h", "A", "omega", "rho", "mu", "tau")
DECLARED_KEYS = ("eps_inf", "eps_ddot_inf", "C_inf", "g_sup", "g_growth", "g_intercept", "g_slope", "g_power")

SCHEMA = {
    "problem": set(EXPR_KEYS) | set(REAL_KEYS) | {"declared"},
    "problem.declared": set(DECLARED_KEYS),
    "grid": {"n_interior"},
    "time": {"dt", "t_end", "t0", "picard_tol", "picard_max", "save_every"},
    "certify": {"sigma", "t0", "shapes", "scale_fraction", "theta_margin", "xi_fraction", "xi_default",
                "horizon", "nu", "d0", "scan_horizon", "scan_samples", "exponential"},
    "output": {"directory", "formats", "snapshots"},
    "initial": {"u0", "u1", "scale"},
}
REQUIRED = {"problem": ("eps", "C", "a_prime")}
FORMATS = ("json", "csv")


@dataclass
class RunConfig:
    path: Path
    spec: ProblemSpec
    n_interior: int = 199
    dt: float = 0.01
    t_end: float = 10.0
    t0: float = 0.0
    picard_tol: float = 1e-10
    picard_max: int = 50
    save_every: int = 1
    sigmas: list = field(default_factory=list)
    t0s: list = field(default_factory=list)
    shapes: list = field(default_factory=lambda: [("sin(x)", "0")])
    certify: CertifyConfig = field(default_factory=CertifyConfig)
    exponential: bool = False
    output_dir: Path = Path("out")
    formats: tuple = FORMATS
    snapshots: list = field(default_factory=list)
    u0: str = "sin(x)"
    u1: str = "0"
    scale: float = 1.0
    scan_horizon: float = DEFAULT_HORIZON
    scan_samples: int = DEFAULT_SAMPLES

    def solver_config(self) -> SolverConfig:
        return SolverConfig(n_interior=self.n_interior, dt=self.dt, t_end=self.t_end,
                            picard_tol=self.picard_tol, picard_max=self.picard_max,
                            save_every=self.save_every)


def _key_line(text: str, table: str, key: str) -> int | None:
    """Line number (1-based) of ``key`` inside ``[table]``, if it can be found."""
    current = ""
    pat = re.compile(r"^\s*\"?" + re.escape(key) + r"\"?\s*=")
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"^\s*\[\s*([^\]]+?)\s*\]", line)
        if m:
            current = m.group(1)
            continue
        if current == table and pat.match(line):
            return i
    return None


def _table_line(text: str, table: str) -> int | None:
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"^\s*\[\s*([^\]]+?)\s*\]", line)
        if m and m.group(1) == table:
            return i
    return None


class _Ctx:
    def __init__(self, path, text):
        self.path = path
        self.text = text

    def error(self, table, key, message):
        line = _key_line(self.text, table, key) if key else _table_line(self.text, table)
        where = f"{self.path}:{line}" if line else str(self.path)
        loc = f"{table}.{key}" if key else table
        return ConfigError(f"{where}: [{loc}] {message}")

    def real(self, sec, table, key, default=None, positive=False):
        if key not in sec:
            if default is None:
                raise self.error(table, None, f"missing required key {key!r}")
            return default
        v = sec[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise self.error(table, key, f"expected a number, got {type(v).__name__}")
        if positive and not v > 0:
            raise self.error(table, key, "must be positive")
        return float(v)

    def integer(self, sec, table, key, default):
        v = sec.get(key, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise self.error(table, key, "expected an integer")
        return v

    def reals(self, sec, table, key):
        v = sec.get(key, [])
        if not isinstance(v, list):
            v = [v]
        for x in v:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise self.error(table, key, "expected a list of numbers")
        return [float(x) for x in v]


def _check_keys(ctx, data):
    for top, value in data.items():
        if top not in SCHEMA:
            raise ctx.error(top, None, "unknown section") if isinstance(value, dict) else \
                ctx.error("", top, "unknown top-level key")
        if not isinstance(value, dict):
            raise ctx.error("", top, "expected a table")
        for key, v in value.items():
            if key not in SCHEMA[top]:
                raise ctx.error(top, key, "unknown key")
            sub = f"{top}.{key}"
            if isinstance(v, dict):
                if sub not in SCHEMA:
                    raise ctx.error(top, key, "unexpected table")
                for k2 in v:
                    if k2 not in SCHEMA[sub]:
                        raise ctx.error(sub, k2, "unknown key")
    for top, keys in REQUIRED.items():
        if top not in data:
            raise ConfigError(f"{ctx.path}: missing required section [{top}]")
        for k in keys:
            if k not in data[top]:
                raise ctx.error(top, None, f"missing required key {k!r}")


def _decode_error(path, exc) -> ConfigError:
    line = getattr(exc, "lineno", None)
    col = getattr(exc, "colno", None)
    if line is None:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        if m:
            line, col = int(m.group(1)), int(m.group(2))
    msg = getattr(exc, "msg", None) or str(exc)
    return ConfigError(f"{path}:{line}:{col}: malformed TOML: {msg}")


def _problem(ctx, sec) -> ProblemSpec:
    kwargs = {}
    for key in EXPR_KEYS:
        if key in sec:
            v = sec[key]
            if isinstance(v, bool) or not isinstance(v, (str, int, float)):
                raise ctx.error("problem", key, "expected an expression string or number")
            kwargs[key] = v
    for key in REAL_KEYS:
        if key in sec:
            kwargs[key] = ctx.real(sec, "problem", key)
    if "declared" in sec:
        dec = dict(sec["declared"])
        for key, v in dec.items():
            if key == "g_growth":
                if not isinstance(v, str):
                    raise ctx.error("problem.declared", key, "expected a string")
            else:
                dec[key] = ctx.real(dec, "problem.declared", key)
        try:
            kwargs["declared"] = DeclaredBounds(**dec)
        except ValueError as exc:
            raise ctx.error("problem", "declared", str(exc)) from exc
    try:
        return ProblemSpec.build(**kwargs)
    except ExprError as exc:
        bad = next((k for k in EXPR_KEYS if k in sec and _bad_expr(k, sec[k])), None)
        raise ctx.error("problem", bad, f"invalid expression: {exc}") from exc
    except ValueError as exc:
        raise ctx.error("problem", None, str(exc)) from exc


def _bad_expr(key, value):
    try:
        ProblemSpec.build(**{key: value})
        return False
    except (ExprError, ValueError):
        return True


def _shapes(ctx, sec):
    if "shapes" not in sec:
        return [("sin(x)", "0")]
    raw = sec["shapes"]
    ok = isinstance(raw, list) and all(
        isinstance(s, list) and len(s) == 2 and all(isinstance(e, (str, int, float)) for e in s) for s in raw)
    if not ok:
        raise ctx.error("certify", "shapes", "expected a list of [u0, u1] expression pairs")
    return [(str(a), str(b)) for a, b in raw]


def load(path) -> RunConfig:
    """Read and validate a TOML run configuration (raises ConfigError)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read configuration: {exc.strerror}") from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise _decode_error(path, exc) from exc
    return from_dict(data, path, text)


def _resolve(config_path: Path, directory: str) -> Path:
    """Relative output directories are taken relative to the configuration file."""
    d = Path(directory)
    if d.is_absolute() or str(config_path).startswith("<"):
        return d
    return config_path.parent / d


def from_dict(data: dict, path="<config>", text: str = "") -> RunConfig:
    ctx = _Ctx(path, text)
    _check_keys(ctx, data)
    spec = _problem(ctx, data["problem"])

    grid = data.get("grid", {})
    time = data.get("time", {})
    cert = data.get("certify", {})
    out = data.get("output", {})
    init = data.get("initial", {})

    n_interior = ctx.integer(grid, "grid", "n_interior", 199)
    if n_interior < 3 or (n_interior + 1) % 2:
        raise ctx.error("grid", "n_interior", "must be >= 3 with n_interior + 1 even")

    dt = ctx.real(time, "time", "dt", 0.01, positive=True)
    t0 = ctx.real(time, "time", "t0", 0.0)
    t_end = ctx.real(time, "time", "t_end", t0 + 10.0)
    if t_end < t0:
        raise ctx.error("time", "t_end", "must be >= t0")
    picard_tol = ctx.real(time, "time", "picard_tol", 1e-10, positive=True)
    picard_max = ctx.integer(time, "time", "picard_max", 50)
    save_every = ctx.integer(time, "time", "save_every", 1)
    if save_every < 1:
        raise ctx.error("time", "save_every", "must be >= 1")

    scan_h = ctx.real(cert, "certify", "scan_horizon", DEFAULT_HORIZON, positive=True)
    scan_n = ctx.integer(cert, "certify", "scan_samples", DEFAULT_SAMPLES)
    horizon = ctx.real(cert, "certify", "horizon", -1.0)
    nu = ctx.real(cert, "certify", "nu", -1.0)
    d0 = ctx.real(cert, "certify", "d0", -1.0)
    cc = CertifyConfig(
        n_interior=n_interior, dt=dt,
        horizon=None if horizon < 0 else horizon,
        scale_fraction=ctx.real(cert, "certify", "scale_fraction", 0.9, positive=True),
        d0=None if d0 < 0 else d0,
        nu=None if nu < 0 else nu,
        xi_fraction=ctx.real(cert, "certify", "xi_fraction", 0.5, positive=True),
        theta_margin=ctx.real(cert, "certify", "theta_margin", 0.5, positive=True),
        xi_default=ctx.real(cert, "certify", "xi_default", 1.0, positive=True),
        picard_tol=picard_tol, picard_max=picard_max, scan_horizon=scan_h, scan_samples=scan_n,
    )
    exponential = cert.get("exponential", False)
    if not isinstance(exponential, bool):
        raise ctx.error("certify", "exponential", "expected true or false")

    formats = out.get("formats", list(FORMATS))
    if not isinstance(formats, list) or any(f not in FORMATS for f in formats):
        raise ctx.error("output", "formats", f"expected a subset of {list(FORMATS)}")
    directory = out.get("directory", "out")
    if not isinstance(directory, str):
        raise ctx.error("output", "directory", "expected a string")

    u0, u1 = init.get("u0", "sin(x)"), init.get("u1", "0")
    for key, v in (("u0", u0), ("u1", u1)):
        if isinstance(v, bool) or not isinstance(v, (str, int, float)):
            raise ctx.error("initial", key, "expected an expression string or number")

    return RunConfig(
        path=Path(path), spec=spec, n_interior=n_interior, dt=dt, t_end=t_end, t0=t0,
        picard_tol=picard_tol, picard_max=picard_max, save_every=save_every,
        sigmas=ctx.reals(cert, "certify", "sigma"),
        t0s=ctx.reals(cert, "certify", "t0") if "t0" in cert else [t0],
        shapes=_shapes(ctx, cert), certify=cc, exponential=exponential,
        output_dir=_resolve(Path(path), directory), formats=tuple(formats),
        snapshots=ctx.reals(out, "output", "snapshots"),
        u0=str(u0), u1=str(u1), scale=ctx.real(init, "initial", "scale", 1.0),
        scan_horizon=scan_h, scan_samples=scan_n,
    )
