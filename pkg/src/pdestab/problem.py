"""Problem definition and numerical checks of the standing hypotheses."""

from __future__ import annotations

import functools
import hashlib
import json
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import AssumptionError, DomainError
from .exprlang import Expr, as_expr, evaluate, evaluate_on, is_constant, is_zero, pretty

T_VARS = ("t",)
Z_VARS = ("z",)
A_VARS = ("x", "t", "u", "ux", "ut", "uxx")

DEFAULT_HORIZON = 1e3
DEFAULT_SAMPLES = 4096
Z_SAMPLES = 2049
# slack for sampled non-strict inequalities that hold with equality
# (finite-difference noise in derivatives of non-constant coefficients)
CLAUSE_TOL = 1e-9

GROWTH_CLASSES = ("bounded", "sublinear", "linear", "other")


@dataclass(frozen=True)
class DeclaredBounds:
    """User declarations that override scanned infima/suprema.

    ``g_growth`` describes how g(t) = C - eps_dot/2 + 1 behaves at infinity:
    "bounded" (sup g = g_sup), "linear" (g <= g_intercept + g_slope*t),
    "sublinear" (g <= g_intercept + g_slope*t^g_power, g_power < 1) or
    "other".
    """

    eps_inf: float | None = None
    eps_ddot_inf: float | None = None
    C_inf: float | None = None
    g_sup: float | None = None
    g_growth: str | None = None
    g_intercept: float | None = None
    g_slope: float | None = None
    g_power: float | None = None

    def __post_init__(self):
        if self.g_growth is not None and self.g_growth not in GROWTH_CLASSES:
            raise ValueError(f"g_growth must be one of {GROWTH_CLASSES}")
        if self.g_growth in ("linear", "sublinear"):
            if self.g_intercept is None or self.g_slope is None:
                raise ValueError(f"g_growth={self.g_growth!r} needs g_intercept and g_slope")
        if self.g_growth == "sublinear" and not (self.g_power is not None and 0 <= self.g_power < 1):
            raise ValueError("sublinear growth needs 0 <= g_power < 1")


@dataclass(frozen=True)
class ProblemSpec:
    eps: Expr
    C: Expr
    a_prime: float
    a: Expr
    F: Expr
    F_z: Expr
    k: float
    h: float
    A: float
    omega: float
    rho: float
    mu: float
    tau: float
    eps_dot: Expr | None = None
    eps_ddot: Expr | None = None
    C_dot: Expr | None = None
    F_antideriv: Expr | None = None
    declared: DeclaredBounds = field(default_factory=DeclaredBounds)

    def __post_init__(self):
        for name in ("k", "h", "A"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("omega", "rho", "mu", "tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @classmethod
    def build(cls, *, eps="0", C="1", a_prime=0.0, a="0", F="0", F_z="0", k=0.0, h=0.0,
              A=0.0, omega=1.0, rho=1.0, mu=1.0, tau=1.0, eps_dot=None, eps_ddot=None,
              C_dot=None, F_antideriv=None, declared=None):
        """Construct from strings (or numbers, or Exprs), checking variable roles."""
        opt = lambda e, v: None if e is None else as_expr(e, v)  # noqa: E731
        if isinstance(declared, dict):
            declared = DeclaredBounds(**declared)
        return cls(
            eps=as_expr(eps, T_VARS), C=as_expr(C, T_VARS), a_prime=float(a_prime),
            a=as_expr(a, A_VARS), F=as_expr(F, Z_VARS), F_z=as_expr(F_z, Z_VARS),
            k=float(k), h=float(h), A=float(A), omega=float(omega), rho=float(rho),
            mu=float(mu), tau=float(tau),
            eps_dot=opt(eps_dot, T_VARS), eps_ddot=opt(eps_ddot, T_VARS),
            C_dot=opt(C_dot, T_VARS), F_antideriv=opt(F_antideriv, Z_VARS),
            declared=declared or DeclaredBounds(),
        )

    # coefficient evaluators; all accept scalar or array t

    def eps_at(self, t):
        return evaluate(self.eps, t=t)

    def eps_dot_at(self, t):
        if self.eps_dot is not None:
            return evaluate(self.eps_dot, t=t)
        return derivative_of(self.eps, t)

    def eps_ddot_at(self, t):
        if self.eps_ddot is not None:
            return evaluate(self.eps_ddot, t=t)
        if self.eps_dot is not None:
            return derivative_of(self.eps_dot, t)
        return derivative_of(self.eps, t, order=2)

    def C_at(self, t):
        return evaluate(self.C, t=t)

    def C_dot_at(self, t):
        if self.C_dot is not None:
            return evaluate(self.C_dot, t=t)
        return derivative_of(self.C, t)

    def g_at(self, t):
        """g(t) = C - eps_dot/2 + 1."""
        return self.C_at(t) - 0.5 * self.eps_dot_at(t) + 1.0

    def F_at(self, z):
        return evaluate(self.F, z=z)

    def F_z_at(self, z):
        return evaluate(self.F_z, z=z)

    @property
    def is_linear_free(self) -> bool:
        """True when both a and F vanish identically (no Picard work needed)."""
        return is_zero(self.a) and is_zero(self.F)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Expr):
                value = pretty(value)
            elif isinstance(value, DeclaredBounds):
                value = {k: v for k, v in vars(value).items() if v is not None}
            out[f.name] = value
        return out

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, default=repr)
        return hashlib.sha256(text.encode()).hexdigest()


# ------------------------------------------------------------ derivatives

_CENTRAL = {1: (np.array([1, -8, 0, 8, -1]) / 12.0, np.arange(-2, 3)),
            2: (np.array([-1, 16, -30, 16, -1]) / 12.0, np.arange(-2, 3))}
_FORWARD = {1: (np.array([-25, 48, -36, 16, -3]) / 12.0, np.arange(0, 5)),
            2: (np.array([45, -154, 214, -156, 61, -10]) / 12.0, np.arange(0, 6))}


def derivative_of(f: Expr, t, order: int = 1):
    """Fourth-order finite-difference derivative of an expression in t.

    Uses a central stencil; falls back to a forward stencil when the
    expression is undefined to the left of t (e.g. sqrt(t) at t = 0).
    """
    if is_constant(f):
        return 0.0 if np.ndim(t) == 0 else np.zeros(np.shape(t))
    t = np.asarray(t, dtype=float)
    step = 1e-3 * np.maximum(1.0, np.abs(t))
    for weights, offsets in (_CENTRAL[order], _FORWARD[order]):
        try:
            acc = sum(w * evaluate_on(f, t.shape, t=t + o * step) for w, o in zip(weights, offsets) if w)
        except DomainError:
            continue
        out = acc / step**order
        return float(out) if out.ndim == 0 else out
    raise DomainError(f"cannot differentiate {pretty(f)!r} near t={t}")


# --------------------------------------------------------------- scanning


@dataclass(frozen=True)
class Extremum:
    value: float
    source: str  # "scanned" | "declared"
    at: float | None = None


def scan_grid(horizon=DEFAULT_HORIZON, samples=DEFAULT_SAMPLES) -> np.ndarray:
    """Log-dense sample grid on [0, horizon]: geometric near 0, uniform beyond."""
    if not horizon > 0 or samples < 2:
        raise ValueError("need horizon > 0 and samples >= 2")
    half = max(samples // 2, 1)
    geo = np.geomspace(min(1e-4, horizon / samples), horizon, samples - half)
    lin = np.linspace(0.0, horizon, half + 1)
    return np.unique(np.concatenate([[0.0], geo, lin]))


def scan_inf_sup(f, horizon=DEFAULT_HORIZON, samples=DEFAULT_SAMPLES, declared_inf=None,
                 declared_sup=None):
    """Approximate (inf, sup) of f(t) over [0, horizon].

    ``f`` is an Expr in t or a vectorized callable.  Declared values
    override the scan; each side is returned as an Extremum.
    """
    t = scan_grid(horizon, samples)
    if isinstance(f, Expr):
        values = evaluate_on(f, t.shape, t=t)
    else:
        values = np.broadcast_to(np.asarray(f(t), dtype=float), t.shape)
    i, j = int(np.argmin(values)), int(np.argmax(values))
    lo = Extremum(float(values[i]), "scanned", float(t[i]))
    hi = Extremum(float(values[j]), "scanned", float(t[j]))
    if declared_inf is not None:
        lo = Extremum(float(declared_inf), "declared")
    if declared_sup is not None:
        hi = Extremum(float(declared_sup), "declared")
    return lo, hi


@dataclass(frozen=True)
class ScannedConstants:
    """inf/sup constants of the time-dependent coefficients."""

    eps_inf: Extremum
    eps_sup: Extremum
    eps_ddot_inf: Extremum
    C_inf: Extremum
    g_sup: Extremum
    g_growth: str  # declared class, or inferred "bounded" / "undetermined"
    g_growth_source: str


@functools.lru_cache(maxsize=64)
def scan_constants(spec: ProblemSpec, horizon=DEFAULT_HORIZON, samples=DEFAULT_SAMPLES):
    dec = spec.declared
    eps_inf, eps_sup = scan_inf_sup(spec.eps, horizon, samples, dec.eps_inf)
    eps_ddot_inf, _ = scan_inf_sup(spec.eps_ddot_at, horizon, samples, dec.eps_ddot_inf)
    C_inf, _ = scan_inf_sup(spec.C, horizon, samples, dec.C_inf)
    _, g_sup = scan_inf_sup(spec.g_at, horizon, samples, None, dec.g_sup)

    if dec.g_growth is not None:
        growth, source = dec.g_growth, "declared"
    elif dec.g_sup is not None:
        growth, source = "bounded", "declared"
    else:
        # bounded if the late half of the scan never exceeds the early half
        t = scan_grid(horizon, samples)
        g = np.broadcast_to(np.asarray(spec.g_at(t), dtype=float), t.shape)
        late = t >= horizon / 2
        if g[late].max() <= g[~late].max() * (1 + 1e-12):
            growth, source = "bounded", "scanned"
        else:
            growth, source = "undetermined", "scanned"
    if growth != "bounded" and g_sup.source == "scanned":
        g_sup = Extremum(math.inf, "scanned")
    return ScannedConstants(eps_inf, eps_sup, eps_ddot_inf, C_inf, g_sup, growth, source)


# ------------------------------------------------------------ assumptions


@dataclass
class Clause:
    name: str
    status: str  # "pass" | "fail" | "declared-only"
    margin: float | None = None
    worst_point: dict | None = None
    note: str = ""


@dataclass
class AssumptionReport:
    clauses: list
    horizon: float
    samples: int

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.clauses)

    def clause(self, name) -> Clause:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {
            "passed": self.passed,
            "horizon": self.horizon,
            "samples": self.samples,
            "clauses": [vars(c) for c in self.clauses],
        }


def _clause(name, margin, strict, worst=None, note=""):
    ok = margin > 0 if strict else margin >= -CLAUSE_TOL
    return Clause(name, "pass" if ok else "fail", float(margin), worst, note)


def verify_assumptions_I(spec: ProblemSpec, horizon=DEFAULT_HORIZON, samples=DEFAULT_SAMPLES,
                         gamma=None) -> AssumptionReport:
    """Check the structural hypotheses by sampling.

    Every margin is oriented so that a nonnegative (strict clauses:
    positive) value means the clause holds.  If ``gamma`` is given the
    eventual-smallness condition on C_dot is checked at that gamma;
    otherwise the weaker "C_dot <= 0 or C_dot -> 0" form is checked.
    """
    consts = scan_constants(spec, horizon, samples)
    t = scan_grid(horizon, samples)
    shape = t.shape
    clauses = []

    clauses.append(_clause("eps >= 0", consts.eps_inf.value, False, {"t": consts.eps_inf.at}))
    clauses.append(_clause("C_inf > 0", consts.C_inf.value, True))

    F0 = spec.F_at(0.0)
    clauses.append(_clause("F(0) = 0", 1e-12 - abs(F0), False, note=f"F(0)={F0:.3e}"))

    z = np.linspace(-spec.rho + 1e-9, spec.rho - 1e-9, Z_SAMPLES)
    gap = spec.k + spec.h * np.abs(z) ** spec.omega - evaluate_on(spec.F_z, z.shape, z=z)
    i = int(np.argmin(gap))
    clauses.append(_clause("F_z <= k + h|z|^omega on |z| < rho", gap[i], False, {"z": float(z[i])}))

    clauses.append(_clause("C_inf > k", consts.C_inf.value - spec.k, True))

    C = np.broadcast_to(np.asarray(spec.C_at(t), dtype=float), shape)
    eps = np.broadcast_to(np.asarray(spec.eps_at(t), dtype=float), shape)
    eps_dot = np.broadcast_to(np.asarray(spec.eps_dot_at(t), dtype=float), shape)
    gap = C - eps_dot - spec.mu * (1 + eps)
    i = int(np.argmin(gap))
    clauses.append(_clause("C - eps_dot >= mu(1 + eps)", gap[i], False, {"t": float(t[i])}))

    clauses.append(_clause("mu + C_inf/2 - 2k > 0", spec.mu + consts.C_inf.value / 2 - 2 * spec.k, True))

    ed = consts.eps_ddot_inf.value
    clauses.append(Clause("eps_ddot_inf > -inf", "pass" if math.isfinite(ed) else "fail", ed,
                          note=consts.eps_ddot_inf.source))

    a_min, where = _scan_damping(spec, t)
    clauses.append(_clause("a >= 0 on sampled state box", a_min, False, where))
    clauses.append(Clause("a <= A d^tau", "declared-only", None,
                          note="not checkable pointwise; enforced by user declaration of A, tau"))
    clauses.append(_clause("a' + eps_inf/2 > 0", spec.a_prime + consts.eps_inf.value / 2, True))

    Cd = np.broadcast_to(np.asarray(spec.C_dot_at(t), dtype=float), shape)
    if gamma is not None:
        try:
            tb = verify_assumption_II(spec, gamma, horizon, samples)
            clauses.append(Clause("C_dot (1 + gamma) <= 1 for t >= t_bar", "pass", -tb,
                                  {"t_bar": tb, "gamma": gamma}))
        except AssumptionError as exc:
            clauses.append(Clause("C_dot (1 + gamma) <= 1 for t >= t_bar", "fail", None,
                                  {"gamma": gamma}, str(exc)))
    elif Cd.max() <= 0:
        clauses.append(Clause("C_dot <= 0 or C_dot -> 0", "pass", float(-Cd.max()), note="C_dot <= 0"))
    else:
        tail = abs(float(Cd[-1]))
        status = "pass" if tail < 1e-6 else "fail"
        clauses.append(Clause("C_dot <= 0 or C_dot -> 0", status, 1e-6 - tail, {"t": float(t[-1])},
                              "C_dot at horizon end"))
    return AssumptionReport(clauses, horizon, samples)


def _scan_damping(spec, t_grid, n_state=5, n_x=9, n_t=32):
    if is_constant(spec.a):
        return float(evaluate(spec.a)), None
    r = spec.rho
    s = np.linspace(-r, r, n_state)
    x = np.linspace(0.0, math.pi, n_x)
    t = t_grid[np.linspace(0, len(t_grid) - 1, min(n_t, len(t_grid))).astype(int)]
    X, T, U, UX, UT, UXX = np.meshgrid(x, t, s, s, s, s, indexing="ij", sparse=True)
    vals = evaluate_on(spec.a, np.broadcast_shapes(X.shape, T.shape, U.shape, UX.shape, UT.shape, UXX.shape),
                       x=X, t=T, u=U, ux=UX, ut=UT, uxx=UXX)
    idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
    grids = (x, t, s, s, s, s)
    names = ("x", "t", "u", "ux", "ut", "uxx")
    where = {n: float(g[i]) for n, g, i in zip(names, grids, idx)}
    return float(vals[idx]), where


def verify_assumption_II(spec: ProblemSpec, gamma: float, horizon=DEFAULT_HORIZON,
                         samples=DEFAULT_SAMPLES) -> float:
    """Smallest sampled t_bar with C_dot(t)(1 + gamma) <= 1 for all sampled t >= t_bar."""
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    t = scan_grid(horizon, samples)
    Cd = np.broadcast_to(np.asarray(spec.C_dot_at(t), dtype=float), t.shape)
    if Cd.max() <= 0:
        return 0.0
    ok = Cd * (1 + gamma) <= 1.0
    if not ok[-1]:
        raise AssumptionError(
            f"C_dot (1 + gamma) <= 1 not reached within horizon {horizon} (gamma={gamma})"
        )
    bad = np.flatnonzero(~ok)
    return 0.0 if bad.size == 0 else float(t[bad[-1] + 1])
