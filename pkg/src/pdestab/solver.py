"""
Method-of-lines integrator for

    u_tt - eps(t) u_xxt - C(t) u_xx + (a' + a) u_t = F(u),   u(0) = u(pi) = 0,

written as u_t = v, v_t = eps v_xx + C u_xx - (a' + a) v + F(u).

Time stepping is trapezoidal.  The terms eps v_xx, C u_xx and a' v are
implicit (one tridiagonal solve per sweep after eliminating u^{n+1});
a v and F(u) are resolved by Picard sweeps, with a(...) using the
previous sweep's derivatives.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import DomainError, SolverError
from .exprlang import as_expr, evaluate, evaluate_on, free_variables, is_zero
from .grid import Grid, GridState, dx, dxx
from .problem import ProblemSpec

MAX_HALVINGS = 6


@dataclass(frozen=True)
class SolverConfig:
    n_interior: int = 199
    dt: float = 0.01
    t_end: float = 1.0
    picard_tol: float = 1e-10
    picard_max: int = 50
    save_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.save_every < 1:
            raise ValueError("save_every must be >= 1")


@dataclass
class Trajectory:
    times: np.ndarray
    u: np.ndarray  # (n_saved, n_nodes)
    v: np.ndarray
    grid: Grid
    picard_iterations: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    halvings: int = 0

    def state(self, i) -> GridState:
        return GridState(self.u[i], self.v[i])

    def __len__(self):
        return len(self.times)


def _laplacian(s, h2):
    """Dirichlet interior Laplacian of an interior vector."""
    out = -2.0 * s
    out[1:] += s[:-1]
    out[:-1] += s[1:]
    return out / h2


class _Stepper:
    """Holds the grid-dependent pieces and a cached tridiagonal factorization."""

    def __init__(self, spec: ProblemSpec, grid: Grid, config: SolverConfig):
        self.spec = spec
        self.grid = grid
        self.config = config
        self.h2 = grid.spacing**2
        self.n = grid.n_interior
        self._key = None
        self._lu = None
        self.linear = spec.is_linear_free

    def _factor(self, dt, eps1, C1):
        key = (dt, eps1, C1)
        if key != self._key:
            coef = (0.5 * dt * eps1 + 0.25 * dt * dt * C1) / self.h2
            diag = np.full(self.n, 1.0 + 0.5 * dt * self.spec.a_prime + 2 * coef)
            off = np.full(self.n - 1, -coef)
            dl, d, du, du2, ipiv, info = lapack.dgttrf(off, diag, off)
            if info != 0:
                raise SolverError("singular implicit matrix")
            self._lu = (dl, d, du, du2, ipiv)
            self._key = key
        return self._lu

    def _solve(self, lu, rhs):
        x, info = lapack.dgttrs(*lu, rhs)
        if info != 0:
            raise SolverError("tridiagonal solve failed")
        return x

    def nonlinear(self, u_full, v_full, t):
        """-a v + F(u) at interior nodes."""
        spec = self.spec
        out = np.zeros(self.n)
        if not is_zero(spec.F):
            out += evaluate_on(spec.F, (self.n,), z=u_full[1:-1])
        if not is_zero(spec.a):
            names = free_variables(spec.a)
            env = {"x": self.grid.x, "t": t, "u": u_full, "ut": v_full}
            if "ux" in names:
                env["ux"] = dx(u_full, self.grid)
            if "uxx" in names:
                env["uxx"] = dxx(u_full, self.grid)
            a = evaluate_on(spec.a, u_full.shape, env)
            out -= a[1:-1] * v_full[1:-1]
        return out

    def step(self, u, v, t, dt):
        """One trapezoidal step on full-length arrays. Returns (u, v, sweeps, residual)."""
        spec = self.spec
        eps0, C0 = spec.eps_at(t), spec.C_at(t)
        eps1, C1 = spec.eps_at(t + dt), spec.C_at(t + dt)
        ui, vi = u[1:-1], v[1:-1]
        Lu, Lv = _laplacian(ui, self.h2), _laplacian(vi, self.h2)
        base = (vi + 0.5 * dt * (eps0 * Lv + C0 * Lu - spec.a_prime * vi)
                + 0.5 * dt * C1 * (Lu + 0.5 * dt * Lv))
        lu = self._factor(dt, eps1, C1)

        u_new = np.zeros_like(u)
        v_new = np.zeros_like(v)
        if self.linear:
            v_new[1:-1] = self._solve(lu, base)
            u_new[1:-1] = ui + 0.5 * dt * (vi + v_new[1:-1])
            return u_new, v_new, 1, 0.0

        N0 = self.nonlinear(u, v, t)
        N1 = N0
        residual = math.inf
        for sweep in range(1, self.config.picard_max + 1):
            vn = self._solve(lu, base + 0.5 * dt * (N0 + N1))
            un = ui + 0.5 * dt * (vi + vn)
            if sweep > 1:
                residual = max(np.max(np.abs(vn - v_new[1:-1])), np.max(np.abs(un - u_new[1:-1])))
            v_new[1:-1], u_new[1:-1] = vn, un
            if not (np.all(np.isfinite(vn)) and np.all(np.isfinite(un))):
                raise SolverError("non-finite values")
            if residual <= self.config.picard_tol:
                return u_new, v_new, sweep, residual
            N1 = self.nonlinear(u_new, v_new, t + dt)
        return None


def step(state: GridState, t: float, dt: float, spec: ProblemSpec, grid: Grid,
         config: SolverConfig | None = None) -> GridState:
    """Advance one step of size dt (with step halving on Picard failure)."""
    stepper = _Stepper(spec, grid, config or SolverConfig(n_interior=grid.n_interior, dt=dt))
    u, v, *_ = _advance(stepper, state.u, state.v, t, dt, 0, 0)
    return GridState(u, v)


def _advance(stepper, u, v, t, dt, depth, index):
    out = stepper.step(u, v, t, dt)
    if out is not None:
        return (*out, depth)
    if depth >= MAX_HALVINGS:
        raise SolverError("Picard iteration did not converge", index)
    u1, v1, s1, r1, d1 = _advance(stepper, u, v, t, dt / 2, depth + 1, index)
    u2, v2, s2, r2, d2 = _advance(stepper, u1, v1, t + dt / 2, dt / 2, depth + 1, index)
    return u2, v2, s1 + s2, max(r1, r2), max(d1, d2)


def initial_state(u0, u1, grid: Grid, tol: float = 1e-12) -> GridState:
    """Sample initial data at the nodes, checking compatibility at 0 and pi."""
    u0, u1 = as_expr(u0, ("x",)), as_expr(u1, ("x",))
    ends = np.array([0.0, math.pi])
    for name, e in (("u0", u0), ("u1", u1)):
        vals = evaluate_on(e, ends.shape, x=ends)
        if np.max(np.abs(vals)) > tol:
            raise ValueError(f"initial datum {name} does not vanish at x = 0 and x = pi")
    return GridState.from_arrays(
        evaluate_on(u0, grid.x.shape, x=grid.x), evaluate_on(u1, grid.x.shape, x=grid.x), tol
    )


def integrate_state(state: GridState, spec: ProblemSpec, t0: float, config: SolverConfig) -> Trajectory:
    grid = Grid(config.n_interior)
    if state.u.shape != (grid.n_nodes,):
        raise ValueError("state does not match the configured grid")
    n_steps = int(round((config.t_end - t0) / config.dt))
    if n_steps < 0:
        raise ValueError("t_end must be >= t0")
    n_saved = n_steps // config.save_every + 1
    times = np.empty(n_saved)
    U = np.empty((n_saved, grid.n_nodes))
    V = np.empty((n_saved, grid.n_nodes))
    times[0], U[0], V[0] = t0, state.u, state.v
    traj = Trajectory(times, U, V, grid)

    stepper = _Stepper(spec, grid, config)
    u, v = state.u.copy(), state.v.copy()
    j = 0
    for i in range(n_steps):
        t = t0 + i * config.dt
        try:
            u, v, sweeps, res, depth = _advance(stepper, u, v, t, config.dt, 0, i)
        except (SolverError, DomainError, FloatingPointError) as exc:
            raise SolverError(str(exc), i) from exc
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise SolverError("non-finite values", i)
        traj.picard_iterations.append(sweeps)
        traj.residuals.append(res)
        traj.halvings = max(traj.halvings, depth)
        if (i + 1) % config.save_every == 0:
            j += 1
            times[j] = t0 + (i + 1) * config.dt
            U[j], V[j] = u, v
    return traj


def integrate(spec: ProblemSpec, u0, u1, t0: float, config: SolverConfig, scale: float = 1.0) -> Trajectory:
    """Integrate from initial data given as expressions in x."""
    grid = Grid(config.n_interior)
    return integrate_state(initial_state(u0, u1, grid).scaled(scale), spec, t0, config)


# ---------------------------------------------------- separable solutions


@dataclass(frozen=True)
class SeparableSolution:
    """u = T(t) sin(m x) for T'' + b T' + c T = 0."""

    mode: int
    damping: float  # b = eps m^2 + a'
    stiffness: float  # c = C m^2 - k_lin
    roots: tuple
    kind: str  # "complex" | "repeated" | "real"
    t0: float
    T0: float
    T1: float

    def T(self, t):
        return self._eval(t)[0]

    def T_dot(self, t):
        return self._eval(t)[1]

    def _eval(self, t):
        s = np.asarray(t, dtype=float) - self.t0
        b, c = self.damping, self.stiffness
        if self.kind == "repeated":
            r = -b / 2
            B = self.T1 - r * self.T0
            e = np.exp(r * s)
            return (self.T0 + B * s) * e, (B + r * (self.T0 + B * s)) * e
        if self.kind == "complex":
            al = -b / 2
            om = math.sqrt(c - b * b / 4)
            B = (self.T1 - al * self.T0) / om
            e = np.exp(al * s)
            cs, sn = np.cos(om * s), np.sin(om * s)
            T = e * (self.T0 * cs + B * sn)
            return T, al * T + e * om * (-self.T0 * sn + B * cs)
        r1, r2 = self.roots
        c2 = (self.T1 - r1 * self.T0) / (r2 - r1)
        c1 = self.T0 - c2
        e1, e2 = np.exp(r1 * s), np.exp(r2 * s)
        return c1 * e1 + c2 * e2, c1 * r1 * e1 + c2 * r2 * e2

    def u(self, x, t):
        return np.sin(self.mode * np.asarray(x)) * self.T(t)

    def u_t(self, x, t):
        return np.sin(self.mode * np.asarray(x)) * self.T_dot(t)


def exact_separable(spec: ProblemSpec, mode: int = 1, T0: float = 1.0, T1: float = 0.0,
                    t0: float = 0.0) -> SeparableSolution:
    """Exact modal solution for constant eps, C, a' with a = 0 and F(u) = k_lin u."""
    for name in ("eps", "C"):
        if free_variables(getattr(spec, name)):
            raise ValueError(f"{name} must be constant for a separable solution")
    if not is_zero(spec.a):
        raise ValueError("a must vanish identically for a separable solution")
    z = np.linspace(-1.0, 1.0, 9)
    Fz = evaluate_on(spec.F_z, z.shape, z=z)
    if np.ptp(Fz) > 1e-14 or abs(spec.F_at(0.0)) > 1e-14:
        raise ValueError("F must be linear, F(u) = k_lin u")
    k_lin = float(Fz[0])
    eps, C = evaluate(spec.eps), evaluate(spec.C)
    b = eps * mode**2 + spec.a_prime
    c = C * mode**2 - k_lin
    disc = b * b - 4 * c
    r1 = (-b + cmath.sqrt(disc)) / 2
    r2 = (-b - cmath.sqrt(disc)) / 2
    if disc < 0:
        kind, roots = "complex", (r1, r2)
    elif disc == 0:
        kind, roots = "repeated", (r1.real, r1.real)
    else:
        kind, roots = "real", (r1.real, r2.real)
    return SeparableSolution(mode, b, c, roots, kind, t0, T0, T1)
