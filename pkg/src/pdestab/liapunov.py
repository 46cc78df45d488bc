"""The two-parameter Liapunov functional, its time derivative, and its bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import AssumptionError, QuadratureError
from .exprlang import evaluate_on, is_zero
from .grid import NORM_ORDER, Grid, GridState, d_norm_eps, dx, dxx, integrate
from .problem import Z_SAMPLES, ProblemSpec, scan_constants

_GL_NODES, _GL_WEIGHTS = leggauss(15)
INNER_TOL = 1e-12
# slack policy for the discrete "W is nonincreasing" check
MONOTONE_ABS = 1e-12
MONOTONE_REL_FACTOR = 10.0


@dataclass(frozen=True)
class LiapunovParams:
    gamma: float
    theta: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.theta > 0):
            raise ValueError("gamma and theta must be positive")


def monotone_slack(dt: float, spacing: float, w: float = 0.0) -> float:
    """Allowed per-step increase of W: 1e-12 + 10 (dt^2 + dx^2) |W|."""
    return MONOTONE_ABS + MONOTONE_REL_FACTOR * (dt**2 + spacing**2) * abs(w)


def _nodes(lo, hi):
    half = 0.5 * (hi - lo)
    return half, 0.5 * (hi + lo)[:, None] + half[:, None] * _GL_NODES[None, :]


def primitive_F(phi, spec: ProblemSpec) -> np.ndarray:
    """Nodewise integral of F from 0 to phi.

    15-point Gauss-Legendre on [0, phi] is compared with the same rule on
    the two halves; a mismatch beyond INNER_TOL raises QuadratureError.
    """
    phi = np.asarray(phi, dtype=float)
    if is_zero(spec.F):
        return np.zeros_like(phi)
    if spec.F_antideriv is not None:
        return (evaluate_on(spec.F_antideriv, phi.shape, z=phi)
                - evaluate_on(spec.F_antideriv, (), z=0.0))
    zero = np.zeros_like(phi)
    mid = 0.5 * phi
    hw, zw = _nodes(zero, phi)
    h1, z1 = _nodes(zero, mid)
    h2, z2 = _nodes(mid, phi)
    z = np.stack([zw, z1, z2])
    vals = evaluate_on(spec.F, z.shape, z=z) @ _GL_WEIGHTS
    whole = hw * vals[0]
    split = h1 * vals[1] + h2 * vals[2]
    if np.any(np.abs(whole - split) > INNER_TOL * np.maximum(1.0, np.abs(split))):
        raise QuadratureError("inner integral of F did not converge")
    return split


def W(state: GridState, t: float, spec: ProblemSpec, params: LiapunovParams, grid: Grid) -> float:
    gam, th = params.gamma, params.theta
    eps, C = spec.eps_at(t), spec.C_at(t)
    phi, psi = state.u, state.v
    phi_x = dx(phi, grid, NORM_ORDER)
    phi_xx = dxx(phi, grid, NORM_ORDER)
    coef_x = C * (1 + gam) + eps * (spec.a_prime + th) - spec.eps_dot_at(t)
    integrand = (gam * psi**2 + (eps * phi_xx - psi) ** 2 + coef_x * phi_x**2
                 + spec.a_prime * th * phi**2 + 2 * th * phi * psi
                 - 2 * (1 + gam) * primitive_F(phi, spec))
    return 0.5 * integrate(integrand, grid)


def W_dot_analytic(state: GridState, t: float, spec: ProblemSpec, params: LiapunovParams,
                   grid: Grid) -> float:
    """Time derivative of W along solutions, evaluated from the state alone."""
    gam, th, ap = params.gamma, params.theta, spec.a_prime
    eps, eps_d, eps_dd = spec.eps_at(t), spec.eps_dot_at(t), spec.eps_ddot_at(t)
    C, C_d = spec.C_at(t), spec.C_dot_at(t)
    Ce = C - eps_d
    if Ce < 1e-12:
        raise AssumptionError(f"C - eps_dot = {Ce:.3e} is not positive at t={t}")
    u, ut = state.u, state.v
    ux = dx(u, grid, NORM_ORDER)
    uxx = dxx(u, grid, NORM_ORDER)
    uxt = dx(ut, grid, NORM_ORDER)
    shape = u.shape
    a = evaluate_on(spec.a, shape, x=grid.x, t=t, u=u, ux=ux, ut=ut, uxx=uxx)
    F = evaluate_on(spec.F, shape, z=u)
    Fu = evaluate_on(spec.F_z, shape, z=u)

    integrand = (
        eps * gam * uxt**2
        + ((a + ap) * (1 + gam) - th - eps * a**2 / Ce - th * a**2 / C) * ut**2
        + eps * Ce * (a * ut / Ce - uxx / 2) ** 2
        + 0.75 * eps * Ce * uxx**2
        + (C * (th / 2 - ap) + eps_dd + Ce * (ap + th) - (1 + gam) * C_d - 2 * eps * Fu) * ux**2 / 2
        + th * C / 4 * (ux**2 - u**2)
        + th * C / 4 * (u + 2 * a / C * ut) ** 2
        - th * u * F
    )
    return -integrate(integrand, grid)


# ------------------------------------------------------------------ bounds


def g(t, spec: ProblemSpec):
    """g(t) = C - eps_dot/2 + 1, which must exceed 1."""
    val = spec.g_at(t)
    if np.any(np.asarray(val) <= 1):
        raise AssumptionError(f"g(t) <= 1 at t={t}")
    return val


def m(r: float, spec: ProblemSpec) -> float:
    """max |F_z| over [-r, r] (2049 samples)."""
    if r < 0:
        raise ValueError("r must be >= 0")
    if is_zero(spec.F_z):
        return 0.0
    z = np.linspace(-r, r, Z_SAMPLES)
    return float(np.max(np.abs(evaluate_on(spec.F_z, z.shape, z=z))))


def B(d: float, spec: ProblemSpec) -> float:
    if d < 0:
        raise ValueError("d must be >= 0")
    return math.sqrt(1.0 + m(d, spec)) * d


def B_inverse(y: float, spec: ProblemSpec, rtol: float = 1e-12) -> float:
    """Inverse of B by bisection on [0, y] (B(d) >= d)."""
    if y < 0:
        raise ValueError("y must be >= 0")
    if y == 0 or math.isinf(y):
        return y
    if m(y, spec) == 0.0:
        return y
    lo, hi = 0.0, y
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if B(mid, spec) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def chi(spec: ProblemSpec, theta: float, eps_inf: float | None = None) -> float:
    if eps_inf is None:
        eps_inf = scan_constants(spec).eps_inf.value
    return 0.5 * min(0.25, spec.mu + (spec.mu + spec.a_prime + theta / 2) * eps_inf)


def eta(spec: ProblemSpec) -> float:
    return min(1.0, 0.75 * spec.mu)


@dataclass(frozen=True)
class Bounds:
    lower: float
    w: float
    upper: float
    d: float
    preconditions_ok: bool
    notes: tuple = ()


def bounds(state: GridState, t: float, spec: ProblemSpec, params: LiapunovParams, grid: Grid,
           sigma: float | None = None) -> Bounds:
    """Lower bound chi d^2, the value W, and upper bound (1+gamma) g(t) B(d)^2.

    Preconditions (d <= sigma < rho2, theta > theta2, gamma >= gamma2(sigma))
    are checked and reported; the bounds are returned either way.
    """
    from . import thresholds as th  # thresholds depends on this module

    d = d_norm_eps(state, spec.eps_at(t), grid)
    w = W(state, t, spec, params, grid)
    lower = chi(spec, params.theta) * d**2
    upper = (1 + params.gamma) * g(t, spec) * B(d, spec) ** 2

    notes = []
    sig = d if sigma is None else sigma
    r2 = th.rho2(spec)
    if not (d <= sig < r2):
        notes.append(f"need d <= sigma < rho2: d={d:.6g}, sigma={sig:.6g}, rho2={r2:.6g}")
    _, theta2, _ = th.theta_thresholds(spec)
    if not params.theta > theta2:
        notes.append(f"need theta > theta2 = {theta2:.6g}")
    fam = th.gamma_family(spec, params.theta)
    if not params.gamma >= fam.gamma2(sig):
        notes.append(f"need gamma >= gamma2(sigma) = {fam.gamma2(sig):.6g}")
    return Bounds(lower, w, upper, d, not notes, tuple(notes))
