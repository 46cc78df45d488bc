"""
Derived constants of the stability argument.

Everything here is a closed-form function of the problem data except the
sup S(t0, sigma), the improper integral G(sigma) and the comparison
solution y(t), which need time quadrature (see ``_timeint``).  Infinite
outcomes are represented by ``math.inf`` and converted to explicit
markers only when serialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _timeint
from .errors import AssumptionError, BlowUpError
from .liapunov import B_inverse, chi as _chi, eta as _eta, g as _g, m
from .problem import (
    DEFAULT_HORIZON,
    DEFAULT_SAMPLES,
    ProblemSpec,
    ScannedConstants,
    scan_constants,
    verify_assumption_II,
)

INF = math.inf
THETA_MARGIN = 0.5
SUP_HORIZON = 1e3


def _consts(spec, consts):
    return scan_constants(spec) if consts is None else consts


# ------------------------------------------------------------------ theta


def theta_thresholds(spec: ProblemSpec, margin: float = THETA_MARGIN,
                     consts: ScannedConstants | None = None):
    """(theta1, theta2, theta_used) with theta_used = theta2 + margin."""
    c = _consts(spec, consts)
    ap, k, mu = spec.a_prime, spec.k, spec.mu
    C_inf, eps_inf, edd_inf = c.C_inf.value, c.eps_inf.value, c.eps_ddot_inf.value
    den = mu + C_inf / 2 - 2 * k
    if den <= 0:
        raise AssumptionError(f"mu + C_inf/2 - 2k = {den:.6g} must be positive")
    if not math.isfinite(edd_inf):
        raise AssumptionError("inf of eps_ddot is not finite")
    theta1 = max(2 * ap, 2 * k / mu - ap, (5 - edd_inf - ap * (mu - C_inf)) / den)
    den2 = ap + eps_inf / 2
    if den2 <= 0:
        raise AssumptionError(f"a' + eps_inf/2 = {den2:.6g} must be positive")
    theta2 = max(theta1, (C_inf + 1.25) / den2)
    theta_used = theta2 + margin
    if not (theta_used > max(2 * ap, -ap) and mu * (ap + theta_used) > 2 * k):
        raise AssumptionError("theta_used violates theta > max(2a', -a') or mu(a'+theta) > 2k")
    return theta1, theta2, theta_used


@dataclass(frozen=True)
class GammaFamily:
    theta: float
    tau: float
    gamma31: float
    gamma32: float
    gamma1_base: float  # (1 + theta + eps_inf/2) / (a' + eps_inf)
    gamma3_extra: float  # 1 + (a' + theta)/mu + (a' + 1) theta

    def gamma1(self, sigma):
        return self.gamma1_base + self.gamma32 * sigma ** (2 * self.tau)

    def gamma2(self, sigma):
        return self.gamma1(sigma) + self.theta**2 + 1

    def gamma3(self, sigma):
        return self.gamma31 + self.gamma32 * sigma ** (2 * self.tau)

    def gamma3_compositional(self, sigma):
        """gamma2 + 1 + (a'+theta)/mu + (a'+1) theta, which keeps the eps_inf/2 term."""
        return self.gamma2(sigma) + self.gamma3_extra

    @property
    def gamma31_compositional(self):
        return self.gamma3_compositional(0.0)


def gamma_family(spec: ProblemSpec, theta: float, consts: ScannedConstants | None = None) -> GammaFamily:
    c = _consts(spec, consts)
    ap, mu = spec.a_prime, spec.mu
    eps_inf, C_inf = c.eps_inf.value, c.C_inf.value
    den = ap + eps_inf
    if den <= 0:
        raise AssumptionError(f"a' + eps_inf = {den:.6g} must be positive")
    gamma32 = spec.A**2 / den * (1 / mu + theta / C_inf)
    extra = 1 + (ap + theta) / mu + (ap + 1) * theta
    gamma31 = (1 + theta) / den + theta**2 + 2 + (ap + theta) / mu + (ap + 1) * theta
    return GammaFamily(theta, spec.tau, gamma31, gamma32, (1 + theta + eps_inf / 2) / den, extra)


def rho2(spec: ProblemSpec, consts: ScannedConstants | None = None) -> float:
    c = _consts(spec, consts)
    C_inf = c.C_inf.value
    if not C_inf > spec.k:
        raise AssumptionError("rho2 needs C_inf > k")
    if spec.h == 0:
        return spec.rho
    w = spec.omega
    return min(spec.rho, ((C_inf - spec.k) * (w + 1) * (w + 2) / (2 * spec.h)) ** (1 / w))


# ------------------------------------------------------- decay constants


def lambda_of_sigma(sigma: float, spec: ProblemSpec, theta: float,
                    consts: ScannedConstants | None = None) -> float:
    fam = gamma_family(spec, theta, consts)
    return _eta(spec) / ((1 + m(sigma, spec)) * (1 + fam.gamma3(sigma)))


def n_coefficient(spec: ProblemSpec, theta: float, consts: ScannedConstants | None = None) -> float:
    """h 2^(omega/2) / chi^(1 + omega/2), so that n(t) = coef (theta/(omega+1) + eps(t))."""
    c = _consts(spec, consts)
    w = spec.omega
    chi = _chi(spec, theta, c.eps_inf.value)
    return spec.h * 2 ** (w / 2) / chi ** (1 + w / 2)


def n_of_t(t, spec: ProblemSpec, theta: float, consts: ScannedConstants | None = None):
    coef = n_coefficient(spec, theta, consts)
    return coef * (theta / (spec.omega + 1) + spec.eps_at(t))


def alphas(spec: ProblemSpec, theta: float, consts: ScannedConstants | None = None):
    """(alpha1, alpha2) with n(t) <= alpha1 (alpha2 + g(t))."""
    c = _consts(spec, consts)
    w, mu = spec.omega, spec.mu
    chi = _chi(spec, theta, c.eps_inf.value)
    alpha1 = spec.h * 2 ** (1 + w / 2) / (mu * chi ** (1 + w / 2))
    alpha2 = (mu * theta / (w + 1) - mu - 2 - c.C_inf.value) / 2
    return alpha1, alpha2


# ------------------------------------------------------ S and G integrals


def _growth(spec, consts):
    """Growth class of g plus (intercept, slope) for the linear-type classes."""
    d = spec.declared
    cls = consts.g_growth
    if cls == "linear":
        return "linear", d.g_intercept, d.g_slope
    if cls == "sublinear":
        return "sublinear", d.g_intercept, d.g_slope
    return cls, None, None


def _linear_majorant(spec, consts, T):
    """(G_T, K) such that g(t) <= G_T + K (t - T) for t >= T, or None."""
    cls, k0, k1 = _growth(spec, consts)
    if cls == "linear":
        return k0 + k1 * T, k1
    if cls == "sublinear":
        p = spec.declared.g_power
        if p == 0 or T <= 0:
            return (k0 + k1, 0.0) if p == 0 else None
        return k0 + k1 * T**p, k1 * p * T ** (p - 1)
    return None


@dataclass(frozen=True)
class SupResult:
    """S(t0, sigma) = sup over [t0, inf) of s(t; t0, sigma)."""

    value: float | None  # None when undetermined
    method: str  # "zero" | "closed-form" | "truncated+tail" | "undetermined"
    truncated: float | None = None
    tail: float | None = None
    closed_form: float | None = None
    horizon: float | None = None

    @property
    def determined(self) -> bool:
        return self.value is not None


def s_of_t(t, t0: float, sigma: float, spec: ProblemSpec, theta: float,
           consts: ScannedConstants | None = None):
    """s(t; t0, sigma) at the requested times (>= t0)."""
    c = _consts(spec, consts)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if spec.h == 0:
        return np.zeros_like(t)
    lam = lambda_of_sigma(sigma, spec, theta, c)
    cc = spec.omega * lam / 2
    n_fn = lambda tt: n_of_t(tt, spec, theta, c)  # noqa: E731
    I, J = _timeint.at_times(t, t0, spec.g_at, n_fn, cc)
    return _s_values(t, I, J, lam, cc, spec, n_fn)


def _s_values(t, I, J, lam, cc, spec, n_fn):
    n = np.broadcast_to(np.asarray(n_fn(t), dtype=float), t.shape)
    g = np.broadcast_to(np.asarray(spec.g_at(t), dtype=float), t.shape)
    return n * g / lam * np.exp(-cc * I) + spec.omega / 2 * J


def S_sup(t0: float, sigma: float, spec: ProblemSpec, theta: float, horizon: float = SUP_HORIZON,
          consts: ScannedConstants | None = None, prefer_closed_form: bool = True) -> SupResult:
    """Sup of s over [t0, inf): max over [t0, t0+horizon] plus a tail bound.

    When g is bounded the closed form (alpha1/lambda)(alpha2 + sup g) sup g
    is also computed and, with ``prefer_closed_form``, used as the value.
    """
    c = _consts(spec, consts)
    if spec.h == 0:
        return SupResult(0.0, "zero", 0.0, 0.0, 0.0, horizon)
    lam = lambda_of_sigma(sigma, spec, theta, c)
    cc = spec.omega * lam / 2
    alpha1, alpha2 = alphas(spec, theta, c)
    n_fn = lambda tt: n_of_t(tt, spec, theta, c)  # noqa: E731
    T = t0 + horizon
    grid = _timeint.refine(np.array([T]), t0)
    I, J = _timeint.cumulative(grid, spec.g_at, n_fn, cc)
    s = _s_values(grid, I, J, lam, cc, spec, n_fn)
    truncated = float(s.max())
    EI = math.exp(-cc * I[-1])
    Jw = spec.omega / 2 * J[-1]

    closed = None
    tail = None
    gs = c.g_sup.value
    if c.g_growth == "bounded" and math.isfinite(gs):
        closed = alpha1 / lam * (alpha2 + gs) * gs
        # n <= alpha1 (alpha2 + g) <= alpha1 (alpha2 + sup g) beyond T
        tail = Jw + alpha1 * (alpha2 + gs) * gs / lam * EI
    else:
        maj = _linear_majorant(spec, c, T)
        if maj is not None:
            GT, K = maj
            if K == 0:
                tail = Jw + alpha1 * (alpha2 + GT) * GT / lam * EI
            else:
                q = cc / K
                if q <= 2:
                    tail = INF
                else:
                    a2 = abs(alpha2)
                    head = alpha1 / lam * EI * (a2 + GT) * GT
                    integral = alpha1 * EI * GT**q * (a2 * GT ** (1 - q) / (K * (q - 1))
                                                     + GT ** (2 - q) / (K * (q - 2)))
                    tail = head + Jw + spec.omega / 2 * integral
    if closed is not None and prefer_closed_form:
        return SupResult(closed, "closed-form", truncated, tail, closed, horizon)
    if tail is None:
        return SupResult(None, "undetermined", truncated, None, None, horizon)
    return SupResult(max(truncated, tail), "truncated+tail", truncated, tail, closed, horizon)


@dataclass(frozen=True)
class GResult:
    value: float | None  # None when undetermined
    method: str


def G_of_sigma(sigma: float, spec: ProblemSpec, theta: float, horizon: float = SUP_HORIZON,
               consts: ScannedConstants | None = None) -> GResult:
    """G(sigma) = h int_0^inf exp(-(omega lambda/2) int_0^tau 1/g) g dtau."""
    c = _consts(spec, consts)
    if spec.h == 0:
        return GResult(0.0, "zero")
    lam = lambda_of_sigma(sigma, spec, theta, c)
    cc = spec.omega * lam / 2

    def truncated(H):
        grid = _timeint.refine(np.array([H]), 0.0)
        I, J = _timeint.cumulative(grid, spec.g_at, spec.g_at, cc)
        return spec.h * J[-1], math.exp(-cc * I[-1])

    gs = c.g_sup.value
    if c.g_growth == "bounded" and math.isfinite(gs):
        G, EI = truncated(horizon)
        return GResult(G + spec.h * gs * EI * gs / cc, "truncated+tail")
    maj = _linear_majorant(spec, c, horizon)
    if maj is not None:
        GT, K = maj
        G, EI = truncated(horizon)
        if K == 0:
            return GResult(G + spec.h * GT * EI * GT / cc, "truncated+tail")
        q = cc / K
        if q <= 2:
            return GResult(INF, "divergent (growth class)")
        return GResult(G + spec.h * EI * GT**2 / (K * (q - 2)), "truncated+tail")
    # no usable growth class: compare truncations at H and 2H
    G1, _ = truncated(horizon)
    G2, _ = truncated(2 * horizon)
    if G2 - G1 <= 1e-6 * max(G1, 1e-300):
        return GResult(G2, "heuristic")
    return GResult(None, "undetermined")


def sigma_prime_M(spec: ProblemSpec, theta: float, consts: ScannedConstants | None = None,
                  horizon: float = SUP_HORIZON):
    """(sigma'_M, provenance); sigma'_M is None when undetermined."""
    c = _consts(spec, consts)
    if spec.h == 0:
        return INF, "formula (h = 0)"
    cls = c.g_growth
    if cls in ("bounded", "sublinear"):
        return INF, f"formula ({cls} g)"
    if cls == "linear":
        target = 4 * spec.declared.g_slope / spec.omega
        lam = lambda s: lambda_of_sigma(s, spec, theta, c)  # noqa: E731
        if lam(0.0) <= target:
            return 0.0, "formula (linear g, lambda(0) <= 4K/omega)"
        hi = 1.0
        while lam(hi) > target:
            hi *= 2
            if hi > 1e8:
                return INF, "formula (linear g, lambda stays above 4K/omega)"
        lo = 0.0
        while hi - lo > 1e-13 * hi:
            mid = 0.5 * (lo + hi)
            if lam(mid) > target:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi), "bisection lambda(sigma) = 4K/omega"
    G = G_of_sigma(spec.rho, spec, theta, horizon, c)
    if G.value is not None and math.isfinite(G.value):
        return INF, "heuristic (G(rho) appears finite)"
    return None, "undetermined"


# ------------------------------------------------------------- r(sigma)


@dataclass(frozen=True)
class RAnalysis:
    sigma_M: float
    r_M: float
    family: GammaFamily

    def r(self, sigma):
        return sigma / np.sqrt(1 + self.family.gamma3(sigma))


def r_analysis(spec: ProblemSpec, theta: float, consts: ScannedConstants | None = None) -> RAnalysis:
    fam = gamma_family(spec, theta, consts)
    g31, g32, tau = fam.gamma31, fam.gamma32, spec.tau
    if g32 == 0 or tau < 1:
        return RAnalysis(INF, INF, fam)
    if tau == 1:
        return RAnalysis(INF, 1 / math.sqrt(g32), fam)
    sigma_M = ((1 + g31) / (g32 * (tau - 1))) ** (1 / (2 * tau))
    r_M = ((tau - 1) / (1 + g31)) ** ((tau - 1) / (2 * tau)) / (math.sqrt(tau) * g32 ** (1 / (2 * tau)))
    return RAnalysis(sigma_M, r_M, fam)


def xi_kappa(spec: ProblemSpec, theta: float, xi_default: float = 1.0,
             consts: ScannedConstants | None = None, horizon=DEFAULT_HORIZON, samples=DEFAULT_SAMPLES):
    """(xi, kappa): xi = min(rho, sigma_M, sigma'_M), kappa = t_bar(gamma3(xi))."""
    c = _consts(spec, consts)
    ra = r_analysis(spec, theta, c)
    spm, _ = sigma_prime_M(spec, theta, c)
    candidates = [spec.rho, ra.sigma_M] + ([] if spm is None else [spm])
    xi = min(candidates)
    if not math.isfinite(xi):
        xi = xi_default
    kappa = verify_assumption_II(spec, ra.family.gamma3(xi), horizon, samples)
    return xi, kappa


# ----------------------------------------------------------------- delta


@dataclass(frozen=True)
class DeltaResult:
    value: float
    first: float
    second: float
    S: SupResult


def delta_detail(sigma: float, t0: float, spec: ProblemSpec, theta: float,
                 consts: ScannedConstants | None = None, S: SupResult | None = None,
                 sup_horizon: float = SUP_HORIZON) -> DeltaResult:
    c = _consts(spec, consts)
    fam = gamma_family(spec, theta, c)
    chi = _chi(spec, theta, c.eps_inf.value)
    root = math.sqrt(_g(t0, spec) * (1 + fam.gamma3(sigma)))
    first = B_inverse(sigma * math.sqrt(chi) / root, spec)
    if S is None:
        S = S_sup(t0, sigma, spec, theta, sup_horizon, c)
    if not S.determined:
        raise AssumptionError("S(t0, sigma) is undetermined; declare the growth class of g")
    if S.value == 0:
        second = INF
    elif math.isinf(S.value):
        second = 0.0
    else:
        second = B_inverse(S.value ** (-1 / spec.omega) / root, spec)
    return DeltaResult(min(first, second), first, second, S)


def delta(sigma: float, t0: float, spec: ProblemSpec, theta: float,
          consts: ScannedConstants | None = None) -> float:
    return delta_detail(sigma, t0, spec, theta, consts).value


def delta_uniform(sigma: float, spec: ProblemSpec, theta: float,
                  consts: ScannedConstants | None = None) -> float:
    """t0-independent radius using sup g in place of g(t0)."""
    c = _consts(spec, consts)
    gs = c.g_sup.value
    if not math.isfinite(gs):
        raise AssumptionError("uniform delta needs a finite sup of g")
    fam = gamma_family(spec, theta, c)
    chi = _chi(spec, theta, c.eps_inf.value)
    lam = lambda_of_sigma(sigma, spec, theta, c)
    alpha1, alpha2 = alphas(spec, theta, c)
    root = math.sqrt(gs * (1 + fam.gamma3(sigma)))
    first = B_inverse(sigma * math.sqrt(chi) / root, spec)
    S = alpha1 * gs / lam * (alpha2 + gs)
    second = INF if S == 0 else B_inverse(S ** (-1 / spec.omega) / root, spec)
    return min(first, second)


# ------------------------------------------------------ comparison curve


def comparison_y(t, t0: float, W0: float, sigma: float, spec: ProblemSpec, theta: float,
                 consts: ScannedConstants | None = None):
    """Closed-form solution of y' = -(lambda/g) y + n y^(1+omega/2), y(t0) = W0.

    Raises BlowUpError if the Bernoulli factor reaches zero before max(t).
    """
    c = _consts(spec, consts)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lam = lambda_of_sigma(sigma, spec, theta, c)
    w = spec.omega
    if spec.h == 0:
        I, _ = _timeint.at_times(t, t0, spec.g_at)
        y = W0 * np.exp(-lam * I)
    else:
        n_fn = lambda tt: n_of_t(tt, spec, theta, c)  # noqa: E731
        I, J = _timeint.at_times(t, t0, spec.g_at, n_fn, w * lam / 2)
        brace = 1 - W0 ** (w / 2) * (w / 2) * J
        bad = np.flatnonzero(brace <= 0)
        if bad.size:
            i = bad[0]
            tb = t[i] if i == 0 else t[i - 1] + (t[i] - t[i - 1]) * brace[i - 1] / (brace[i - 1] - brace[i])
            raise BlowUpError(f"comparison solution blows up near t={tb:.6g}", float(tb))
        y = W0 * np.exp(-lam * I) * brace ** (-2 / w)
    return float(y[0]) if scalar else y


# --------------------------------------------------------- decay envelope


@dataclass(frozen=True)
class Envelope:
    D: float
    E: float
    Delta: float
    lam: float
    D_printed_exponent: float  # (1 - Delta)^(-2/omega) reading, for diagnostics


def decay_envelope(spec: ProblemSpec, theta: float, xi: float, t0: float, W0: float,
                   fraction: float = 0.5, consts: ScannedConstants | None = None,
                   S: SupResult | None = None) -> Envelope:
    """Constants of d(t) <= D exp(-E (t - t0)) d(t0) at sigma = fraction * xi."""
    c = _consts(spec, consts)
    gs = c.g_sup.value
    if not math.isfinite(gs):
        raise AssumptionError("exponential envelope needs a finite sup of g")
    sigma = fraction * xi
    lam = lambda_of_sigma(sigma, spec, theta, c)
    chi = _chi(spec, theta, c.eps_inf.value)
    if S is None:
        S = S_sup(t0, sigma, spec, theta, consts=c)
    if not S.determined:
        raise AssumptionError("S(t0, sigma) is undetermined")
    Delta = S.value * W0 ** (spec.omega / 2)
    if not Delta < 1:
        raise AssumptionError(f"Delta = {Delta:.6g} must be < 1")
    base = math.sqrt(_eta(spec) * gs / (lam * chi))
    return Envelope(
        D=base * (1 - Delta) ** (-1 / spec.omega),
        E=lam / (2 * gs),
        Delta=Delta,
        lam=lam,
        D_printed_exponent=base * (1 - Delta) ** (-2 / spec.omega),
    )


# ---------------------------------------------------------------- report


@dataclass
class ThresholdReport:
    spec: ProblemSpec = field(repr=False)
    consts: ScannedConstants = field(repr=False)
    theta1: float
    theta2: float
    theta_used: float
    gamma31: float
    gamma32: float
    gamma31_compositional: float
    rho2: float
    chi: float
    eta: float
    alpha1: float
    alpha2: float
    sigma_M: float
    r_M: float
    sigma_prime_M: float | None
    xi: float
    kappa: float | None
    xi_fraction: float
    lam: float  # lambda(xi_fraction * xi)
    E: float | None
    D_zero_Delta: float | None
    provenance: dict

    def gamma3_of_sigma(self, sigma):
        return self.gamma31 + self.gamma32 * sigma ** (2 * self.spec.tau)

    def lambda_of_sigma(self, sigma):
        return lambda_of_sigma(sigma, self.spec, self.theta_used, self.consts)

    @property
    def params_sigma(self):
        return self.xi_fraction * self.xi

    def to_dict(self):
        out = {
            "theta1": self.theta1,
            "theta2": self.theta2,
            "theta_used": self.theta_used,
            "gamma31": self.gamma31,
            "gamma32": self.gamma32,
            "gamma31_compositional": self.gamma31_compositional,
            "rho2": self.rho2,
            "chi": self.chi,
            "eta": self.eta,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "sigma_M": self.sigma_M,
            "r_M": self.r_M,
            "sigma_prime_M": self.sigma_prime_M,
            "xi": self.xi,
            "kappa": self.kappa,
            "lambda": self.lam,
            "lambda_sigma": self.params_sigma,
            "gamma3_at_lambda_sigma": self.gamma3_of_sigma(self.params_sigma),
            "E": self.E,
            "D_zero_Delta": self.D_zero_Delta,
            "eps_inf": self.consts.eps_inf.value,
            "eps_ddot_inf": self.consts.eps_ddot_inf.value,
            "C_inf": self.consts.C_inf.value,
            "g_sup": self.consts.g_sup.value,
            "g_growth": self.consts.g_growth,
        }
        return {"values": out, "provenance": self.provenance}


def compute_thresholds(spec: ProblemSpec, theta_margin: float = THETA_MARGIN, xi_default: float = 1.0,
                       xi_fraction: float = 0.5, horizon=DEFAULT_HORIZON,
                       samples=DEFAULT_SAMPLES) -> ThresholdReport:
    c = scan_constants(spec, horizon, samples)
    theta1, theta2, theta = theta_thresholds(spec, theta_margin, c)
    fam = gamma_family(spec, theta, c)
    ra = r_analysis(spec, theta, c)
    spm, spm_src = sigma_prime_M(spec, theta, c)
    candidates = [spec.rho, ra.sigma_M] + ([] if spm is None else [spm])
    xi = min(candidates)
    xi_src = "formula"
    if not math.isfinite(xi):
        xi, xi_src = xi_default, "configured"
    try:
        kappa = verify_assumption_II(spec, fam.gamma3(xi), horizon, samples)
    except AssumptionError:
        kappa = None
    chi = _chi(spec, theta, c.eps_inf.value)
    eta = _eta(spec)
    alpha1, alpha2 = alphas(spec, theta, c)
    lam = lambda_of_sigma(xi_fraction * xi, spec, theta, c)
    gs = c.g_sup.value
    E = D0 = None
    if math.isfinite(gs):
        E = lam / (2 * gs)
        D0 = math.sqrt(eta * gs / (lam * chi))

    def src(e):
        return e.source

    provenance = {
        "theta1": "formula", "theta2": "formula", "theta_used": f"formula (theta2 + {theta_margin})",
        "gamma31": "formula (printed)", "gamma32": "formula",
        "gamma31_compositional": "formula (gamma2 + ...)", "rho2": "formula",
        "chi": "formula", "eta": "formula", "alpha1": "formula", "alpha2": "formula",
        "sigma_M": "formula", "r_M": "formula", "sigma_prime_M": spm_src, "xi": xi_src,
        "kappa": "scanned" if kappa is not None else "undetermined (Assumption II fails)",
        "lambda": "formula", "E": "formula" if E is not None else "not applicable (sup g infinite)",
        "D_zero_Delta": "formula (Delta -> 0)" if D0 is not None else "not applicable",
        "eps_inf": src(c.eps_inf), "eps_ddot_inf": src(c.eps_ddot_inf), "C_inf": src(c.C_inf),
        "g_sup": src(c.g_sup), "g_growth": c.g_growth_source,
    }
    return ThresholdReport(
        spec=spec, consts=c, theta1=theta1, theta2=theta2, theta_used=theta,
        gamma31=fam.gamma31, gamma32=fam.gamma32, gamma31_compositional=fam.gamma31_compositional,
        rho2=rho2(spec, c), chi=chi, eta=eta, alpha1=alpha1, alpha2=alpha2,
        sigma_M=ra.sigma_M, r_M=ra.r_M, sigma_prime_M=spm, xi=xi, kappa=kappa,
        xi_fraction=xi_fraction, lam=lam, E=E, D_zero_Delta=D0, provenance=provenance,
    )
