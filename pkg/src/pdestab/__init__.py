"""Stability analysis and certification for viscous damped semilinear wave equations.

    u_tt - eps(t) u_xxt - C(t) u_xx + (a' + a) u_t = F(u)   on ]0, pi[,  u = 0 at both ends.
"""

from .certify import Certificate, CertifyConfig, certify_exponential, certify_stability, measure_settling, sweep
from .errors import (
    AssumptionError,
    BlowUpError,
    ConfigError,
    DomainError,
    ExprError,
    ExprSyntaxError,
    PdestabError,
    PreconditionError,
    QuadratureError,
    SolverError,
)
from .exprlang import evaluate, parse, pretty
from .grid import Grid, GridState, d_norm, integrate as integrate_x, poincare_ratio
from .liapunov import LiapunovParams, W, W_dot_analytic, bounds
from .problem import ProblemSpec, verify_assumption_II, verify_assumptions_I
from .solver import SolverConfig, Trajectory, exact_separable, integrate
from .thresholds import compute_thresholds

__version__ = "0.1.0"

__all__ = [
    "AssumptionError", "BlowUpError", "Certificate", "CertifyConfig", "ConfigError", "DomainError",
    "ExprError", "ExprSyntaxError", "Grid", "GridState", "LiapunovParams", "PdestabError",
    "PreconditionError", "ProblemSpec", "QuadratureError", "SolverConfig", "SolverError", "Trajectory",
    "W", "W_dot_analytic", "bounds", "certify_exponential", "certify_stability", "compute_thresholds",
    "d_norm", "evaluate", "exact_separable", "integrate", "integrate_x", "measure_settling", "parse",
    "poincare_ratio", "pretty", "sweep", "verify_assumption_II", "verify_assumptions_I",
]
