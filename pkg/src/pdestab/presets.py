"""Reference problems used by the tests, demos and documentation."""

from __future__ import annotations

from .problem import ProblemSpec


def P0() -> ProblemSpec:
    """Undamped wave u_tt = u_xx; exact solution sin(x) cos(t)."""
    return ProblemSpec.build(eps="0", C="1", a_prime=0.0)


def P1() -> ProblemSpec:
    """Linear viscous damped wave with eps = 1, C = 2, a' = 1."""
    return ProblemSpec.build(eps="1", C="2", a_prime=1.0, a="0", F="0", F_z="0", k=0.0, h=0.0,
                             A=0.0, omega=1.0, rho=1.0, mu=1.0, tau=1.0)


def P2() -> ProblemSpec:
    """Viscous wave with eps = 0.5, C = 1 and no frictional damping."""
    return ProblemSpec.build(eps="0.5", C="1", a_prime=0.0)


def critical() -> ProblemSpec:
    """eps = 0, C = 1, a' = 2: the first mode is critically damped."""
    return ProblemSpec.build(eps="0", C="1", a_prime=2.0)


def cubic(mu: float = 1.0) -> ProblemSpec:
    """P1 with the cubic source F(u) = u^3 (k = 0, h = 3, omega = 2)."""
    return ProblemSpec.build(eps="1", C="2", a_prime=1.0, F="z^3", F_z="3*z^2", k=0.0, h=3.0,
                             A=0.0, omega=2.0, rho=1.0, mu=mu, tau=1.0)
