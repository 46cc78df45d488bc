import math

import numpy as np
import pytest

from pdestab.errors import SolverError
from pdestab.grid import Grid, GridState, d_norm
from pdestab.presets import P0, P1, P2, critical, cubic
from pdestab.problem import ProblemSpec
from pdestab.solver import SolverConfig, exact_separable, integrate, integrate_state, step


def _err_at_end(spec, n, dt, t_end=1.0, u0="sin(x)", u1="0"):
    tr = integrate(spec, u0, u1, 0.0, SolverConfig(n_interior=n, dt=dt, t_end=t_end))
    ex = exact_separable(spec, 1, 1.0, 0.0)
    return np.max(np.abs(tr.u[-1] - ex.u(tr.grid.x, t_end))), tr


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0)
    with pytest.raises(ValueError):
        SolverConfig(picard_tol=0)


def test_zero_state_is_fixed():
    g = Grid(49)
    for spec in (P1(), cubic()):
        s = step(GridState.zeros(g), 0.0, 0.01, spec, g)
        assert not s.u.any() and not s.v.any()


def test_incompatible_initial_data_rejected():
    with pytest.raises(ValueError):
        integrate(P0(), "x", "0", 0.0, SolverConfig(n_interior=19, dt=0.1, t_end=0.1))
    integrate(P0(), "sin(x)", "0", 0.0, SolverConfig(n_interior=19, dt=0.1, t_end=0.1))


def test_P0_error_bound():
    g = Grid(199)
    err, _ = _err_at_end(P0(), 199, 0.01)
    assert err <= 5 * (0.01**2 + g.spacing**2)


@pytest.mark.parametrize("spec_fn", [P0, P2], ids=["P0", "P2"])
def test_second_order_convergence(spec_fn):
    errs = [_err_at_end(spec_fn(), n, dt)[0] for n, dt in ((99, 0.02), (199, 0.01), (399, 0.005))]
    for a, b in zip(errs, errs[1:]):
        assert 3.6 <= a / b <= 4.4


def test_exact_separable_branches():
    assert exact_separable(P0(), 1).kind == "complex"
    r = exact_separable(P2(), 1).roots
    assert r[0] == pytest.approx(complex(-0.25, math.sqrt(0.9375)))
    crit = exact_separable(critical(), 1, 1.0, 0.0)
    assert crit.kind == "repeated" and crit.roots == (-1.0, -1.0)
    t = np.linspace(0, 5, 11)
    np.testing.assert_allclose(crit.T(t), (1 + t) * np.exp(-t), rtol=1e-14)
    real = exact_separable(ProblemSpec.build(eps="0", C="1", a_prime=3.0), 1, 1.0, 0.5)
    assert real.kind == "real"
    assert real.T(0.0) == pytest.approx(1.0) and real.T_dot(0.0) == pytest.approx(0.5)


def test_exact_separable_matches_modal_ode():
    # T'' + b T' + c T = 0 checked by finite differences of the closed form
    for spec in (P0(), P1(), P2(), critical()):
        sol = exact_separable(spec, 2, 0.3, -0.7)
        t = np.linspace(0.1, 3, 7)
        h = 1e-4
        T2 = (sol.T(t + h) - 2 * sol.T(t) + sol.T(t - h)) / h**2
        np.testing.assert_allclose(T2 + sol.damping * sol.T_dot(t) + sol.stiffness * sol.T(t), 0, atol=1e-5)


def test_exact_separable_rejects_nonconstant():
    with pytest.raises(ValueError):
        exact_separable(ProblemSpec.build(eps="1+t", C="1"), 1)
    with pytest.raises(ValueError):
        exact_separable(cubic(), 1)


def test_linear_source_mode():
    spec = ProblemSpec.build(eps="0.2", C="2", a_prime=0.5, F="0.5*z", F_z="0.5")
    sol = exact_separable(spec, 1, 1.0, 0.0)
    assert sol.stiffness == pytest.approx(1.5)
    err, _ = _err_at_end(spec, 199, 0.01)
    assert err < 5 * (0.01**2 + (math.pi / 200) ** 2)


@pytest.mark.parametrize("spec_fn", [P0, P2], ids=["P0", "P2"])
def test_large_steps_do_not_grow(spec_fn):
    spec = spec_fn()
    tr = integrate(spec, "sin(x)", "0", 0.0, SolverConfig(n_interior=99, dt=0.1, t_end=50.0))
    ex = exact_separable(spec, 1, 1.0, 0.0)
    errs = np.array([np.max(np.abs(tr.u[i] - ex.u(tr.grid.x, t))) for i, t in enumerate(tr.times)])
    assert np.max(np.abs(tr.u)) <= 1 + 1e-12
    assert errs.max() < 0.1
    if spec_fn is P2:
        assert errs[-1] <= errs.max()


def test_boundary_stays_zero():
    tr = integrate(cubic(), "sin(x)", "sin(2*x)", 0.0, SolverConfig(n_interior=49, dt=0.02, t_end=2.0))
    assert not tr.u[:, [0, -1]].any() and not tr.v[:, [0, -1]].any()


def test_P1_d_decays_like_modal_solution():
    tr = integrate(P1(), "sin(x)", "0", 0.0, SolverConfig(n_interior=199, dt=0.01, t_end=10.0), scale=0.1)
    d = np.array([d_norm(tr.state(i), t, P1(), tr.grid) for i, t in enumerate(tr.times)])
    # modal roots -1 +- i: the amplitude envelope decays like exp(-t)
    assert d[-1] < 0.1 * math.sqrt(1.5 * math.pi) * math.exp(-10) * 5
    assert np.all(d[100::100][1:] < d[100::100][:-1])


def test_nonlinear_picard_second_order():
    spec = cubic()
    sols = []
    for n, dt in ((49, 0.04), (99, 0.02), (199, 0.01)):
        tr = integrate(spec, "sin(x)", "0", 0.0, SolverConfig(n_interior=n, dt=dt, t_end=1.0), scale=0.8)
        sols.append(tr.u[-1][:: (n + 1) // 50])
    e1, e2 = np.max(np.abs(sols[0] - sols[1])), np.max(np.abs(sols[1] - sols[2]))
    assert 3.5 < e1 / e2 < 4.5


def test_state_dependent_damping_runs():
    spec = ProblemSpec.build(eps="0.1", C="1", a_prime=0.2, a="ux^2 + uxx^2")
    tr = integrate(spec, "sin(x)", "0", 0.0, SolverConfig(n_interior=49, dt=0.01, t_end=1.0), scale=0.5)
    assert max(tr.picard_iterations) > 1 and tr.residuals[-1] <= 1e-10


def test_blow_up_reports_step():
    spec = ProblemSpec.build(eps="0", C="1", F="z^3", F_z="3*z^2", h=3, omega=2)
    with pytest.raises(SolverError) as info:
        integrate(spec, "sin(x)", "0", 0.0, SolverConfig(n_interior=19, dt=0.05, t_end=5.0), scale=20.0)
    assert info.value.step is not None


def test_save_every_thins_output():
    tr = integrate(P1(), "sin(x)", "0", 0.0, SolverConfig(n_interior=19, dt=0.01, t_end=1.0, save_every=10))
    assert len(tr) == 11 and tr.times[-1] == pytest.approx(1.0)
    assert len(tr.picard_iterations) == 100


def test_integrate_state_checks_grid():
    with pytest.raises(ValueError):
        integrate_state(GridState.zeros(Grid(19)), P1(), 0.0, SolverConfig(n_interior=49))
