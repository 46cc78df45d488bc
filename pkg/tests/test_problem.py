import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdestab.errors import AssumptionError, UnknownNameError
from pdestab.exprlang import parse
from pdestab.presets import P1
from pdestab.problem import (
    DeclaredBounds,
    ProblemSpec,
    derivative_of,
    scan_constants,
    scan_inf_sup,
    verify_assumption_II,
    verify_assumptions_I,
)


def test_scan_constant():
    lo, hi = scan_inf_sup(parse("1"), horizon=7.0)
    assert (lo.value, hi.value) == (1.0, 1.0)


def test_scan_decaying():
    lo, hi = scan_inf_sup(parse("2 + exp(-t)"), horizon=50)
    assert lo.value == pytest.approx(2.0, abs=1e-12)
    assert hi.value == 3.0


def test_scan_ramp():
    lo, hi = scan_inf_sup(parse("t"), horizon=10)
    assert (lo.value, hi.value) == (0.0, 10.0)


def test_declared_overrides_scan():
    lo, hi = scan_inf_sup(parse("t"), horizon=10, declared_inf=-1, declared_sup=5)
    assert (lo.value, lo.source, hi.value, hi.source) == (-1.0, "declared", 5.0, "declared")
    spec = ProblemSpec.build(eps="1", C="2+exp(-t)", declared=DeclaredBounds(C_inf=1.5))
    c = scan_constants(spec)
    assert c.C_inf.value == 1.5 and c.C_inf.source == "declared"


def test_P1_assumptions_pass_with_zero_margin():
    rep = verify_assumptions_I(P1())
    assert rep.passed
    assert rep.clause("C - eps_dot >= mu(1 + eps)").margin == pytest.approx(0.0, abs=1e-12)
    assert rep.clause("a <= A d^tau").status == "declared-only"


def test_sine_source_clause():
    spec = ProblemSpec.build(eps="1", C="2", a_prime=1, F="-sin(z)", F_z="-cos(z)", rho=1.5)
    assert verify_assumptions_I(spec).clause("F_z <= k + h|z|^omega on |z| < rho").status == "pass"


def test_C_below_k_fails():
    spec = ProblemSpec.build(eps="1", C="1", a_prime=1, k=2)
    c = verify_assumptions_I(spec).clause("C_inf > k")
    assert c.status == "fail"
    assert c.margin == pytest.approx(-1.0)


def test_every_clause_listed_once():
    names = [c.name for c in verify_assumptions_I(P1()).clauses]
    assert len(names) == len(set(names)) == 12


def test_report_is_deterministic():
    assert verify_assumptions_I(P1()).to_dict() == verify_assumptions_I(P1()).to_dict()


def test_damping_scan_finds_negative_region():
    spec = ProblemSpec.build(eps="1", C="2", a_prime=1, a="u*ut")
    c = verify_assumptions_I(spec).clause("a >= 0 on sampled state box")
    assert c.status == "fail" and c.margin == pytest.approx(-1.0)


def test_role_checks():
    with pytest.raises(UnknownNameError):
        ProblemSpec.build(F="t*z")
    with pytest.raises(ValueError):
        ProblemSpec.build(omega=0)


def test_assumption_II():
    assert verify_assumption_II(ProblemSpec.build(C="2"), 5.0) == 0.0
    with pytest.raises(AssumptionError):
        verify_assumption_II(ProblemSpec.build(C="t"), 1.0)
    assert verify_assumption_II(ProblemSpec.build(C="2+exp(-t)"), 3.0) == 0.0


def test_assumption_II_eventual():
    # C_dot = 2 exp(-t) ; need 2 exp(-t) * 2 <= 1, i.e. t >= log 4
    tb = verify_assumption_II(ProblemSpec.build(C="3-2*exp(-t)"), 1.0, horizon=50, samples=20001)
    assert tb == pytest.approx(math.log(4), abs=5e-3)


@given(st.floats(0.1, 10), st.floats(0.5, 10), st.floats(0.01, 100))
def test_constant_coefficients_give_zero_t_bar(eps, C, gamma):
    assert verify_assumption_II(ProblemSpec.build(eps=repr(eps), C=repr(C)), gamma) == 0.0


def test_derivative_of():
    assert derivative_of(parse("t^2"), 3.0) == pytest.approx(6.0, abs=1e-8)
    assert derivative_of(parse("1"), 5.0) == 0.0
    assert derivative_of(parse("exp(-t)"), 0.0) == pytest.approx(-1.0, abs=1e-8)
    assert derivative_of(parse("sqrt(t)"), 0.0 + 1.0) == pytest.approx(0.5, abs=1e-8)


def test_user_derivatives_take_precedence():
    spec = ProblemSpec.build(eps="t", eps_dot="7")
    assert spec.eps_dot_at(1.0) == 7.0


def test_digest_stable_and_sensitive():
    assert P1().digest() == P1().digest()
    assert P1().digest() != ProblemSpec.build(eps="1", C="2.5", a_prime=1).digest()


def test_vectorized_coefficients():
    spec = ProblemSpec.build(eps="1+t", C="2")
    t = np.array([0.0, 1.0, 2.0])
    np.testing.assert_allclose(spec.g_at(t), 3 - 0.5)
