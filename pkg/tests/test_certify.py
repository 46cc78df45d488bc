import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdestab.certify import (
    CertifyConfig,
    certify_exponential,
    certify_stability,
    measure_settling,
    sweep,
)
from pdestab.errors import PreconditionError
from pdestab.presets import P1, cubic
from pdestab.problem import DeclaredBounds, ProblemSpec
from pdestab.thresholds import compute_thresholds

FAST = CertifyConfig(n_interior=99, dt=0.02, horizon=20.0)


@pytest.fixture(scope="module")
def p1_report():
    return compute_thresholds(P1())


@pytest.fixture(scope="module")
def p1_cert(p1_report):
    return certify_stability(P1(), 0.5, 0.0, config=CertifyConfig(horizon=200.0), report=p1_report)


def test_p1_passes(p1_cert):
    c = p1_cert
    assert c.verdict == "pass"
    assert c.clause("d_below_sigma").margin > 0.9 * 0.5
    assert c.inputs["delta"] == pytest.approx(0.5 * math.sqrt(0.125) / math.sqrt(87), rel=1e-10)
    assert c.inputs["d0"] == pytest.approx(0.9 * c.inputs["delta"], rel=1e-12)
    assert 0 < c.settling["T"] < 200


def test_certificate_shape(p1_cert, tmp_path):
    names = [c.name for c in p1_cert.clauses]
    assert names == ["assumptions_I", "assumption_II", "sigma", "t0", "delta", "d_t0",
                     "d_below_sigma", "W_monotone", "comparison_envelope", "settling",
                     "exponential_envelope"]
    json_path, csv_path = p1_cert.write(tmp_path, "c")
    data = json.loads(json_path.read_text())
    assert data["schema"] == "pdestab.certificate/1"
    assert data["verdict"] == "pass"
    assert data["diagnostics"]["monotone_slack"]["max_slack"] > 0
    header = csv_path.read_text().splitlines()[0]
    assert header == "t,d,W,lower_bound,upper_bound,y_comparison,envelope"


def test_sigma_at_or_above_xi_rejected(p1_report):
    with pytest.raises(PreconditionError):
        certify_stability(P1(), p1_report.xi, 0.0, config=FAST, report=p1_report)
    with pytest.raises(PreconditionError):
        certify_stability(P1(), 0.0, 0.0, config=FAST, report=p1_report)


def test_large_data_fails_hypothesis(p1_report):
    cfg = CertifyConfig(n_interior=99, dt=0.02, horizon=10.0, d0=1.0)
    c = certify_stability(P1(), 0.5, 0.0, config=cfg, report=p1_report)
    assert c.clause("d_t0").status == "fail"
    assert c.verdict == "hypothesis-not-met"


def test_zero_data_passes(p1_report):
    cfg = CertifyConfig(n_interior=49, dt=0.05, horizon=5.0, d0=0.0)
    c = certify_stability(P1(), 0.5, 0.0, config=cfg, report=p1_report)
    assert c.passed
    assert c.clause("settling").status == "not-applicable"
    assert c.diagnostics["d_max"] == 0.0


def test_exponential_p1(p1_report):
    cfg = CertifyConfig(n_interior=99, dt=0.02, horizon=50.0)
    c = certify_exponential(P1(), 0.0, config=cfg, report=p1_report)
    assert c.inputs["sigma"] == pytest.approx(0.5)
    env = c.clause("exponential_envelope")
    assert env.status == "pass" and env.margin > 0
    assert c.diagnostics["envelope"]["E"] == pytest.approx(p1_report.E)


def test_unbounded_g_envelope_not_applicable():
    spec = ProblemSpec.build(eps="1", C="2+0.01*t", a_prime=1,
                             declared=DeclaredBounds(g_growth="linear", g_intercept=3.0, g_slope=0.01))
    cfg = CertifyConfig(n_interior=49, dt=0.05, horizon=5.0)
    rep = compute_thresholds(spec)
    assert rep.E is None
    c = certify_stability(spec, 0.5, 0.0, config=cfg, report=rep)
    assert c.clause("exponential_envelope").status == "not-applicable"
    assert c.passed


def test_settling_measurement():
    t = np.linspace(0, 10, 101)
    d = np.exp(-t)
    assert measure_settling(t, d, 2.0) == 0.0
    assert measure_settling(t, d, 0.0) == math.inf
    T = measure_settling(t, d, 0.5)
    assert T == pytest.approx(0.7)
    assert measure_settling(t, np.ones_like(t), 0.5) == math.inf


def test_sweep_matches_single(p1_report):
    cfg = CertifyConfig(n_interior=49, dt=0.05, horizon=10.0)
    rows = sweep(P1(), [0.3], [0.0], [("sin(x)", "0")], cfg, report=p1_report)
    single = certify_stability(P1(), 0.3, 0.0, ("sin(x)", "0"), cfg, p1_report)
    assert len(rows) == 1
    assert rows[0].certificate.to_dict() == single.to_dict()
    assert sweep(P1(), [], [0.0], [("sin(x)", "0")], cfg, report=p1_report) == []


def test_sweep_order_and_delta_growth(p1_report):
    cfg = CertifyConfig(n_interior=49, dt=0.05, horizon=10.0)
    sig = [0.1, 0.2, 0.3, 0.4]
    shapes = [("sin(x)", "0"), ("sin(2*x)", "sin(x)")]
    rows = sweep(P1(), sig, [0.0], shapes, cfg, threads=4, report=p1_report)
    assert [(r.sigma, r.shape) for r in rows] == [(s, sh) for s in sig for sh in shapes]
    deltas = [r.certificate.inputs["delta"] for r in rows[::2]]
    assert all(a < b for a, b in zip(deltas, deltas[1:]))
    assert all(r.certificate.passed for r in rows)


def test_sweep_records_errors(p1_report):
    cfg = CertifyConfig(n_interior=49, dt=0.05, horizon=2.0)
    rows = sweep(P1(), [0.3, 5.0], [0.0], [("sin(x)", "0")], cfg, report=p1_report)
    assert rows[0].certificate is not None
    assert rows[1].certificate is None and rows[1].summary()[6] == "error"


def test_bit_reproducible(p1_report):
    cfg = CertifyConfig(n_interior=49, dt=0.05, horizon=10.0)
    a = certify_stability(P1(), 0.4, 0.0, config=cfg, report=p1_report)
    b = certify_stability(P1(), 0.4, 0.0, config=cfg, report=p1_report)
    assert a.to_dict() == b.to_dict()
    for k in a.series:
        assert np.array_equal(a.series[k], b.series[k], equal_nan=True)


@settings(max_examples=15)
@given(d0=st.floats(0.05, 2.0))
def test_d_below_sigma_never_passes_on_violation(p1_report, d0):
    cfg = CertifyConfig(n_interior=29, dt=0.1, horizon=2.0, d0=d0)
    c = certify_stability(P1(), 0.3, 0.0, config=cfg, report=p1_report)
    clause = c.clause("d_below_sigma")
    if np.any(c.series["d"] >= 0.3):
        assert clause.status == "fail" and clause.first_violation is not None
    else:
        assert clause.status == "pass"


def test_cubic_passes():
    cfg = CertifyConfig(n_interior=99, dt=0.02, horizon=30.0)
    c = certify_stability(cubic(), 0.1, 0.0, config=cfg)
    assert c.verdict == "pass"
    assert c.diagnostics["picard_max_iterations"] >= 2
