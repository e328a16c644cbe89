import json
from dataclasses import replace
from fractions import Fraction

import pytest

from twistcancel import theorems as th
from twistcancel.genera import a_hat_form, ch_line_bundle_terms
from twistcancel.series import GradedRing, extract_degree

THEOREM_DIMS = {
    "2.1": (4, 12, 20, 28),
    "2.2": (4, 12, 20, 28),
    "2.3": (8, 16, 24),
    "2.4": (8, 16, 24),
    "2.5": (4, 12, 20),
    "2.6": (8, 16),
}


@pytest.mark.parametrize("tid,dim", [(t, d) for t, ds in THEOREM_DIMS.items() for d in ds])
def test_theorem_residual_is_zero(tid, dim):
    case = th.get_case(th.THEOREMS[tid].case)
    rep = th.verify_theorem(tid, case.k_of(dim))
    assert rep.passed, rep.detail
    assert not rep.residual
    assert ("reconstruction", True) in rep.checks


def test_theorem_dims_cover_required_range():
    required = {"2.1": {4, 12, 20, 28}, "2.3": {8, 16, 24}, "2.5": {4, 12, 20}, "2.6": {8, 16}}
    for tid, dims in required.items():
        assert dims <= set(th.theorem_dims(tid))
    assert th.theorem_dims("2.6", 28) == (8, 16, 24)


def test_wrong_weight_is_detected(monkeypatch):
    spec = th.THEOREMS["2.1"]
    monkeypatch.setitem(th.THEOREMS, "2.1", replace(spec, power=13))
    rep = th.verify_theorem("2.1", 1)
    assert not rep.passed
    assert rep.first_mismatch["degree"] == 6


def test_unknown_theorem():
    with pytest.raises(ValueError):
        th.verify_theorem("2.7", 1)


def test_rhs_text():
    assert th.verify_theorem("2.1", 1).rhs_text == "-2^14·Â-top"
    assert th.verify_theorem("2.1", 0).rhs_text == "0"


def test_format_power_of_two():
    assert th.format_power_of_two(-16384) == "-2^14"
    assert th.format_power_of_two(-28672) == "-2^12·7"
    assert th.format_power_of_two(3) == "3"


# -- corollaries ----------------------------------------------------------------

@pytest.mark.parametrize("cid", sorted(th.COROLLARIES, key=th._idkey))
def test_corollary_agreement(cid):
    rep = th.verify_corollary(cid)
    assert rep.passed, rep.detail
    assert len([c for c in rep.checks if c[0] != "equivalent-form"]) == 6
    assert all(ok for _, ok in rep.checks)


def test_corollary_key_coefficients():
    assert th.COROLLARIES["2.2"].a_hat == -2 ** 14
    assert th.COROLLARIES["2.8"].a_hat == 2048
    assert th.COROLLARIES["2.10"].alternate_text.endswith("23·2048·Â-top")
    assert th.COROLLARIES["2.6"].a_hat == -2 ** 26
    assert th.verify_corollary("2.2").rhs_text == "-2^14·Â-top"
    assert th.verify_corollary("2.8").rhs_text == "2^11·Â-top"


def test_corollary_detects_wrong_printed_value(monkeypatch):
    cor = th.COROLLARIES["2.8"]
    monkeypatch.setitem(th.COROLLARIES, "2.8", replace(cor, a_hat=2047))
    rep = th.verify_corollary("2.8")
    assert not rep.passed
    assert "printed" in rep.detail


def test_unknown_corollary():
    with pytest.raises(ValueError):
        th.verify_corollary("2.13")


# -- coefficient formulas --------------------------------------------------------

def test_coefficient_formulas_all_cases():
    reps = th.verify_coefficient_formulas()
    assert reps
    assert {r.case for r in reps} == {f"coefficients-{c}" for c in th.CASES}
    for rep in reps:
        assert rep.passed, (rep.case, rep.dim)


def test_literal_twisted_z_differs_only_through_u():
    fixed = th.closed_form_coefficients("8k/twisted", 1)
    literal = th.closed_form_coefficients("8k/twisted", 1, literal=True)
    R = GradedRing.for_dim(8)
    assert fixed[0] != literal[0]
    assert fixed[1] != literal[1]
    for a, b in zip(fixed, literal):
        assert a.at_u_zero(R) == b.at_u_zero(R)


def test_closed_form_h0_is_minus_a_hat():
    h0, h1 = th.closed_form_coefficients("8k+4", 0)
    assert h1 is None
    A = a_hat_form(4, h0.ring)
    assert h0 == -extract_degree(A, 2)


# -- hyperbolic identity and substrate reports ---------------------------------

def test_hyperbolic_identity():
    rep = th.verify_hyperbolic_identity(14)
    assert rep.passed
    lb = ch_line_bundle_terms(GradedRing(4, 0, True))
    lhs = lb.ch_xi - lb.ch_xi.ring.const(2) + (lb.ch_xi * lb.ch_xi - lb.ch_xi.ring.const(4)).scale(Fraction(1, 2))
    assert lhs.coeff((2,)) == 3


@pytest.mark.parametrize("check", [
    th.verify_modular_forms,
    th.verify_jacobi,
    th.verify_basis_expansions,
    lambda: th.verify_specialization("8k+4/twisted", 1),
    lambda: th.verify_specialization("8k/twisted", 2),
    lambda: th.verify_ring_laws(7),
    lambda: th.verify_routes("8k", 2),
])
def test_substrate_reports_pass(check):
    rep = check()
    assert rep.passed, rep.detail


# -- report format ----------------------------------------------------------------

def test_report_json_schema():
    doc = th.verify_theorem("2.3", 1).to_json()
    assert set(doc) == {"case", "dim", "D", "J", "status", "lhs", "rhs", "residual"}
    assert doc["status"] == "pass"
    assert doc["residual"] == {}
    json.dumps(doc, sort_keys=True)


def test_report_json_is_deterministic():
    a = json.dumps(th.verify_corollary("2.9").to_json(), sort_keys=True)
    b = json.dumps(th.verify_corollary("2.9").to_json(), sort_keys=True)
    assert a == b
    assert "seconds" not in a


def test_summary_line():
    line = th.verify_theorem("2.1", 1).summary_line()
    assert line.startswith("PASS")
    assert "dim 12" in line
