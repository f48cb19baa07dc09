import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fyk.certificate import (
    CERTIFIED,
    NOT_CERTIFIED,
    CurvatureData,
    canonical_cases,
    certify,
)
from fyk.errors import ValidationError
from fyk.params import FractionalParams

BASE = dict(
    umbilic=True,
    mean_curvature_H=0.0,
    F_trace_zero=True,
    F_rho_derivative_zero=True,
    F_third_derivative_zero=True,
)


def _data(**kw):
    return CurvatureData(**{**BASE, "ric_rho_rho_rho": 0.0, "weyl_norm_sq": 0.0, **kw})


def test_canonical_verdicts():
    (p1, c1), (p2, c2), (p3, c3) = canonical_cases()
    r1, r2, r3 = certify(p1, c1), certify(p2, c2), certify(p3, c3)
    assert (r1.theorem_applied, r1.verdict) == ("Theorem1", CERTIFIED)
    assert (r2.theorem_applied, r2.verdict) == ("Theorem2", CERTIFIED)
    assert (r3.theorem_applied, r3.verdict) == ("none", NOT_CERTIFIED)
    # frozen after computing them from the moment tables
    assert r1.mu3_coefficient == pytest.approx(-0.00933001033129366, rel=1e-9)
    assert r2.mu4_coefficient == pytest.approx(-0.00033496827808612183, rel=1e-9)


def test_positive_ricci_is_not_certified():
    r = certify(FractionalParams(7, 0.3), _data(ric_rho_rho_rho=1.0))
    assert r.mu3_coefficient > 0 and not r.certified


@given(st.floats(min_value=-5, max_value=-0.01), st.floats(min_value=-5, max_value=-0.01))
@settings(max_examples=30, deadline=None)
def test_mu3_is_linear_in_ricci(r1, r2):
    p = FractionalParams(7, 0.3)
    a = certify(p, _data(ric_rho_rho_rho=r1)).mu3_coefficient
    b = certify(p, _data(ric_rho_rho_rho=r2)).mu3_coefficient
    assert a * r2 == pytest.approx(b * r1, rel=1e-12)
    assert (r1 < r2) == (a < b)


def test_failed_hypothesis_blocks_certificate():
    r = certify(FractionalParams(7, 0.3), _data(ric_rho_rho_rho=-1.0, umbilic=False))
    assert r.mu3_coefficient < 0
    assert r.verdict == NOT_CERTIFIED
    assert ("umbilic", False) in r.hypotheses_report


def test_weyl_regime_needs_n_above_5():
    r = certify(FractionalParams(5.5, 0.4), _data(weyl_norm_sq=1.0))
    assert r.theorem_applied == "Theorem2"
    assert not r.certified


def test_low_dimension_note():
    r = certify(FractionalParams(5, 0.3), _data(ric_rho_rho_rho=-1.0))
    assert any("n < 6" in note for note in r.notes)


def test_schema_round_trip():
    c = _data(ric_rho_rho_rho=-3.0, trace_h3=1.0)
    again = CurvatureData.from_dict(json.loads(json.dumps(c.to_dict())))
    assert again == c


@pytest.mark.parametrize(
    "patch, field",
    [({"H": "zero"}, "H"), ({"weyl_norm_sq": -1}, "weyl_norm_sq"), ({"extra": 1}, "<root>")],
)
def test_schema_errors_name_field(patch, field):
    data = {**_data().to_dict(), **patch}
    with pytest.raises(ValidationError, match=field):
        CurvatureData.from_dict(data)


def test_missing_field():
    data = _data().to_dict()
    del data["umbilic"]
    with pytest.raises(ValidationError, match="umbilic"):
        CurvatureData.from_dict(data)


def test_inconsistent_h3_rejected():
    with pytest.raises(ValidationError, match="-3 \\* trace_h3"):
        _data(ric_rho_rho_rho=-1.0, trace_h3=1.0)


def test_non_finite_rejected():
    with pytest.raises(ValidationError):
        _data(ric_rho_rho_rho=float("nan"))


def test_certificate_serializes():
    p, c = canonical_cases()[0]
    d = certify(p, c).to_dict()
    json.dumps(d)
    assert d["hypotheses_report"][0] == {"name": "umbilic", "pass": True}


def test_rejects_plain_dict():
    with pytest.raises(ValidationError):
        certify(FractionalParams(7, 0.3), {"umbilic": True})
