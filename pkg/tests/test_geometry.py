from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fyk.errors import DomainError, ValidationError
from fyk.geometry import (
    ModelMetric,
    conformal_trace_h3,
    det_series,
    e_rho_expansion,
    fg_residual,
    fg_residual_series,
    h_coefficients,
    half_space,
    hyperbolic_ball,
    perturbed,
    ric_rho_rho_rho,
    ricci_trace_rho_rho,
    series_eval,
    series_inv,
    series_mul,
    series_pow,
    trace_h3,
    verify_det_expansion,
    verify_h2_formulas,
    verify_h4_trace,
    verify_ric_h3,
)
from fyk.params import FractionalParams

DIMS = list(range(4, 13))
fractions = st.fractions(min_value=-3, max_value=3, max_denominator=50)


@given(st.lists(fractions, min_size=1, max_size=6), st.lists(fractions, min_size=1, max_size=6))
@settings(max_examples=60, deadline=None)
def test_series_mul_matches_numpy(a, b):
    ref = np.polynomial.polynomial.polymul([float(x) for x in a], [float(x) for x in b])
    got = series_mul(a, b)
    np.testing.assert_allclose([float(x) for x in got[: len(ref)]], ref[: len(got)], atol=1e-12)


@given(st.lists(fractions, min_size=0, max_size=5))
@settings(max_examples=60, deadline=None)
def test_series_inverse_is_exact(tail):
    a = [Fraction(1)] + tail
    prod = series_mul(a, series_inv(a))
    assert prod[0] == 1 and all(c == 0 for c in prod[1:])


def test_series_pow_and_eval():
    a = (Fraction(1), Fraction(0), Fraction(-1, 4))
    sq = series_pow(a, 2)
    assert list(sq[:5]) == [1, 0, Fraction(-1, 2), 0, Fraction(1, 16)]
    assert series_eval(a, 0.5) == pytest.approx(1 - 0.0625)


@pytest.mark.parametrize("n", DIMS)
@pytest.mark.parametrize("make", [hyperbolic_ball, half_space])
def test_models_solve_the_normal_form_equation(make, n):
    model = make(n)
    assert all(c == 0 for c in fg_residual_series(model))
    assert float(np.max(np.abs(fg_residual(model)))) <= 1e-13


@pytest.mark.parametrize("n", DIMS)
@pytest.mark.parametrize("make", [hyperbolic_ball, half_space])
def test_exact_identities(make, n):
    model = make(n)
    assert verify_h2_formulas(model).passed(0.0)
    report, info = verify_h4_trace(model)
    assert report.passed(0.0)
    assert verify_det_expansion(model).passed(0.0)
    assert verify_ric_h3(model).passed(0.0)
    assert ricci_trace_rho_rho(model) == 0


def test_scalar_curvature_reading_fails_on_ball():
    n = 6
    _, info = verify_h4_trace(hyperbolic_ball(n))
    assert info.lhs == Fraction(n, 16)
    assert info.rhs == Fraction(n * n, 16 * (2 - n))
    assert info.abs_err > 0.5


def test_ball_coefficients():
    h = h_coefficients(hyperbolic_ball(5))
    assert list(h) == [1, 0, Fraction(-1, 2), 0, Fraction(1, 16)]


def test_det_series_is_power_of_f():
    m = perturbed(hyperbolic_ball(7), 3, Fraction(1, 7))
    assert list(det_series(m)) == list(series_pow(m.f(), 14)[:5])


@pytest.mark.parametrize("index, delta", [(3, Fraction(1, 10)), (3, Fraction(-2, 3)), (4, Fraction(1, 5))])
def test_perturbation_breaks_the_equation(index, delta):
    m = perturbed(hyperbolic_ball(6), index, delta)
    assert any(c != 0 for c in fg_residual_series(m))
    assert float(np.max(np.abs(fg_residual(m)))) > 1e-4


@given(st.integers(min_value=4, max_value=12), fractions)
@settings(max_examples=40, deadline=None)
def test_ricci_derivative_tracks_h3(n, delta):
    m = perturbed(hyperbolic_ball(n), 3, delta)
    assert ric_rho_rho_rho(m) == -3 * trace_h3(m)
    assert trace_h3(m) == 2 * n * delta


def test_h1_must_vanish():
    m = perturbed(half_space(5), 1, Fraction(1, 3))
    with pytest.raises(DomainError):
        verify_h2_formulas(m)


@pytest.mark.parametrize(
    "kwargs, err",
    [
        (dict(boundary_type="hyperbolic", n=5, warp_series=(1,)), DomainError),
        (dict(boundary_type="flat-torus", n=2, warp_series=(1,)), DomainError),
        (dict(boundary_type="flat-torus", n=5.5, warp_series=(1,)), DomainError),
        (dict(boundary_type="flat-torus", n=5, warp_series=(2,)), ValidationError),
    ],
)
def test_model_validation(kwargs, err):
    with pytest.raises(err):
        ModelMetric(**kwargs)


@pytest.mark.parametrize("g", [0.3, 0.5, 0.8])
def test_e_rho_power_law(g):
    p = FractionalParams(6, g)
    e = e_rho_expansion(hyperbolic_ball(6), p)
    assert e.slope == pytest.approx(p.a, abs=1e-3)
    assert e.leading_coefficient == pytest.approx(e.predicted_coefficient, rel=1e-6)


def test_e_rho_vanishes_on_half_space():
    e = e_rho_expansion(half_space(6), FractionalParams(6, 0.3))
    assert e.leading_coefficient == 0.0 == e.predicted_coefficient


def test_e_rho_dimension_mismatch():
    with pytest.raises(DomainError):
        e_rho_expansion(hyperbolic_ball(6), FractionalParams(7, 0.3))


@given(st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=-1.0, max_value=1.0))
@settings(max_examples=40, deadline=None)
def test_h3_trace_is_conformally_covariant(w0, delta):
    m = perturbed(hyperbolic_ball(7), 3, delta)
    rep = conformal_trace_h3(m, w0)
    assert rep.max_abs_err() <= 1e-12 * max(1.0, abs(float(trace_h3(m))))
