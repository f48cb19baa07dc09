import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fyk.constants import energy_normalization
from fyk.errors import DomainError
from fyk.moments import (
    KINDS,
    build_moments,
    check_convergence,
    clear_cache,
    closed_form_half,
    convergence_exponent,
    integration_by_parts_check,
    kprime_moment,
    moment,
    moment_monte_carlo,
    verify_all_identities,
    verify_identity_7,
    verify_identity_8,
    verify_identity_9,
    verify_identity_10,
    verify_identity_11,
)
from fyk.params import FractionalParams

GAMMAS = [0.1, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.8, 0.9]
N_VALUES = [6, 7, 8, 10, 12]


def test_half_order_examples():
    t = build_moments(0.5, [("A", 1), ("A", 2), ("A", 3), ("B", 1), ("B", 2), ("B", 3)])
    assert t.A(1) == pytest.approx(0.25, rel=1e-13)
    assert t.A(2) == pytest.approx(0.25, rel=1e-13)
    assert t.A(3) == pytest.approx(0.375, rel=1e-13)
    for p in (1, 2, 3):
        assert t.B(p) == pytest.approx(t.A(p), rel=1e-13)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("p", [0.0, 1.0, 2.5, 4.0])
def test_closed_forms_at_half(kind, p):
    if kind == "M" and p == 0.0:
        p = 0.5
    if convergence_exponent(kind, 0.5, p) <= -1:
        p += 2.0
    assert moment(kind, 0.5, p).value == pytest.approx(closed_form_half(kind, p), rel=1e-12)


@pytest.mark.parametrize("g", [0.2, 0.7])
def test_moments_against_mpmath(g):
    # independent high-precision oracle for the K-moment
    ref = float(mpmath.quad(lambda t: t**1.5 * mpmath.besselk(g, t) ** 2, [0, 1, mpmath.inf]))
    assert moment("M", g, 1.5).value == pytest.approx(ref, rel=1e-11)


def test_monte_carlo_oracle_gamma_03():
    g = 0.3
    a = 1 - 2 * g
    mc = moment_monte_carlo("A", g, a + 2, seed=2024)
    assert mc.value == pytest.approx(moment("A", g, a + 2).value, rel=1e-4)


def test_monte_carlo_is_seeded():
    a = moment_monte_carlo("A", 0.4, 2.2, samples=10_000, seed=7)
    b = moment_monte_carlo("A", 0.4, 2.2, samples=10_000, seed=7)
    assert a == b


@pytest.mark.parametrize(
    "kind, p, text",
    [("A", -1.0, "p > -1"), ("B", -0.3, "p > 1 - 4*gamma"), ("C", -0.7, "p > -2*gamma"),
     ("D", 0.7, "p > 2 - 4*gamma"), ("E", 1.7, "p > 3 - 4*gamma"), ("M", -0.5, "q > 2*gamma - 1")],
)
def test_divergence_names_condition(kind, p, text):
    with pytest.raises(DomainError, match=text.replace("*", r"\*")):
        build_moments(0.3, [(kind, p)])


def test_unknown_kind_and_bad_gamma():
    with pytest.raises(DomainError):
        check_convergence("Z", 0.3, 1.0)
    with pytest.raises(DomainError):
        check_convergence("A", 1.3, 1.0)


# D has no fixed sign (D_0 = -phi'(0)^2 / 2 vanishes for gamma > 1/2), so it is left out
@given(st.sampled_from(["A", "B", "C", "E", "M"]), st.floats(min_value=0.05, max_value=0.95), st.floats(min_value=0.0, max_value=6.0))
@settings(max_examples=40, deadline=None)
def test_positive_moments(kind, g, p):
    if convergence_exponent(kind, g, p) <= -1 + 1e-3:
        return
    if kind == "M" and p <= 2 * g - 1 + 1e-3:
        return
    val = moment(kind, g, p).value
    if kind in ("A", "B", "E", "M"):
        assert val > 0
    elif kind == "C":
        assert val < 0


@pytest.mark.parametrize("verify", [verify_identity_10, verify_identity_11, verify_identity_7, verify_identity_8])
@pytest.mark.parametrize("g", GAMMAS)
def test_identities(verify, g):
    assert verify(g).rel_err <= 1e-8


@pytest.mark.parametrize("n", N_VALUES)
@pytest.mark.parametrize("g", GAMMAS)
def test_identity_9(n, g):
    assert verify_identity_9(g, n).rel_err <= 1e-8


def test_identity_examples_at_half():
    c10 = verify_identity_10(0.5)
    assert c10.lhs == pytest.approx(0.75, rel=1e-13) and c10.rhs == pytest.approx(0.75, rel=1e-13)
    c11 = verify_identity_11(0.5)
    assert c11.lhs / c11.rhs == pytest.approx(1.0, rel=1e-13)
    assert verify_identity_9(0.5, 7).rel_err <= 1e-13


def test_identity_9_gate():
    with pytest.raises(DomainError, match="n > 4"):
        verify_identity_9(0.6, 5)


def test_verify_all_skips_inadmissible_n():
    rows, nrows = verify_all_identities(0.9, [5, 6, 7])
    assert [r.name for r in rows] == ["10", "11", "7", "8"]
    assert [n for n, _ in nrows] == [6, 7]


@pytest.mark.parametrize("g", GAMMAS)
@pytest.mark.parametrize("p", [1.0, 2.0, 3.5])
def test_integration_by_parts(g, p):
    t = build_moments(g, [("C", p), ("A", p - 1)])
    assert integration_by_parts_check(t, p).rel_err <= 1e-8


@pytest.mark.parametrize("g, n, tol", [(0.5, 7, 1e-9), (0.3, 6, 1e-7), (0.8, 10, 1e-7)])
def test_kprime_two_routes(g, n, tol):
    assert kprime_moment(g, n).rel_err <= tol


def test_kprime_gate():
    with pytest.raises(DomainError):
        kprime_moment(0.6, 5)


@pytest.mark.parametrize("g", GAMMAS)
def test_energy_normalization(g):
    assert energy_normalization(g) == pytest.approx(1.0, abs=1e-8)


def test_energy_normalization_half_closed_form():
    a = 0.0
    assert closed_form_half("A", a) + closed_form_half("B", a) == 1.0


def test_table_is_immutable_and_keyed():
    t = build_moments(FractionalParams(8, 0.3))
    with pytest.raises(TypeError):
        t.entries[("A", 0.0)] = None
    with pytest.raises(KeyError):
        t.A(17.0)
    assert t.max_relative_error() <= 1e-10


def test_cache_is_keyed_by_tolerance():
    clear_cache()
    a = moment("A", 0.3, 1.2, 1e-12)
    b = moment("A", 0.3, 1.2, 1e-6)
    assert a is moment("A", 0.3, 1.2, 1e-12)
    assert abs(a.value - b.value) <= 1e-6 * a.value
    assert math.isfinite(b.abs_error_estimate)
