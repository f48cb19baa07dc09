import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fyk.bubble import (
    BubbleFamily,
    Jp_direct,
    angular_moments,
    angular_moments_mc,
    bubble_C0,
    closed_forms,
    compute_H,
    compute_I,
    hankel_transform_bubble,
    jp_scaling_exponent,
    poisson_constant,
    poisson_mass,
    printed_H_forms,
    reduce_Jp,
    sphere_area,
    theta_combination,
    verify_bubble_transform,
)
from fyk.constants import theta
from fyk.errors import AccuracyError, DomainError
from fyk.params import FractionalParams

CASES = [(6, 0.2), (7, 0.3), (8, 0.25), (10, 0.5), (12, 0.8)]


def test_sphere_area_small_dimensions():
    assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-14)
    assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-14)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2, rel=1e-14)


def test_C0_against_mpmath_transform():
    # unitary transform of (1 + r^2)^{-m} at one frequency, independent route
    p = FractionalParams(3, 0.5)
    m = (p.n - 2 * p.gamma) / 2
    z = 1.3
    ref = mpmath.sqrt(2 / mpmath.pi) / z * mpmath.quadosc(
        lambda r: r * mpmath.sin(z * r) * (1 + r * r) ** (-m), [0, mpmath.inf], omega=z
    )
    fam = BubbleFamily(p)
    assert float(fam.w_hat(z)) == pytest.approx(float(ref), rel=1e-10)
    assert bubble_C0(p) == pytest.approx(2 ** (1 - m) / math.gamma(m), rel=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5, 8])
def test_angular_moments_are_exact_fractions(n):
    ang = angular_moments(n)
    mc = angular_moments_mc(n, samples=100_000, seed=1)
    for key, val in ang.items():
        assert mc[key] == pytest.approx(float(val), rel=2e-2)
    assert ang["mean_xi4_over_zeta4"] == 3 * ang["mean_xi2eta2_over_zeta4"]


def test_angular_moments_domain():
    with pytest.raises(DomainError):
        angular_moments(1)


def test_bubble_family_rejects_bad_mu():
    with pytest.raises(DomainError):
        BubbleFamily(FractionalParams(7, 0.3), mu=0.0)


@given(st.floats(min_value=0.2, max_value=5.0), st.floats(min_value=0.0, max_value=20.0))
@settings(max_examples=50, deadline=None)
def test_bubble_dilation_identity(mu, r):
    p = FractionalParams(7, 0.3)
    one = BubbleFamily(p)
    fam = BubbleFamily(p, mu=mu)
    m = one.exponent
    assert float(fam.w(r)) == pytest.approx(mu ** (-m) * float(one.w(r / mu)), rel=1e-12)


@pytest.mark.parametrize("n, g", CASES)
def test_integrals_match_closed_forms(n, g):
    ext = compute_I(FractionalParams(n, g))
    name, err = ext.worst()
    assert err <= 1e-10, name
    assert ext.check(1e-10)
    for key in ("I1=3I2", "I1=3I3", "I1=H1+H2+H3", "I1-cancellation"):
        assert ext.relations[key] <= 1e-10


def test_check_raises_with_worst_name():
    ext = compute_I(FractionalParams(7, 0.3))
    with pytest.raises(AccuracyError, match="deviates"):
        ext.check(1e-20)


@pytest.mark.parametrize("n, g", [(5, 0.6), (4.5, 0.3), (5.9, 0.99)])
def test_integrals_need_n_above_4(n, g):
    with pytest.raises(DomainError, match="n > 4"):
        compute_I(FractionalParams(n, g))


@pytest.mark.parametrize("n, g", CASES)
def test_theta_combination(n, g):
    p = FractionalParams(n, g)
    lhs, j2 = theta_combination(p)
    assert lhs / j2 == pytest.approx(theta(n, p.a), rel=1e-10)


def test_h_closed_forms_and_printed_prefactors():
    p = FractionalParams(7, 0.3)
    H = compute_H(p)
    for name in ("H1", "H2", "H3"):
        assert H[name]["rel_err"] <= 1e-10
    assert H["H1"]["kprime_route"] == pytest.approx(H["H1"]["numeric"], rel=1e-9)
    # the alternative prefactors are off by 2/3 and 1/3 respectively
    assert H["H1"]["printed_form"] / H["H1"]["closed_form"] == pytest.approx(2 / 3, rel=1e-14)
    assert H["H3"]["printed_form"] / H["H3"]["closed_form"] == pytest.approx(1 / 3, rel=1e-14)
    assert printed_H_forms(p)["H2"] == closed_forms(p)["H2"]


@pytest.mark.parametrize("p_exp, slope", [(1, 3.0), (2, 4.0)])
def test_jp_scaling(p_exp, slope):
    assert jp_scaling_exponent(FractionalParams(7, 0.3), p_exp) == pytest.approx(slope, abs=1e-8)


@pytest.mark.parametrize("n, g, p_exp", [(7, 0.3, 1), (7, 0.3, 2), (9, 0.7, 2), (6, 0.4, 1)])
def test_jp_two_routes(n, g, p_exp):
    p = FractionalParams(n, g)
    assert Jp_direct(p, p_exp) == pytest.approx(reduce_Jp(p, p_exp), rel=1e-10)


def test_jp_divergence_messages():
    with pytest.raises(DomainError, match="n - 4 - 2\\*gamma > -1"):
        reduce_Jp(FractionalParams(4, 0.6), 1)
    with pytest.raises(DomainError):
        reduce_Jp(FractionalParams(7, 0.3), -2)


@pytest.mark.parametrize("n, g", [(3, 0.5), (5, 0.3), (7, 0.7)])
def test_bubble_transform(n, g):
    rep = verify_bubble_transform(FractionalParams(n, g))
    assert rep.max_rel_dev <= 1e-10
    assert rep.ratio_dev <= 1e-10
    assert rep.C0_fit == pytest.approx(rep.C0_closed, rel=1e-10)


def test_transform_grid_is_checked():
    with pytest.raises(DomainError):
        verify_bubble_transform(FractionalParams(5, 0.3), zeta_grid=[0.05, 1.0])


def test_hankel_transform_scales_with_mu():
    p = FractionalParams(5, 0.3)
    fam = BubbleFamily(p, mu=2.0)
    assert hankel_transform_bubble(p, 0.7, mu=2.0) == pytest.approx(float(fam.w_hat(0.7)), rel=1e-9)


@pytest.mark.parametrize("n, g", [(3, 0.5), (5, 0.3), (7, 0.8), (4, 0.1)])
def test_poisson_mass_is_one(n, g):
    assert poisson_mass(n, g) == pytest.approx(1.0, abs=1e-10)


def test_poisson_constant_against_mpmath():
    ref = mpmath.gamma(2.8) / (mpmath.pi**2.5 * mpmath.gamma(0.3))
    assert poisson_constant(5, 0.3) == pytest.approx(float(ref), rel=1e-13)


def test_u_hat_at_boundary_is_w_hat():
    p = FractionalParams(7, 0.3)
    fam = BubbleFamily(p)
    z = np.array([0.3, 1.0, 4.0])
    np.testing.assert_allclose(fam.U_hat(z, 1e-80), fam.w_hat(z), rtol=1e-12)
