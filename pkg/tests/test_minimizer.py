import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from fyk.constants import sharp_constants
from fyk.errors import DomainError, IllConditionedError
from fyk.minimizer import (
    SobolevQuotientMinimizer,
    assemble,
    bubble_exponent,
    convention_check,
    default_basis,
    gradient_check,
    gram_matrix,
    minimize,
    profile_hat,
)
from fyk.params import FractionalParams

P5 = FractionalParams(5, 0.5)


@pytest.fixture(scope="module")
def problem():
    return assemble(P5)


def inverse_sharp(params):
    return 1.0 / sharp_constants(params).S_n_gamma


def test_default_basis_starts_at_bubble():
    beta = bubble_exponent(P5)
    assert beta == 2.0
    assert default_basis(P5) == (2.0, 3.5, 4.5)


def test_profile_hat_of_bubble_is_C0_K():
    # beta = (n - 2 gamma)/2 recovers the bubble transform
    from fyk.bubble import BubbleFamily

    z = np.array([0.2, 1.0, 5.0])
    np.testing.assert_allclose(profile_hat(5, 2.0, z), BubbleFamily(P5).w_hat(z), rtol=1e-12)


def test_gram_is_symmetric_positive(problem):
    G = problem.gram_dirichlet
    assert np.array_equal(G, G.T)
    assert np.all(np.linalg.eigvalsh(G) > 0)


def test_gram_matrix_function_matches_problem(problem):
    np.testing.assert_allclose(gram_matrix(P5, problem.basis_exponents), problem.gram_dirichlet, rtol=1e-14)


def test_bubble_quotient_matches_sharp_constant(problem):
    rep = convention_check(problem)
    assert rep.rel_err_sharp <= 1e-12
    assert rep.rel_err_extension <= 1e-12


@given(st.lists(st.floats(min_value=-2, max_value=2), min_size=3, max_size=3),
       st.floats(min_value=0.1, max_value=10.0))
@settings(max_examples=40, deadline=None)
def test_quotient_scale_invariant_and_above_sharp(problem, c, lam):
    c = np.array(c)
    if np.linalg.norm(c) < 1e-3:
        return
    q = problem.quotient(c)
    assert problem.quotient(lam * c) == pytest.approx(q, rel=1e-12)
    assert problem.quotient(-c) == pytest.approx(q, rel=1e-12)
    assert q >= inverse_sharp(P5) * (1 - 1e-12)


@pytest.mark.parametrize("c", [[1.0, 0.3, -0.2], [0.2, 1.0, 0.5], [0.0, 0.0, 1.0]])
def test_gradient_check(problem, c):
    c = np.array(c)
    assert gradient_check(problem, c) <= 1e-8 * max(1.0, np.linalg.norm(problem.gradient(c)))


def test_gradient_orthogonal_to_c(problem):
    c = np.array([0.7, -0.4, 0.9])
    assert abs(problem.gradient(c) @ c) <= 1e-12 * np.linalg.norm(problem.gradient(c))


def test_hessian_matches_differences(problem):
    c = np.array([1.0, 0.3, -0.2])
    h = 1e-6
    fd = np.column_stack([
        (problem.gradient(c + h * e) - problem.gradient(c - h * e)) / (2 * h) for e in np.eye(3)
    ])
    np.testing.assert_allclose(problem.hessian(c), fd, atol=1e-7)


def test_quotient_at_zero_raises(problem):
    with pytest.raises(DomainError):
        problem.quotient(np.zeros(3))


def test_reordering_basis_is_invariant(problem):
    other = assemble(P5, [4.5, 2.0, 3.5])
    c = np.array([1.0, -0.2, 0.3])
    assert other.quotient(c[[2, 0, 1]]) == pytest.approx(problem.quotient(c), rel=1e-13)


def test_refining_basis_keeps_value(problem):
    fine = assemble(P5, [2.0, 3.5, 4.5, 6.0])
    c = np.array([1.0, -0.2, 0.3])
    assert fine.quotient(np.append(c, 0.0)) == pytest.approx(problem.quotient(c), rel=1e-13)


def test_two_element_grid_search():
    pr = assemble(P5, [2.0, 3.5])
    angles = np.linspace(0, np.pi, 721)[:-1]
    q = np.array([pr.quotient(np.array([np.cos(t), np.sin(t)])) for t in angles])
    assert q.min() == pytest.approx(inverse_sharp(P5), rel=1e-6)
    assert abs(np.sin(angles[q.argmin()])) < 1e-2


@pytest.mark.parametrize("rule", ["newton", "bb"])
def test_minimize_reaches_bubble(problem, rule):
    res = minimize(problem, np.array([1.0, 0.3, -0.2]), max_iters=2000, step_rule=rule)
    assert res.quotient == pytest.approx(inverse_sharp(P5), rel=1e-12)
    assert problem.off_bubble_mass(res.coef) <= 1e-6
    assert all(b <= a + 1e-12 * a for a, b in zip(res.history, res.history[1:]))


def test_start_at_bubble_takes_no_steps(problem):
    res = minimize(problem, problem.unit(problem.bubble_index()))
    assert res.iterations == 0


def test_unknown_step_rule(problem):
    with pytest.raises(DomainError):
        minimize(problem, step_rule="gradient")


@pytest.mark.parametrize(
    "basis, err",
    [([], DomainError), ([1.0], DomainError), ([2.0, 2.0], DomainError), ([2.0, 2.0 + 1e-9], IllConditionedError)],
)
def test_assemble_validation(basis, err):
    with pytest.raises(err):
        assemble(P5, basis)


@pytest.mark.parametrize("n, g", [(3, 0.5), (4, 0.3), (5, 0.5), (7, 0.8)])
@pytest.mark.parametrize("init", ["perturber", "random"])
def test_estimator_converges(n, g, init):
    est = SobolevQuotientMinimizer(n=n, gamma=g, init=init, random_state=3).fit()
    assert est.quotient_ == pytest.approx(inverse_sharp(FractionalParams(n, g)), rel=1e-10)
    assert est.off_bubble_mass_ <= 1e-6
    assert est.score() == -est.quotient_


def test_estimator_api():
    est = SobolevQuotientMinimizer(n=5, gamma=0.5, random_state=0)
    assert clone(est).get_params() == est.get_params()
    est.fit()
    r = np.array([0.0, 1.0, 3.0])
    v = est.predict(r)
    assert v.shape == (3,)
    assert np.all(np.diff(np.abs(v)) < 0)


def test_estimator_is_deterministic():
    a = SobolevQuotientMinimizer(n=5, gamma=0.5, init="random", random_state=11).fit()
    b = SobolevQuotientMinimizer(n=5, gamma=0.5, init="random", random_state=11).fit()
    np.testing.assert_array_equal(a.coef_, b.coef_)


def test_estimator_unknown_init():
    with pytest.raises(DomainError):
        SobolevQuotientMinimizer(init="zeros").fit()
