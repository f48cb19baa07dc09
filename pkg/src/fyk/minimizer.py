"""Minimization of the fractional Sobolev quotient over a radial basis.

Profiles are generalized bubbles v_k(r) = (1 + r^2)^{-beta_k}.  With the
unitary Fourier convention their transforms are

    v_k^(z) = 2^{1-beta} / Gamma(beta) |z|^{beta - n/2} K_{n/2 - beta}(|z|),

so the Dirichlet form G_jk = int |z|^{2 gamma} v_j^ v_k^ dz is a 1-D radial
integral.  The quotient is Q(c) = c^T G c / ||sum c_k v_k||_{2*}^2, and the
bubble exponent beta = (n - 2 gamma)/2 attains its minimum 1/S(n, gamma).
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .bubble import sphere_area
from .constants import d_star, sharp_constants
from .errors import DomainError, IllConditionedError, StepSizeError
from .moments import extension_energy
from .params import as_params
from .quadrature import IntegrandSpec, integrate_semi_infinite
from .special import gamma_fn, kv

GRAM_TOL = 1e-13
CONDITION_LIMIT = 1e12


def bubble_exponent(params):
    return (params.n - 2.0 * params.gamma) / 2.0


def default_basis(params):
    """The bubble plus two perturbers at offsets 3/2 and 5/2.

    Dilations of the bubble expand as (mu^2 + r^2)^{-beta} =
    sum_k binom(-beta, k) (mu^2 - 1)^k (1 + r^2)^{-beta-k}, so integer
    offsets put approximate dilated bubbles in the span: offset 1 makes the
    minimizer degenerate (Q is flat to second order along the dilation) and
    offset 1/2 admits a second local minimum near a concentrated bubble.
    Offsets 3/2 and 5/2 avoid both, and half-integer offsets keep the
    L^{2*} integrand smooth in t.
    """
    b = bubble_exponent(params)
    return (b, b + 1.5, b + 2.5)


def profile_hat(n, beta, z):
    """Unitary Fourier transform of (1 + r^2)^{-beta} in R^n, radial variable z > 0."""
    z = np.asarray(z, dtype=float)
    return 2.0 ** (1.0 - beta) / gamma_fn(beta) * z ** (beta - n / 2.0) * kv(n / 2.0 - beta, z)


def _hat_exponent(n, beta):
    """Power of z governing profile_hat as z -> 0 (log terms ignored)."""
    return 2.0 * beta - n if beta < n / 2.0 else 0.0


def _gram_entry(n, gamma, bj, bk, tol):
    def f(z):
        return z ** (n - 1.0 + 2.0 * gamma) * profile_hat(n, bj, z) * profile_hat(n, bk, z)

    p = n - 1.0 + 2.0 * gamma + _hat_exponent(n, bj) + _hat_exponent(n, bk)
    est = integrate_semi_infinite(IntegrandSpec(f, p, 2.0), tol=tol, floor=1e-300)
    return sphere_area(n) * est.value


def gram_matrix(params, basis_exponents, tol=GRAM_TOL):
    n, g = params.n, params.gamma
    m = len(basis_exponents)
    G = np.zeros((m, m))
    for j in range(m):
        for k in range(j, m):
            G[j, k] = G[k, j] = _gram_entry(n, g, basis_exponents[j], basis_exponents[k], tol)
    return G


def _theta_rule(panels, order):
    """Composite Gauss-Legendre nodes and weights on (0, pi/2)."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, math.pi / 2.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass
class QuotientProblem:
    """Assembled quotient for a fixed basis.

    The L^{2*} integral uses r = tan(t), under which v_k = cos(t)^{2 beta_k}
    and the radial measure r^{n-1} dr becomes sin^{n-1} t cos^{-n-1} t dt.
    """

    params: object
    basis_exponents: tuple
    gram_dirichlet: np.ndarray
    quad_panels: int = 64
    quad_order: int = 20
    _nodes: np.ndarray = field(init=False, repr=False)
    _basis_values: np.ndarray = field(init=False, repr=False)
    _measure: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t, w = _theta_rule(self.quad_panels, self.quad_order)
        n = self.params.n
        c = np.cos(t)
        self._nodes = t
        self._basis_values = np.array([c ** (2.0 * b) for b in self.basis_exponents])
        self._measure = sphere_area(n) * w * np.sin(t) ** (n - 1.0) * c ** (-n - 1.0)

    @property
    def two_star(self):
        return self.params.two_star

    @property
    def size(self):
        return len(self.basis_exponents)

    def _values(self, c):
        return np.asarray(c, dtype=float) @ self._basis_values

    def lp_integral(self, c):
        """int_{R^n} |sum c_k v_k|^{2*} dx."""
        return float(np.sum(self._measure * np.abs(self._values(c)) ** self.two_star))

    def lp_norm(self, c):
        return self.lp_integral(c) ** (1.0 / self.two_star)

    def dirichlet(self, c):
        c = np.asarray(c, dtype=float)
        return float(c @ self.gram_dirichlet @ c)

    def quotient(self, c):
        c = np.asarray(c, dtype=float)
        if not np.any(c):
            raise DomainError("quotient undefined at c = 0")
        return self.dirichlet(c) / self.lp_norm(c) ** 2

    def gradient(self, c):
        """Analytic gradient (2 G c D - N dD) / D^2 with D = ||f||_{2*}^2."""
        c = np.asarray(c, dtype=float)
        ps = self.two_star
        f = self._values(c)
        integral = float(np.sum(self._measure * np.abs(f) ** ps))
        D = integral ** (2.0 / ps)
        N = self.dirichlet(c)
        weight = self._measure * np.abs(f) ** (ps - 2.0) * f
        dD = 2.0 * integral ** (2.0 / ps - 1.0) * (self._basis_values @ weight)
        return (2.0 * (self.gram_dirichlet @ c) * D - N * dD) / (D * D)

    def hessian(self, c):
        """Analytic Hessian of Q; singular along c because Q is scale invariant."""
        c = np.asarray(c, dtype=float)
        ps = self.two_star
        f = self._values(c)
        V = self._basis_values
        af = np.abs(f)
        integral = float(np.sum(self._measure * af**ps))
        dI = ps * (V @ (self._measure * af ** (ps - 2.0) * f))
        d2I = ps * (ps - 1.0) * (V * (self._measure * af ** (ps - 2.0))) @ V.T
        r = 2.0 / ps
        D = integral**r
        dD = r * integral ** (r - 1.0) * dI
        d2D = r * (r - 1.0) * integral ** (r - 2.0) * np.outer(dI, dI) + r * integral ** (r - 1.0) * d2I
        N = self.dirichlet(c)
        dN = 2.0 * (self.gram_dirichlet @ c)
        d2N = 2.0 * self.gram_dirichlet
        cross = np.outer(dN, dD)
        return d2N / D - (cross + cross.T) / D**2 - N * d2D / D**2 + 2.0 * N * np.outer(dD, dD) / D**3

    def normalize(self, c):
        c = np.asarray(c, dtype=float)
        return c / self.lp_norm(c)

    def bubble_index(self):
        b = bubble_exponent(self.params)
        diffs = [abs(x - b) for x in self.basis_exponents]
        k = int(np.argmin(diffs))
        return k if diffs[k] < 1e-12 else None

    def unit(self, k):
        e = np.zeros(self.size)
        e[k] = 1.0
        return e

    def off_bubble_mass(self, c):
        """sum of |c_k| off the bubble, after scaling to ||f||_{2*} = 1."""
        k = self.bubble_index()
        if k is None:
            raise DomainError("basis does not contain the bubble exponent")
        c = self.normalize(c)
        if c[k] < 0:
            c = -c
        return float(np.sum(np.abs(np.delete(c, k))))


def assemble(params, basis_exponents=None, tol=GRAM_TOL, quad_panels=64, quad_order=20):
    """Build a QuotientProblem; rejects repeated exponents and near-singular Gram matrices."""
    params = as_params(params)
    betas = tuple(float(b) for b in (default_basis(params) if basis_exponents is None else basis_exponents))
    if not betas:
        raise DomainError("basis must be non-empty")
    floor = bubble_exponent(params)
    for b in betas:
        if b < floor - 1e-12:
            raise DomainError(f"basis exponent {b} is below the bubble exponent {floor}")
    if len(set(round(b, 12) for b in betas)) != len(betas):
        raise DomainError("basis exponents must be pairwise distinct")
    G = gram_matrix(params, betas, tol)
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise IllConditionedError("Gram matrix is not positive definite; thin the basis") from None
    cond = float(np.linalg.cond(G))
    if cond > CONDITION_LIMIT:
        raise IllConditionedError(
            f"Gram condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}; thin the basis"
        )
    return QuotientProblem(params, betas, G, quad_panels, quad_order)


class MinimizeResult(NamedTuple):
    coef: np.ndarray
    quotient: float
    iterations: int
    gradient_norm: float
    history: tuple


def _descent_direction(problem, c, g, chol, rule):
    """Newton direction on the tangent space, else the G-preconditioned gradient."""
    pre = np.linalg.solve(chol.T, np.linalg.solve(chol, g))
    if rule == "newton":
        H = problem.hessian(c)
        # Q is flat along c; pin that direction with the Dirichlet form
        Gc = problem.gram_dirichlet @ c
        Hp = H + np.outer(Gc, Gc) / float(c @ Gc) * abs(problem.quotient(c))
        try:
            d = np.linalg.solve(Hp, g)
        except np.linalg.LinAlgError:
            d = None
        if d is not None and np.all(np.isfinite(d)) and float(g @ d) > 0:
            return d, 1.0
    return pre, None


def minimize(problem, c0=None, max_iters=200, gtol=1e-8, step_rule="newton", xtol=1e-12):
    """Projected descent on the sphere ||f||_{2*} = 1.

    ``step_rule`` is "newton" (tangent-space Newton steps with a
    preconditioned-gradient fallback) or "bb" (G^{-1}-preconditioned gradient
    with Barzilai-Borwein step lengths).  Both use Armijo backtracking and
    rescale the iterate after every step.  The dilation of the bubble is a
    nearly flat direction of Q inside the default basis, so gradient steps
    alone converge slowly there.  At the bubble that direction is degenerate
to second order (Q grows quartically along dilations), so Newton steps
contract it linearly and the stopping rule relies on the step size.

    Stops once |grad Q| <= gtol and the last step moved c by at most xtol
    (relative).  A step whose quotient change is at rounding level is
    accepted only if it also reduces the gradient norm.
    """
    if step_rule not in ("newton", "bb"):
        raise DomainError(f"unknown step rule {step_rule!r}")
    if c0 is None:
        k = problem.bubble_index()
        c0 = problem.unit(1 if k == 0 and problem.size > 1 else 0)
    chol = np.linalg.cholesky(problem.gram_dirichlet)
    c = problem.normalize(c0)
    q = problem.quotient(c)
    g = problem.gradient(c)
    history = [q]
    bb_step = 0.5 / max(q, 1e-300)
    prev = None
    last_move = 0.0
    it = 0
    rounding = 64 * np.finfo(float).eps
    while it < max_iters and not (np.linalg.norm(g) <= gtol and last_move <= xtol):
        d, t = _descent_direction(problem, c, g, chol, step_rule)
        if t is None:
            if prev is not None:
                s, y = c - prev[0], d - prev[1]
                sy = float(s @ problem.gram_dirichlet @ y)
                if sy > 0:
                    bb_step = float(s @ problem.gram_dirichlet @ s) / sy
            t = bb_step
        slope = float(g @ d)
        gnorm = float(np.linalg.norm(g))
        accepted = False
        for _ in range(60):
            trial = problem.normalize(c - t * d)
            qt = problem.quotient(trial)
            if qt <= q - 1e-4 * t * slope:
                accepted = True
                break
            if abs(qt - q) <= rounding * abs(q):
                gt = problem.gradient(trial)
                if np.linalg.norm(gt) < gnorm and qt <= q + rounding * abs(q):
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            if gnorm <= gtol:
                break
            raise StepSizeError(
                f"no decrease after backtracking at iteration {it}: "
                f"Q={q!r}, |grad|={gnorm:.3e}, last trial Q={qt!r}"
            )
        prev = (c, np.linalg.solve(chol.T, np.linalg.solve(chol, g)))
        last_move = float(np.linalg.norm(trial - c) / np.linalg.norm(c))
        c, q = trial, min(qt, q)
        g = problem.gradient(c)
        history.append(q)
        it += 1
    k = problem.bubble_index()
    if k is not None and c[k] < 0:
        c, g = -c, -g
    return MinimizeResult(c, q, it, float(np.linalg.norm(g)), tuple(history))


def gradient_check(problem, c, h=1e-5):
    """Max |analytic - central difference| over the gradient components."""
    c = np.asarray(c, dtype=float)
    if not np.any(c):
        raise DomainError("gradient check needs nonzero c")
    g = problem.gradient(c)
    fd = np.zeros_like(g)
    for k in range(len(c)):
        e = np.zeros_like(c)
        e[k] = h
        fd[k] = (problem.quotient(c + e) - problem.quotient(c - e)) / (2.0 * h)
    return float(np.max(np.abs(g - fd)))


class ConventionCheck(NamedTuple):
    fourier_quotient: float
    extension_quotient: float
    inverse_sharp_constant: float
    rel_err_extension: float
    rel_err_sharp: float


def convention_check(problem):
    """Q(bubble) three ways: Fourier side, extension energy, and 1/S(n, gamma)."""
    k = problem.bubble_index()
    if k is None:
        raise DomainError("basis does not contain the bubble exponent")
    e = problem.unit(k)
    q = problem.quotient(e)
    g = problem.params.gamma
    # the extension W = w^(z) phi(|z| y) has energy G_bb * int s^a (phi^2 + phi'^2)
    energy = problem.gram_dirichlet[k, k] * extension_energy(g)
    qe = abs(d_star(g)) * energy / problem.lp_norm(e) ** 2
    lam = sharp_constants(problem.params).Lambda_sphere
    return ConventionCheck(q, qe, lam, abs(qe - q) / abs(q), abs(lam - q) / abs(q))


class SobolevQuotientMinimizer(BaseEstimator):
    """Estimator wrapper: ``fit`` minimizes, ``predict`` evaluates the minimizer at radii.

    ``init`` is "perturber" (start on the last basis element), "bubble", or
    "random" (seeded by ``random_state``).
    """

    def __init__(self, n=5, gamma=0.5, basis_exponents=None, init="perturber",
                 step_rule="newton", max_iter=200, gtol=1e-8, random_state=None):
        self.n = n
        self.gamma = gamma
        self.basis_exponents = basis_exponents
        self.init = init
        self.step_rule = step_rule
        self.max_iter = max_iter
        self.gtol = gtol
        self.random_state = random_state

    def _start(self, problem):
        k = problem.bubble_index()
        if self.init == "bubble":
            if k is None:
                raise DomainError("init='bubble' needs the bubble exponent in the basis")
            return problem.unit(k)
        if self.init == "perturber":
            return problem.unit(problem.size - 1)
        if self.init == "random":
            rng = np.random.default_rng(self.random_state)
            return np.abs(rng.standard_normal(problem.size)) + 0.1
        raise DomainError(f"unknown init {self.init!r}")

    def fit(self, X=None, y=None):
        """X and y are ignored; present for estimator API compatibility."""
        params = as_params(self.gamma, n=self.n)
        self.problem_ = assemble(params, self.basis_exponents)
        res = minimize(
            self.problem_, self._start(self.problem_), self.max_iter, self.gtol, self.step_rule
        )
        self.coef_ = res.coef
        self.quotient_ = res.quotient
        self.n_iter_ = res.iterations
        self.gradient_norm_ = res.gradient_norm
        self.history_ = res.history
        k = self.problem_.bubble_index()
        self.off_bubble_mass_ = self.problem_.off_bubble_mass(res.coef) if k is not None else None
        return self

    def predict(self, r):
        """Minimizer profile sum c_k (1 + r^2)^{-beta_k} at radii ``r``."""
        check_is_fitted(self, "coef_")
        r = np.asarray(r, dtype=float)
        return sum(c * (1.0 + r * r) ** (-b) for c, b in zip(self.coef_, self.problem_.basis_exponents))

    def score(self, X=None, y=None):
        """Negative quotient, so that larger is better."""
        check_is_fitted(self, "coef_")
        return -self.quotient_
