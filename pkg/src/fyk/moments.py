"""Semi-infinite moments of the extension profile and of K_gamma.

Notation, for the profile phi of order gamma and a = 1 - 2 gamma:

    A_p = int s^p phi^2          (converges iff p > -1)
    B_p = int s^p phi'^2         (converges iff p > 1 - 4 gamma)
    C_p = int s^p phi phi'       (converges iff p > -2 gamma)
    D_p = int s^p phi' phi''     (converges iff p > 2 - 4 gamma)
    E_p = int s^p phi''^2        (converges iff p > 3 - 4 gamma)
    M_q = int t^q K_gamma(t)^2   (converges iff q > 2 gamma - 1 and q > -1)

Every moment is cached per (kind, gamma, exponent, tol); ``clear_cache``
drops the cache, and a different tolerance is simply a different key.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping, NamedTuple

import numpy as np

from .errors import DomainError
from .params import FractionalParams
from .quadrature import IntegrandSpec, QuadratureEstimate, integrate_semi_infinite
from .special import kv, kv_prime, profile

KINDS = ("A", "B", "C", "D", "E", "M")
DEFAULT_TOL = 1e-12


def _key(p):
    return round(float(p), 10)


def convergence_exponent(kind, gamma, p):
    """Leading power of the integrand at 0 (must exceed -1)."""
    g = float(gamma)
    shift = {
        "A": 0.0,
        "B": 4.0 * g - 2.0,
        "C": 2.0 * g - 1.0,
        "D": 4.0 * g - 3.0,
        "E": 4.0 * g - 4.0,
        "M": -2.0 * g,
    }[kind]
    return float(p) + shift


def check_convergence(kind, gamma, p):
    """Raise DomainError naming the violated condition if the moment diverges."""
    if kind not in KINDS:
        raise DomainError(f"unknown moment kind {kind!r}")
    g = float(gamma)
    if not 0.0 < g < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {g}")
    conditions = {
        "A": (-1.0, "p > -1"),
        "B": (1.0 - 4.0 * g, "p > 1 - 4*gamma"),
        "C": (-2.0 * g, "p > -2*gamma"),
        "D": (2.0 - 4.0 * g, "p > 2 - 4*gamma"),
        "E": (3.0 - 4.0 * g, "p > 3 - 4*gamma"),
        "M": (max(2.0 * g - 1.0, -1.0), "q > 2*gamma - 1 and q > -1"),
    }
    bound, text = conditions[kind]
    if not float(p) > bound:
        raise DomainError(
            f"moment {kind}_{float(p):g} diverges at gamma={g:g}: requires {text}"
        )


def _integrand(kind, gamma, p):
    prof = profile(gamma)
    if kind == "A":
        return lambda s: s**p * prof.phi(s) ** 2
    if kind == "B":
        return lambda s: s**p * prof.phi_prime(s) ** 2
    if kind == "C":
        return lambda s: s**p * prof.phi(s) * prof.phi_prime(s)
    if kind == "D":
        return lambda s: s**p * prof.phi_prime(s) * prof.phi_second(s)
    if kind == "E":
        return lambda s: s**p * prof.phi_second(s) ** 2
    return lambda t: t**p * kv(gamma, t) ** 2


@lru_cache(maxsize=8192)
def _moment_cached(kind, gamma, p, tol):
    check_convergence(kind, gamma, p)
    spec = IntegrandSpec(
        evaluator=_integrand(kind, gamma, p),
        endpoint_exponent_at_zero=convergence_exponent(kind, gamma, p),
        decay_rate=2.0,
    )
    return integrate_semi_infinite(spec, tol=tol, floor=1e-300)


def moment(kind, gamma, p, tol=DEFAULT_TOL):
    """One moment as a QuadratureEstimate (cached)."""
    return _moment_cached(kind, float(gamma), _key(p), float(tol))


def clear_cache():
    """Forget every cached moment."""
    _moment_cached.cache_clear()


@dataclass(frozen=True)
class MomentTable:
    """Immutable table of moments for one gamma, keyed by (kind, exponent)."""

    gamma: float
    tol: float
    entries: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def get(self, kind, p):
        try:
            return self.entries[(kind, _key(p))]
        except KeyError:
            raise KeyError(f"moment {kind}_{p:g} not in table for gamma={self.gamma:g}") from None

    def value(self, kind, p):
        return self.get(kind, p).value

    def A(self, p):
        return self.value("A", p)

    def B(self, p):
        return self.value("B", p)

    def C(self, p):
        return self.value("C", p)

    def D(self, p):
        return self.value("D", p)

    def E(self, p):
        return self.value("E", p)

    def M(self, q):
        return self.value("M", q)

    def max_relative_error(self):
        return max(e.abs_error_estimate / abs(e.value) for e in self.entries.values())


def standard_exponents(params):
    """Every moment the identity checks and the extension integrals need."""
    g = params.gamma if isinstance(params, FractionalParams) else float(params)
    a = 1.0 - 2.0 * g
    ex = [
        ("A", a), ("B", a),
        ("A", a + 1), ("A", a + 2), ("A", a + 3), ("A", a + 4),
        ("B", a + 2), ("B", a + 3), ("B", a + 4),
        ("C", a + 1), ("C", a + 3),
        ("D", a + 3), ("E", a + 4),
    ]
    if isinstance(params, FractionalParams):
        n = params.n
        if params.above_3:
            ex += [("A", 1 + a), ("M", n - 4)]
        if params.above_4:
            ex += [("A", n - 4 + a), ("A", n - 6 + a), ("M", n - 3), ("M", n - 5)]
    out = []
    for item in ex:
        if (item[0], _key(item[1])) not in [(k, _key(v)) for k, v in out]:
            out.append(item)
    return out


def build_moments(params, exponents=None, tol=DEFAULT_TOL):
    """Compute a MomentTable for ``params`` (FractionalParams or gamma).

    ``exponents`` is an iterable of (kind, p) pairs; by default the set from
    ``standard_exponents`` is used.
    """
    g = params.gamma if isinstance(params, FractionalParams) else float(params)
    if exponents is None:
        exponents = standard_exponents(params)
    exponents = list(exponents)
    for kind, p in exponents:
        check_convergence(kind, g, p)
    entries = {(kind, _key(p)): moment(kind, g, p, tol) for kind, p in exponents}
    return MomentTable(gamma=g, tol=float(tol), entries=entries)


class IdentityCheck(NamedTuple):
    """Both sides of a moment identity and their relative discrepancy."""

    name: str
    lhs: float
    rhs: float
    rel_err: float


def _check(name, lhs, rhs):
    return IdentityCheck(name, float(lhs), float(rhs), abs(lhs - rhs) / abs(rhs))


def _table_for(table_or_gamma, exponents):
    if isinstance(table_or_gamma, MomentTable):
        return table_or_gamma
    return build_moments(table_or_gamma, exponents)


def verify_identity_10(table):
    """int s^{a+3}(phi^2 + phi'^2) = 3(a+2)/2 int s^{a+1} phi^2."""
    g = table.gamma if isinstance(table, MomentTable) else float(table)
    a = 1.0 - 2.0 * g
    t = _table_for(table, [("A", a + 3), ("B", a + 3), ("A", a + 1)])
    return _check("10", t.A(a + 3) + t.B(a + 3), 1.5 * (a + 2) * t.A(a + 1))


def verify_identity_11(table):
    """int s^{a+2} phi'^2 = (3+a)/(3-a) int s^{a+2} phi^2."""
    g = table.gamma if isinstance(table, MomentTable) else float(table)
    a = 1.0 - 2.0 * g
    t = _table_for(table, [("B", a + 2), ("A", a + 2)])
    return _check("11", t.B(a + 2), (3 + a) / (3 - a) * t.A(a + 2))


def verify_identity_7(table):
    """int s^{a+4} phi'^2 = (a+5)(a+3)/5 int s^{a+2} phi^2."""
    g = table.gamma if isinstance(table, MomentTable) else float(table)
    a = 1.0 - 2.0 * g
    t = _table_for(table, [("B", a + 4), ("A", a + 2)])
    return _check("7", t.B(a + 4), (a + 5) * (a + 3) / 5.0 * t.A(a + 2))


def verify_identity_8(table):
    """int s^{a+4} phi^2 = (a+3)(5-a)/5 int s^{a+2} phi^2."""
    g = table.gamma if isinstance(table, MomentTable) else float(table)
    a = 1.0 - 2.0 * g
    t = _table_for(table, [("A", a + 4), ("A", a + 2)])
    return _check("8", t.A(a + 4), (a + 3) * (5 - a) / 5.0 * t.A(a + 2))


def verify_identity_9(table, n):
    """int s^{n-4+a} phi^2 = (n-4)(n-5+a)(n-3-a)/(4(n-3)) int s^{n-6+a} phi^2."""
    g = table.gamma if isinstance(table, MomentTable) else float(table)
    a = 1.0 - 2.0 * g
    n = float(n)
    if not n > 4.0 + 2.0 * g:
        raise DomainError(
            f"identity 9 needs n > 4 + 2*gamma (n - 6 + a > -1), got n={n:g}, gamma={g:g}"
        )
    t = _table_for(table, [("A", n - 4 + a), ("A", n - 6 + a)])
    factor = (n - 4) * (n - 5 + a) * (n - 3 - a) / (4.0 * (n - 3))
    return _check("9", t.A(n - 4 + a), factor * t.A(n - 6 + a))


def verify_all_identities(gamma, n_values=(), tol=DEFAULT_TOL):
    """Run identities 10, 11, 7, 8 and, for each admissible n, identity 9."""
    table = build_moments(gamma, tol=tol)
    rows = [
        verify_identity_10(table),
        verify_identity_11(table),
        verify_identity_7(table),
        verify_identity_8(table),
    ]
    nrows = []
    a = 1.0 - 2.0 * float(gamma)
    for n in n_values:
        if float(n) > 4.0 + 2.0 * float(gamma):
            t = build_moments(gamma, [("A", n - 4 + a), ("A", n - 6 + a)], tol=tol)
            nrows.append((n, verify_identity_9(t, n)))
    return rows, nrows


def closed_form_half(kind, p):
    """Exact moments at gamma = 1/2 where phi = e^{-s} and K = sqrt(pi/2t) e^{-t}."""
    p = float(p)
    if kind in ("A", "B", "E"):
        return math.gamma(p + 1) / 2 ** (p + 1)
    if kind in ("C", "D"):
        return -math.gamma(p + 1) / 2 ** (p + 1)
    if kind == "M":
        return 0.5 * math.pi * math.gamma(p) / 2**p
    raise DomainError(f"unknown moment kind {kind!r}")


class KPrimeReport(NamedTuple):
    direct: float
    reduced: float
    rel_err: float


def kprime_moment(gamma, n, tol=DEFAULT_TOL):
    """int t^{n-3} (K_gamma'(t) - gamma K_gamma(t)/t)^2 dt, two ways.

    ``direct`` integrates the definition.  ``reduced`` expands the square
    and uses the integrations by parts

        int t^{n-3} K'^2 = [(n-2) M_{n-3} + gamma^2 (n-4) M_{n-5}] / (n-4)
        -2 gamma int t^{n-4} K K' = gamma (n-4) M_{n-5}

    which give (n-2)/(n-4) M_{n-3} + (2 gamma^2 + gamma (n-4)) M_{n-5}.
    """
    g, n = float(gamma), float(n)
    if not n > 4.0 + 2.0 * g:
        raise DomainError(
            f"kprime moment needs n > 4 + 2*gamma, got n={n:g}, gamma={g:g}"
        )

    def f(t):
        return t ** (n - 3) * (kv_prime(g, t) - g * kv(g, t) / t) ** 2

    spec = IntegrandSpec(f, n - 5.0 - 2.0 * g, 2.0)
    direct = integrate_semi_infinite(spec, tol=tol, floor=1e-300).value
    m3 = moment("M", g, n - 3, tol).value
    m5 = moment("M", g, n - 5, tol).value
    reduced = (n - 2) / (n - 4) * m3 + (2 * g * g + g * (n - 4)) * m5
    return KPrimeReport(direct, reduced, abs(direct - reduced) / abs(reduced))


def extension_energy(gamma, tol=DEFAULT_TOL):
    """int s^a (phi^2 + phi'^2) ds, the extension energy per unit Dirichlet form."""
    a = 1.0 - 2.0 * float(gamma)
    return moment("A", gamma, a, tol).value + moment("B", gamma, a, tol).value


def integration_by_parts_check(table, p):
    """C_p = -(p/2) A_{p-1}; returns an IdentityCheck."""
    return _check(f"C_{p:g}", table.C(p), -0.5 * p * table.A(p - 1))


class MonteCarloEstimate(NamedTuple):
    value: float
    std_error: float
    samples: int
    seed: int


def moment_monte_carlo(kind, gamma, p, samples=400_000, seed=0):
    """Stratified Monte-Carlo estimate of a moment, independent of the quadrature.

    Samples s = -ln(u)/2 with u stratified on (0, 1), i.e. an exponential
    proposal with rate 2 matching the e^{-2s} decay of every integrand, and
    averages the weight integrand(s) e^{2s}/2.  ``std_error`` is the
    jackknife spread of two interleaved half-samples, an upper-bound style
    indicator rather than a confidence interval.
    """
    check_convergence(kind, gamma, p)
    if convergence_exponent(kind, gamma, p) < 0:
        raise DomainError("Monte-Carlo check needs an integrand bounded at s = 0")
    samples = int(samples)
    if samples < 2:
        raise DomainError("need at least two samples")
    rng = np.random.default_rng(seed)
    u = (np.arange(samples) + rng.random(samples)) / samples
    s = -0.5 * np.log(u)
    f = _integrand(kind, float(gamma), float(p))
    weights = np.asarray(f(s), dtype=float) * np.exp(2.0 * s) / 2.0
    value = float(np.mean(weights))
    halves = float(np.mean(weights[0::2])), float(np.mean(weights[1::2]))
    return MonteCarloEstimate(value, abs(halves[0] - halves[1]) / 2.0, samples, int(seed))
