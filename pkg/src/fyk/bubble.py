"""The standard bubble, its extension, and the weighted extension integrals.

Conventions.  The Fourier transform is unitary, f^(z) = (2 pi)^{-n/2} int
f(x) e^{-i z.x} dx, so Plancherel holds without constants.  For the bubble
w(x) = (1 + |x|^2)^{-m}, m = (n - 2 gamma)/2, one has

    w^(z) = C0 |z|^{-gamma} K_gamma(|z|),   C0 = 2^{1-m} / Gamma(m),

and the extension is U^(z, y) = w^(z) phi(|z| y).  Every integral over the
half space reduces to a product of a profile moment (moments module) and a
radial integral of w^ or its derivative.  With r = |z|, w' = dw^/dr =
-C0 r^{-gamma} K_{gamma+1}(r) and v = r w^, the radial integrals used are

    P1 = int r^{n-2-a} w'^2,  P2 = int r^{n-3-a} 2 w^ w',  P3 = int r^{n-4-a} w^2,
    Q1 = int r^{n-4-a} v'^2,  Q2 = int r^{n-5-a} 2 v v',   Q3 = int r^{n-6-a} v^2.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping, NamedTuple

import numpy as np

from .errors import AccuracyError, DomainError
from .moments import DEFAULT_TOL, build_moments, moment
from .params import FractionalParams
from .quadrature import (
    IntegrandSpec,
    bessel_j_zeros,
    integrate_finite,
    integrate_oscillatory,
    integrate_semi_infinite,
)
from .special import _bessel_j, gamma_fn, kv, profile


def sphere_area(n):
    """Surface area |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2) of the unit sphere in R^n."""
    n = float(n)
    return 2.0 * math.pi ** (n / 2.0) / gamma_fn(n / 2.0)


def bubble_C0(params):
    """Constant in w^(z) = C0 |z|^{-gamma} K_gamma(|z|), unitary convention."""
    m = (params.n - 2.0 * params.gamma) / 2.0
    return 2.0 ** (1.0 - m) / gamma_fn(m)


def angular_moments(n):
    """Exact sphere averages of xi^2/|z|^2, xi^4/|z|^4 and xi^2 eta^2/|z|^4 in R^n."""
    n = int(n)
    if n < 2:
        raise DomainError(f"angular moments need n >= 2, got {n}")
    return {
        "mean_xi2_over_zeta2": Fraction(1, n),
        "mean_xi4_over_zeta4": Fraction(3, n * (n + 2)),
        "mean_xi2eta2_over_zeta4": Fraction(1, n * (n + 2)),
    }


def angular_moments_mc(n, samples=200_000, seed=0):
    """Monte-Carlo estimate of the same averages from Gaussian directions."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((int(samples), int(n)))
    r2 = np.einsum("ij,ij->i", z, z)
    x2 = z[:, 0] ** 2 / r2
    y2 = z[:, 1] ** 2 / r2
    return {
        "mean_xi2_over_zeta2": float(x2.mean()),
        "mean_xi4_over_zeta4": float((x2 * x2).mean()),
        "mean_xi2eta2_over_zeta4": float((x2 * y2).mean()),
    }


@dataclass(frozen=True)
class BubbleFamily:
    """w_mu(x) = (mu / (|x|^2 + mu^2))^{(n - 2 gamma)/2} and its transforms."""

    params: FractionalParams
    mu: float = 1.0
    C0: float = field(default=None)

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError("mu must be positive")
        if self.C0 is None:
            object.__setattr__(self, "C0", bubble_C0(self.params))

    @property
    def exponent(self):
        return (self.params.n - 2.0 * self.params.gamma) / 2.0

    def w(self, r):
        """Bubble as a function of |x|."""
        r = np.asarray(r, dtype=float)
        return (self.mu / (r * r + self.mu**2)) ** self.exponent

    def w_hat(self, zeta):
        """Radial Fourier transform mu^{(n+2g)/2} C0 (mu z)^{-g} K_g(mu z)."""
        g = self.params.gamma
        t = self.mu * np.asarray(zeta, dtype=float)
        scale = self.mu ** ((self.params.n + 2.0 * g) / 2.0)
        return scale * self.C0 * t ** (-g) * kv(g, t)

    def U_hat(self, zeta, y):
        """Fourier transform in x of the extension, w^(z) phi(|z| y)."""
        prof = profile(self.params)
        zeta = np.asarray(zeta, dtype=float)
        return self.w_hat(zeta) * prof.phi(zeta * np.asarray(y, dtype=float))


# ----------------------------------------------------------------------------
# radial integrals of w^ (per unit C0^2)


def _radial(n, gamma, kind, tol):
    g = gamma
    a = 1.0 - 2.0 * g

    def w(r):
        return r ** (-g) * kv(g, r)

    def wp(r):
        return -(r ** (-g)) * kv(g + 1.0, r)

    table = {
        "P1": (lambda r: r ** (n - 2 - a) * wp(r) ** 2, n - 5 - 2 * g),
        "P2": (lambda r: r ** (n - 3 - a) * 2 * w(r) * wp(r), n - 5 - 2 * g),
        "P3": (lambda r: r ** (n - 4 - a) * w(r) ** 2, n - 5 - 2 * g),
        "Q1": (lambda r: r ** (n - 4 - a) * (w(r) + r * wp(r)) ** 2, n - 5 - 2 * g),
        "Q2": (lambda r: r ** (n - 5 - a) * 2 * r * w(r) * (w(r) + r * wp(r)), n - 5 - 2 * g),
        "Q3": (lambda r: r ** (n - 6 - a) * (r * w(r)) ** 2, n - 5 - 2 * g),
    }
    f, p = table[kind]
    return integrate_semi_infinite(IntegrandSpec(f, p, 2.0), tol=tol, floor=1e-300)


@lru_cache(maxsize=4096)
def _radial_cached(n, gamma, kind, tol):
    return _radial(n, gamma, kind, tol)


def radial_integral(params, kind, tol=DEFAULT_TOL):
    """One of P1, P2, P3, Q1, Q2, Q3 (without the C0^2 factor)."""
    if not params.above_4:
        raise DomainError(
            f"radial integral {kind} needs n > 4 + 2*gamma, got n={params.n:g}, "
            f"gamma={params.gamma:g}"
        )
    return _radial_cached(params.n, params.gamma, kind, float(tol)).value


def clear_cache():
    _radial_cached.cache_clear()


# ----------------------------------------------------------------------------
# J_p


def reduce_Jp(params, p, tol=DEFAULT_TOL, C0=None):
    """J_p = int y^{p+a} U^2 = A_{p+a} |S^{n-1}| C0^2 M_{n-3-p}."""
    g, n, a = params.gamma, params.n, params.a
    q = n - 3.0 - p
    if not q > 2.0 * g - 1.0:
        hint = " (finite only when n - 4 - 2*gamma > -1)" if p == 1 else ""
        raise DomainError(
            f"J_{p:g} diverges at n={n:g}, gamma={g:g}: requires n - 3 - p > 2*gamma - 1{hint}"
        )
    if not p + a > -1.0:
        raise DomainError(f"J_{p:g} diverges at the boundary y = 0: requires p + a > -1")
    c0 = bubble_C0(params) if C0 is None else C0
    A = moment("A", g, p + a, tol).value
    M = moment("M", g, q, tol).value
    return A * sphere_area(n) * c0 * c0 * M


def Jp_direct(params, p, mu=1.0, tol=DEFAULT_TOL):
    """J_p for the rescaled bubble w_mu, by direct radial quadrature of |w_mu^|^2."""
    g, n, a = params.gamma, params.n, params.a
    q = n - 3.0 - p
    if not q > 2.0 * g - 1.0:
        raise DomainError(f"J_{p:g} diverges at n={n:g}, gamma={g:g}")
    fam = BubbleFamily(params, mu=mu)

    def f(r):
        return r ** (n - 1.0 - (p + a + 1.0)) * fam.w_hat(r) ** 2

    spec = IntegrandSpec(f, q - 2.0 * g, 2.0 * mu)
    radial = integrate_semi_infinite(spec, tol=tol, floor=1e-300).value
    return moment("A", g, p + a, tol).value * sphere_area(n) * radial


def jp_scaling_exponent(params, p, mus=(1.0, 2.0, 4.0), tol=DEFAULT_TOL):
    """Least-squares slope of log J_p(U_mu) against log mu; equals p + 2."""
    vals = [Jp_direct(params, p, mu, tol) for mu in mus]
    slope, _ = np.polyfit(np.log(mus), np.log(vals), 1)
    return float(slope)


# ----------------------------------------------------------------------------
# closed forms


def closed_forms(params):
    """Closed-form ratios X/J_2 for the integrals (corrected where noted)."""
    n, a, g = params.n, params.a, params.gamma
    x = (n - 2) * (n - 5 + a) * (n - 3 - a) / (4 * (n - 3)) + g * (n - 4) + 2 * g * g
    i3 = (5 * n**3 - 10 * n**2 - (a * a - 2 * a + 25) * n - 2 * a * a + 4 * a + 30) / (
        20 * n * (n + 2) * (n - 3)
    )
    i5 = (3 + a) / (20 * n * (3 - a) * (n - 3)) * (
        5 * n**3 - 30 * n**2 - (a * a + 2 * a - 55) * n - 2 * a * a + 16 * a - 30
    )
    return {
        "I1": 3 * i3,
        "I2": i3,
        "I3": i3,
        "I4": (a + 3) * (5 - a) / 5,
        "I5": i5,
        "I6": (a + 5) * (a + 3) / 5,
        "I7": (3 * n**2 - 18 * n - (a * a - 2 * a - 27)) / (2 * (n - 3) * (3 - a) * (a + 1)),
        "H1": 3 * x / (n * (n + 2)),
        "H2": 3 * (n - a - 3) * (a + 3) / (2 * n * (n + 2)),
        "H3": 3 * (a + 5) * (a + 3) / (5 * n * (n + 2)),
    }


def printed_H_forms(params):
    """H-ratios with the alternative prefactors 2/(n(n+2)) for H1 and 1/(5n(n+2)) for H3.

    The factor 3/(n(n+2)) used by ``closed_forms`` is the one that follows
    from the angular average; only it reproduces I1 = H1 + H2 + H3 = 3 I3.
    """
    n, a, g = params.n, params.a, params.gamma
    x = (n - 2) * (n - 5 + a) * (n - 3 - a) / (4 * (n - 3)) + g * (n - 4) + 2 * g * g
    return {
        "H1": 2 * x / (n * (n + 2)),
        "H2": 3 * (n - a - 3) * (a + 3) / (2 * n * (n + 2)),
        "H3": (a + 5) * (a + 3) / (5 * n * (n + 2)),
    }


class IntegralRow(NamedTuple):
    numeric: float
    closed_form: float
    rel_err: float


@dataclass(frozen=True)
class ExtensionIntegrals:
    """Numeric integrals next to their closed forms for one (n, gamma)."""

    params: FractionalParams
    rows: Mapping = field(default_factory=dict)
    relations: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "rows", MappingProxyType(dict(self.rows)))
        object.__setattr__(self, "relations", MappingProxyType(dict(self.relations)))

    def __getitem__(self, name):
        return self.rows[name]

    def worst(self):
        name = max(self.rows, key=lambda k: self.rows[k].rel_err)
        return name, self.rows[name].rel_err

    def check(self, tol=1e-6):
        """Raise AccuracyError naming the worst row if any exceeds ``tol``."""
        name, err = self.worst()
        rel_name = max(self.relations, key=lambda k: self.relations[k]) if self.relations else None
        if err > tol:
            raise AccuracyError(f"{name} deviates from its closed form by {err:.3e}", best=err)
        if rel_name is not None and self.relations[rel_name] > tol:
            raise AccuracyError(
                f"relation {rel_name} violated by {self.relations[rel_name]:.3e}",
                best=self.relations[rel_name],
            )
        return True


def _require_above_4(params):
    if not params.above_4:
        raise DomainError(
            f"the extension integrals need n > 4 + 2*gamma, got n={params.n:g}, "
            f"gamma={params.gamma:g}"
        )


def _pieces(params, tol):
    g, a = params.gamma, params.a
    t = build_moments(
        g,
        [("A", a), ("A", a + 2), ("A", a + 4), ("B", a + 2), ("B", a + 4),
         ("C", a + 1), ("C", a + 3), ("D", a + 3), ("E", a + 4)],
        tol=tol,
    )
    c2 = bubble_C0(params) ** 2
    r = {k: c2 * radial_integral(params, k, tol) for k in ("P1", "P2", "P3", "Q1", "Q2", "Q3")}
    return t, r


def compute_H(params, tol=DEFAULT_TOL):
    """H1, H2, H3 from moment products, with closed and printed forms.

    Returns a dict name -> {numeric, closed_form, printed_form, rel_err,
    kprime_route} where ``kprime_route`` recomputes H1 through the K'-moment
    reduction.
    """
    _require_above_4(params)
    from .moments import kprime_moment

    n, a, g = params.n, params.a, params.gamma
    t, r = _pieces(params, tol)
    S = sphere_area(n)
    J2 = t.A(a + 2) * S * r["P3"]
    k = 3.0 * S / (n * (n + 2))
    numeric = {
        "H1": k * t.A(a + 2) * r["P1"],
        "H2": k * t.C(a + 3) * r["P2"],
        "H3": k * t.B(a + 4) * r["P3"],
    }
    cf = closed_forms(params)
    pf = printed_H_forms(params)
    kp = kprime_moment(g, n, tol)
    h1_kprime = k * bubble_C0(params) ** 2 * t.A(a + 2) * kp.reduced
    out = {}
    for name, val in numeric.items():
        closed = cf[name] * J2
        out[name] = {
            "numeric": val,
            "closed_form": closed,
            "printed_form": pf[name] * J2,
            "rel_err": abs(val - closed) / abs(closed),
        }
    out["H1"]["kprime_route"] = h1_kprime
    out["J2"] = J2
    return out


def compute_I(params, tol=DEFAULT_TOL):
    """All extension integrals through the Fourier reduction.

    The numeric values use only profile moments, radial integrals of w^ and
    exact angular averages; the closed forms are evaluated separately and
    compared.  ``relations`` holds the relative defects of I1 = 3 I2,
    I1 = 3 I3, I1 = H1 + H2 + H3, the cancellation inside I1, and the
    agreement of the two J_2 routes.
    """
    _require_above_4(params)
    n, a = params.n, params.a
    t, r = _pieces(params, tol)
    S = sphere_area(n)
    ang = angular_moments(round(n)) if float(n).is_integer() else None
    inv_n = float(ang["mean_xi2_over_zeta2"]) if ang else 1.0 / n
    c4 = float(ang["mean_xi4_over_zeta4"]) if ang else 3.0 / (n * (n + 2))
    c22 = float(ang["mean_xi2eta2_over_zeta4"]) if ang else 1.0 / (n * (n + 2))

    A2, A4 = t.A(a + 2), t.A(a + 4)
    C3, B4 = t.C(a + 3), t.B(a + 4)
    J2 = A2 * S * r["P3"]
    # y-integrated squares of U^, r U^ U^_r and r^2 U^_r^2 (times r^{n-1})
    T0 = A2 * r["P3"]
    T1 = 0.5 * A2 * r["P2"] + C3 * r["P3"]
    T2 = A2 * r["P1"] + C3 * r["P2"] + B4 * r["P3"]
    cancel = S * (T0 + 2.0 * inv_n * T1)
    I1 = cancel + S * c4 * T2
    I2 = S * c22 * T2
    I3 = S * c22 * T2
    I4 = A4 * S * r["P3"]
    I5 = S * inv_n * (t.B(a + 2) * r["Q1"] + t.D(a + 3) * r["Q2"] + t.E(a + 4) * r["Q3"])
    I6 = B4 * S * r["P3"]
    I7 = S * inv_n * (t.A(a) * r["P1"] + t.C(a + 1) * r["P2"] + t.B(a + 2) * r["P3"])
    H = {
        "H1": S * c4 * A2 * r["P1"],
        "H2": S * c4 * C3 * r["P2"],
        "H3": S * c4 * B4 * r["P3"],
    }
    numeric = {"I1": I1, "I2": I2, "I3": I3, "I4": I4, "I5": I5, "I6": I6, "I7": I7, **H}
    cf = closed_forms(params)
    rows = {}
    for name, val in numeric.items():
        closed = cf[name] * J2
        rows[name] = IntegralRow(val, closed, abs(val - closed) / abs(closed))
    J2_red = reduce_Jp(params, 2, tol)
    rows["J2"] = IntegralRow(J2, J2_red, abs(J2 - J2_red) / abs(J2_red))
    if params.above_3:
        J1 = Jp_direct(params, 1, 1.0, tol)
        J1_red = reduce_Jp(params, 1, tol)
        rows["J1"] = IntegralRow(J1, J1_red, abs(J1 - J1_red) / abs(J1_red))
    hsum = H["H1"] + H["H2"] + H["H3"]
    relations = {
        "I1=3I2": abs(I1 - 3 * I2) / abs(I1),
        "I1=3I3": abs(I1 - 3 * I3) / abs(I1),
        "I1=H1+H2+H3": abs(I1 - hsum) / abs(I1),
        "I1-cancellation": abs(cancel) / abs(I1),
    }
    return ExtensionIntegrals(params=params, rows=rows, relations=relations)


def theta_combination(params, tol=DEFAULT_TOL):
    """(4-n) I3 - I5 + (n-1+a) I7 and J2 from the numeric route."""
    ext = compute_I(params, tol)
    n, a = params.n, params.a
    lhs = (4 - n) * ext["I3"].numeric - ext["I5"].numeric + (n - 1 + a) * ext["I7"].numeric
    return lhs, ext["J2"].numeric


# ----------------------------------------------------------------------------
# Fourier transform of the bubble


class TransformReport(NamedTuple):
    zeta: tuple
    transform: tuple
    C0_fit: float
    C0_closed: float
    max_rel_dev: float
    ratio_dev: float


def hankel_transform_bubble(params, zeta, mu=1.0, tol=1e-11):
    """|z|^{1-n/2} int r^{n/2} J_{n/2-1}(|z| r) w_mu(r) dr for one |z| > 0."""
    n = params.n
    nu = n / 2.0 - 1.0
    m = (n - 2.0 * params.gamma) / 2.0
    z = float(zeta)

    def f(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        pos = r > 0
        rp = r[pos]
        out[pos] = rp ** (n / 2.0) * _bessel_j(nu, z * rp) * (mu / (rp * rp + mu * mu)) ** m
        return out

    zeros = bessel_j_zeros(nu, 400) / z
    head = max(8.0 * mu, zeros[0])
    est = integrate_oscillatory(f, zeros, head, tol=tol, n_segments=40)
    return z ** (1.0 - n / 2.0) * est.value


def default_zeta_grid(points=25):
    return tuple(float(v) for v in np.geomspace(0.1, 10.0, points))


def verify_bubble_transform(params, zeta_grid=None, tol=1e-11):
    """Compare the Hankel-quadrature transform with C0 |z|^{-g} K_g(|z|).

    C0 is fitted by least squares on the relative residuals (the mean of the
    pointwise ratios) and reported next to the closed-form constant.
    """
    if not params.n >= 3:
        raise DomainError("the bubble transform check needs n >= 3")
    grid = tuple(default_zeta_grid() if zeta_grid is None else zeta_grid)
    z = np.asarray(grid, dtype=float)
    if np.any(z < 0.1 - 1e-12) or np.any(z > 10.0 + 1e-12):
        raise DomainError("zeta grid must lie in [0.1, 10]")
    g = params.gamma
    ghat = np.array([hankel_transform_bubble(params, v, tol=tol) for v in z])
    model = z ** (-g) * kv(g, z)
    ratios = ghat / model
    c0 = float(np.mean(ratios))
    dev = float(np.max(np.abs(ratios / c0 - 1.0)))
    # C0-free check on consecutive ratios
    rdev = float(np.max(np.abs((ghat[1:] / ghat[:-1]) / (model[1:] / model[:-1]) - 1.0)))
    return TransformReport(grid, tuple(float(v) for v in ghat), c0, bubble_C0(params), dev, rdev)


# ----------------------------------------------------------------------------
# Poisson kernel


def poisson_constant(n, gamma):
    """Gamma((n+2g)/2) / (pi^{n/2} Gamma(g)), the mass-one normalization."""
    n, g = float(n), float(gamma)
    return gamma_fn((n + 2 * g) / 2) / (math.pi ** (n / 2) * gamma_fn(g))


def poisson_mass(n, gamma, constant=None, tol=1e-12):
    """int_{R^n} C y^{2g} / (|x|^2 + y^2)^{(n+2g)/2} dx by radial quadrature.

    With r = y tan(theta) and t = (pi/2 - theta)^{2g} the integrand becomes
    smooth on t in [0, (pi/2)^{2g}]; the result does not depend on y.
    """
    n, g = float(n), float(gamma)
    c = poisson_constant(n, g) if constant is None else constant
    inv = 1.0 / (2.0 * g)

    def f(t):
        p = t**inv
        return inv * (np.sinc(p / math.pi) ** (2 * g - 1)) * np.cos(p) ** (n - 1)

    est = integrate_finite(f, 0.0, (math.pi / 2) ** (2 * g), tol=tol)
    return c * sphere_area(n) * est.value
