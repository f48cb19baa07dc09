"""Normal-form identities checked on warped-product model metrics.

A model is g+ = rho^{-2} (d rho^2 + f(rho)^2 h^) with h^ a unit round sphere
(Ric = (n-1) h^) or a flat torus (Ric = 0).  Because h_rho = f^2 h^ is a
scalar multiple of h^, every tensor identity reduces to an identity between
power series in rho, which is evaluated in exact rational arithmetic.

Coefficients follow h_rho = sum_k h^{(k)} rho^k, so h^{(k)} is the rho^k
coefficient of f^2 (times h^), not a derivative.
"""

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ValidationError

BOUNDARY_TYPES = ("round-sphere", "flat-torus")
SERIES_ORDER = 10


# ----------------------------------------------------------------------------
# truncated power series on lists of coefficients


def _trunc(a, order=SERIES_ORDER):
    a = list(a)[: order + 1]
    return a + [Fraction(0)] * (order + 1 - len(a))


def series_mul(a, b, order=SERIES_ORDER):
    a, b = _trunc(a, order), _trunc(b, order)
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j in range(order + 1 - i):
            out[i + j] += x * b[j]
    return out


def series_inv(a, order=SERIES_ORDER):
    a = _trunc(a, order)
    if a[0] == 0:
        raise DomainError("series with zero constant term is not invertible")
    out = [Fraction(0)] * (order + 1)
    out[0] = 1 / Fraction(a[0]) if isinstance(a[0], (int, Fraction)) else 1.0 / a[0]
    for k in range(1, order + 1):
        acc = sum(a[j] * out[k - j] for j in range(1, k + 1))
        out[k] = -acc * out[0]
    return out


def series_diff(a, order=SERIES_ORDER):
    a = _trunc(a, order)
    return _trunc([k * a[k] for k in range(1, len(a))], order)


def series_shift(a, k=1, order=SERIES_ORDER):
    """Multiply by rho^k."""
    return _trunc([Fraction(0)] * k + list(a), order)


def series_pow(a, p, order=SERIES_ORDER):
    out = _trunc([Fraction(1)], order)
    for _ in range(int(p)):
        out = series_mul(out, a, order)
    return out


def series_eval(a, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for c in reversed(list(a)):
        out = out * x + float(c)
    return out


# ----------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class ModelMetric:
    """Warped model over a space form; ``warp_series`` holds f_0..f_4."""

    boundary_type: str
    n: int
    warp_series: tuple
    boundary_scale: float = 1

    def __post_init__(self):
        if self.boundary_type not in BOUNDARY_TYPES:
            raise DomainError(
                f"unsupported boundary type {self.boundary_type!r}; use one of {BOUNDARY_TYPES}"
            )
        if int(self.n) != self.n or self.n < 3:
            raise DomainError(f"model dimension must be an integer >= 3, got {self.n}")
        ws = tuple(
            Fraction(c) if isinstance(c, (int, Fraction)) else c for c in self.warp_series
        )
        if len(ws) == 0 or ws[0] != 1:
            raise ValidationError("warp series must start with f_0 = 1")
        object.__setattr__(self, "warp_series", ws)

    @property
    def boundary_ricci_coefficient(self):
        """c with Ric[h^] = c h^ (Ricci is invariant under constant scaling)."""
        return self.n - 1 if self.boundary_type == "round-sphere" else 0

    @property
    def boundary_scalar_R(self):
        """R[h^] = n c / scale^2."""
        return self.n * self.boundary_ricci_coefficient / self.boundary_scale**2

    @property
    def exact(self):
        return all(isinstance(c, Fraction) for c in self.warp_series) and isinstance(
            self.boundary_scale, (int, Fraction)
        )

    def f(self):
        return _trunc(self.warp_series)

    def H(self):
        """Series of f^2, so that h_rho = H(rho) h^."""
        return series_mul(self.f(), self.f())


def hyperbolic_ball(n):
    """Hyperbolic space over the round sphere: f = 1 - rho^2/4."""
    return ModelMetric("round-sphere", n, (1, 0, Fraction(-1, 4), 0, 0))


def half_space(n):
    """Hyperbolic half-space over a flat torus: f = 1."""
    return ModelMetric("flat-torus", n, (1, 0, 0, 0, 0))


def perturbed(model, index, delta):
    """Copy of ``model`` with warp coefficient f_index shifted by ``delta``."""
    ws = list(model.warp_series) + [Fraction(0)] * 5
    d = Fraction(delta) if isinstance(delta, (int, Fraction)) else Fraction(str(delta))
    ws[index] = ws[index] + d
    return replace(model, warp_series=tuple(ws[: max(5, index + 1)]))


def h_coefficients(model, order=4):
    """Scalars h^{(0)}, ..., h^{(order)} with h^{(k)} = [f^2]_k h^."""
    return model.H()[: order + 1]


class ExpansionRow(NamedTuple):
    name: str
    lhs: object
    rhs: object
    abs_err: float


class ExpansionReport(NamedTuple):
    rows: list

    def max_abs_err(self):
        return max(r.abs_err for r in self.rows)

    def passed(self, tol=0.0):
        return all(r.abs_err <= tol for r in self.rows)


def _row(name, lhs, rhs):
    return ExpansionRow(name, lhs, rhs, float(abs(lhs - rhs)))


# ----------------------------------------------------------------------------
# Fefferman-Graham equation


def fg_residual_series(model, order=SERIES_ORDER):
    """Exact series of the FG left side divided by h^, with F = 0.

    rho h'' + (1-n) h' - (tr h') h - rho h^{kl} h'_{ik} h'_{jl}
        + rho/2 (tr h') h' - 2 rho Ric[h_rho]
    where for h = H h^ one has tr h' = n H'/H and h^{kl} h'_{ik} h'_{jl} = H'^2/H h^.
    """
    n = model.n
    H = model.H()
    Hp = series_diff(H, order)
    Hpp = series_diff(Hp, order)
    invH = series_inv(H, order)
    trace = [n * c for c in series_mul(Hp, invH, order)]
    terms = [
        series_shift(Hpp, 1, order),
        [(1 - n) * c for c in Hp],
        [-c for c in series_mul(trace, H, order)],
        [-c for c in series_shift(series_mul(series_mul(Hp, Hp, order), invH, order), 1, order)],
        [Fraction(1, 2) * c for c in series_shift(series_mul(trace, Hp, order), 1, order)],
        series_shift([-2 * model.boundary_ricci_coefficient], 1, order),
    ]
    return [sum(t[k] for t in terms) for k in range(order + 1)]


def fg_residual(model, rho_grid=None):
    """Max |FG residual| on a rho grid in (0, 0.5], evaluated in floating point."""
    rho = np.linspace(0.01, 0.5, 50) if rho_grid is None else np.asarray(rho_grid, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("rho grid must be positive")
    n = model.n
    c = model.boundary_ricci_coefficient
    f = series_eval(model.f(), rho)
    fp = series_eval(series_diff(model.f()), rho)
    fpp = series_eval(series_diff(series_diff(model.f())), rho)
    H = f * f
    Hp = 2 * f * fp
    Hpp = 2 * fp * fp + 2 * f * fpp
    trace = n * Hp / H
    res = (
        rho * Hpp
        + (1 - n) * Hp
        - trace * H
        - rho * Hp * Hp / H
        + 0.5 * rho * trace * Hp
        - 2 * rho * c
    )
    return float(np.max(np.abs(res)))


# ----------------------------------------------------------------------------
# trace identities


def _require_h1_zero(model):
    if model.warp_series[1] if len(model.warp_series) > 1 else 0:
        raise DomainError("identity requires h^{(1)} = 0 (mean curvature zero); f_1 must vanish")


def verify_h2_formulas(model):
    """tr h^{(2)} = R/(2(1-n)) and h^{(2)} = (R h^ + 2(1-n) Ric)/(2(n-2)(n-1))."""
    _require_h1_zero(model)
    n = model.n
    R = model.boundary_scalar_R
    c = model.boundary_ricci_coefficient
    h2 = model.H()[2]
    return ExpansionReport([
        _row("trace h2", n * h2, Fraction(R) / (2 * (1 - n)) if model.exact else R / (2 * (1 - n))),
        _row(
            "h2 coefficient",
            h2,
            (Fraction(R) + 2 * (1 - n) * c) / (2 * (n - 2) * (n - 1))
            if model.exact
            else (R + 2 * (1 - n) * c) / (2 * (n - 2) * (n - 1)),
        ),
    ])


def ricci_trace_rho_rho(model):
    """h^^{ij} d^2/drho^2 Ric_ij[h_rho] at rho = 0; zero for warped space forms."""
    return Fraction(0)


def scalar_curvature_rho_rho(model):
    """d^2/drho^2 of R[h_rho] = R[h^]/f^2 at rho = 0 (alternative reading)."""
    inv = series_inv(model.H())
    return Fraction(model.boundary_scalar_R) * 2 * inv[2] if model.exact else (
        model.boundary_scalar_R * 2 * float(inv[2])
    )


def verify_h4_trace(model):
    """tr h^{(4)} = (Ric_{,rho rho} trace - 2(n-2) |h^{(2)}|^2) / (8(2-n)).

    The curvature term is read as the h^-trace of the second rho-derivative
    of Ric[h_rho], which is what the trace of the differentiated FG equation
    produces.  The row ``scalar-curvature reading`` shows the same formula
    with R[h_rho]_{,rho rho} instead; it is informational and does not hold
    on the hyperbolic ball.
    """
    _require_h1_zero(model)
    n = model.n
    H = model.H()
    h2, h4 = H[2], H[4]
    norm2 = n * h2 * h2
    lhs = n * h4
    rhs = (ricci_trace_rho_rho(model) - 2 * (n - 2) * norm2) / (8 * (2 - n))
    alt = (scalar_curvature_rho_rho(model) - 2 * (n - 2) * norm2) / (8 * (2 - n))
    return ExpansionReport([_row("trace h4", lhs, rhs)]), _row(
        "scalar-curvature reading", lhs, alt
    )


def det_series(model, order=4):
    """Series of det h_rho / det h^ = f^{2n}."""
    return series_pow(model.H(), model.n)[: order + 1]


def verify_det_expansion(model):
    """Compare det h_rho with 1 + tr h2 rho^2 + tr h3 rho^3 + {...} rho^4."""
    _require_h1_zero(model)
    n = model.n
    H = model.H()
    tr2, tr3, tr4 = n * H[2], n * H[3], n * H[4]
    norm2 = n * H[2] * H[2]
    formula = [1, 0, tr2, tr3, tr4 + Fraction(1, 2) * tr2 * tr2 - Fraction(1, 2) * norm2]
    det = det_series(model)
    return ExpansionReport([_row(f"det rho^{k}", det[k], formula[k]) for k in range(5)])


def ric_rho_rho_rho(model):
    """Ric_{rho rho, rho} of the compactified metric at rho = 0: -n (f''/f)'(0)."""
    f = model.f()
    ratio = series_mul(series_diff(series_diff(f)), series_inv(f))
    return -model.n * series_diff(ratio)[0]


def trace_h3(model):
    return model.n * model.H()[3]


def verify_ric_h3(model):
    """Ric_{rho rho, rho} = -3 tr h^{(3)}."""
    return ExpansionReport([_row("Ric_rho_rho_rho", ric_rho_rho_rho(model), -3 * trace_h3(model))])


# ----------------------------------------------------------------------------
# E(rho)


class EExpansion(NamedTuple):
    rho: tuple
    values: tuple
    slope: float
    leading_coefficient: float
    predicted_coefficient: float


def e_rho_values(model, params, rho):
    """E(rho) = -((n-1+a)/4) rho^{a-1} d_rho det h_rho / det h_rho."""
    rho = np.asarray(rho, dtype=float)
    n, a = model.n, params.a
    f = series_eval(model.f(), rho)
    fp = series_eval(series_diff(model.f()), rho)
    logdet_prime = 2.0 * n * fp / f
    return -((n - 1 + a) / 4.0) * rho ** (a - 1) * logdet_prime


def e_rho_expansion(model, params, rho_grid=None):
    """Fit the leading power law of E(rho) on a small-rho grid.

    The prediction is E ~ -((n-1+a)/2) tr h^{(2)} rho^a.
    """
    _require_h1_zero(model)
    if float(params.n) != float(model.n):
        raise DomainError("model dimension and params.n differ")
    rho = np.geomspace(1e-4, 1e-2, 21) if rho_grid is None else np.asarray(rho_grid, dtype=float)
    vals = e_rho_values(model, params, rho)
    tr2 = float(model.n * model.H()[2])
    predicted = -((model.n - 1 + params.a) / 2.0) * tr2
    if np.all(vals == 0):
        return EExpansion(tuple(rho), tuple(vals), float("nan"), 0.0, predicted)
    slope, _ = np.polyfit(np.log(rho), np.log(np.abs(vals)), 1)
    lead = float(vals[0] / rho[0] ** params.a)
    return EExpansion(tuple(rho), tuple(float(v) for v in vals), float(slope), lead, predicted)


# ----------------------------------------------------------------------------
# conformal change of representative


def rescale(model, w0):
    """The same g+ in the normal form of h~ = e^{2 w0} h^ (w0 constant).

    With rho~ = e^{w0} rho one has f~_k = e^{-k w0} f_k.
    """
    if w0 == 0:
        return model
    lam = math.exp(w0)
    ws = tuple(float(c) * lam ** (-k) for k, c in enumerate(model.warp_series))
    ws = (1,) + ws[1:]
    return ModelMetric(model.boundary_type, model.n, ws, boundary_scale=model.boundary_scale * lam)


def conformal_trace_h3(model, w0):
    """Check tr_{h^} h^{(3)} = e^{3 w0} tr_{h~} h~^{(3)} for a constant rescaling."""
    other = rescale(model, w0)
    lhs = trace_h3(model)
    rhs = math.exp(3 * w0) * float(trace_h3(other)) if w0 != 0 else trace_h3(other)
    return ExpansionReport([_row("trace h3 (conformal)", lhs, rhs)])
