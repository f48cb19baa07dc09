"""Adaptive Gauss-Kronrod quadrature on finite and semi-infinite ranges.

All panels of one refinement level are evaluated in a single vectorized
call, so integrands must accept and return numpy arrays.  Results are
deterministic: the panel order and the summation order depend only on the
inputs.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AccuracyError, DomainError

# 15-point Kronrod nodes/weights and embedded 7-point Gauss weights
# (QUADPACK qk15 constants).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5 from each end, and 0)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[13, 11, 9]] = _WG[:3]
_GW[7] = _WG[3]

_EPMACH = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny

DEFAULT_BUDGET = 2**14


@dataclass(frozen=True)
class QuadratureEstimate:
    """An integral value with its error estimate and panel count."""

    value: float
    abs_error_estimate: float
    intervals_used: int

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise AccuracyError("non-finite integral value", best=self.value)
        if self.abs_error_estimate < 0:
            raise ValueError("error estimate must be non-negative")


@dataclass(frozen=True)
class IntegrandSpec:
    """A semi-infinite integrand f(s) = s^p * bounded(s) * O(e^{-q s}).

    ``evaluator`` takes an array of s > 0 and returns f(s) itself (including
    the s^p factor); ``endpoint_exponent_at_zero`` is p and ``decay_rate`` q.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    endpoint_exponent_at_zero: float = 0.0
    decay_rate: float = 2.0

    def __post_init__(self):
        if not self.endpoint_exponent_at_zero > -1.0:
            raise DomainError(
                "endpoint exponent must exceed -1 for convergence at 0, got "
                f"{self.endpoint_exponent_at_zero}"
            )
        if not self.decay_rate > 0.0:
            raise DomainError(f"decay rate must be positive, got {self.decay_rate}")


def _gk15(f, lo, hi):
    """Apply the 15-point rule to every panel [lo_i, hi_i] at once."""
    centr = 0.5 * (lo + hi)
    hlgth = 0.5 * (hi - lo)
    x = centr[:, None] + hlgth[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    resk = fx @ _KW
    resg = fx @ _GW
    reskh = 0.5 * resk
    resabs = np.abs(fx) @ _KW
    resasc = np.abs(fx - reskh[:, None]) @ _KW
    dh = np.abs(hlgth)
    result = resk * hlgth
    resabs = resabs * dh
    resasc = resasc * dh
    err = np.abs((resk - resg) * hlgth)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPMACH * resabs
    err = np.where(resabs > _UFLOW / (50.0 * _EPMACH), np.maximum(floor, err), err)
    return result, err, resabs


def _adaptive(f, breakpoints, tol, floor, budget, absolute=False):
    """Globally adaptive bisection over the panels between ``breakpoints``.

    Returns (total, error, panels, per-segment values) where segments are the
    initial intervals between consecutive breakpoints.  With ``absolute`` the
    target is ``tol`` times the sum of panel magnitudes (used for oscillatory
    integrands whose sum may nearly cancel).
    """
    bp = np.asarray(breakpoints, dtype=float)
    lo, hi = bp[:-1].copy(), bp[1:].copy()
    seg = np.arange(lo.size)
    vals, errs, mags = _gk15(f, lo, hi)
    while True:
        total = math.fsum(vals)
        err = math.fsum(errs)
        scale = math.fsum(mags) if absolute else abs(total)
        target = max(tol * scale, floor)
        if not (math.isfinite(total) and math.isfinite(err)):
            raise AccuracyError("integrand produced non-finite values", best=total, error=err)
        if err <= target:
            break
        width = hi - lo
        splittable = width > 64.0 * _EPMACH * np.maximum(np.abs(lo), np.abs(hi))
        order = np.argsort(-np.where(splittable, errs, -1.0), kind="stable")
        excess = err - 0.5 * target
        pick = np.zeros(lo.size, dtype=bool)
        acc = 0.0
        for idx in order:
            if not splittable[idx] or acc >= excess:
                break
            pick[idx] = True
            acc += errs[idx]
        if not pick.any():
            raise AccuracyError(
                f"cannot refine further: error {err:.3e} exceeds target {target:.3e}",
                best=total,
                error=err,
            )
        if lo.size + int(pick.sum()) > budget:
            raise AccuracyError(
                f"panel budget {budget} exhausted with error {err:.3e} "
                f"(target {target:.3e})",
                best=total,
                error=err,
            )
        mid = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        new_seg = np.concatenate([seg[pick], seg[pick]])
        nv, ne, nm = _gk15(f, new_lo, new_hi)
        keep = ~pick
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        seg = np.concatenate([seg[keep], new_seg])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        mags = np.concatenate([mags[keep], nm])
        # keep panels sorted so that summation order is canonical
        srt = np.lexsort((lo, seg))
        lo, hi, seg = lo[srt], hi[srt], seg[srt]
        vals, errs, mags = vals[srt], errs[srt], mags[srt]
    per_segment = np.zeros(bp.size - 1)
    for k in range(per_segment.size):
        per_segment[k] = math.fsum(vals[seg == k])
    return total, err, lo.size, per_segment


def integrate_finite(f, lo, hi, tol=1e-10, floor=1e-14, budget=DEFAULT_BUDGET):
    """Integrate a vectorized ``f`` over the finite interval [lo, hi].

    >>> round(integrate_finite(lambda x: x**3, 0.0, 1.0).value, 14)
    0.25
    """
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    if not tol > 0:
        raise DomainError("tol must be positive")
    total, err, n, _ = _adaptive(f, [lo, hi], tol, floor, budget)
    return QuadratureEstimate(total, err, n)


def _mapped_integrand(spec):
    """Integrand on t in [0, 2]: t <= 1 covers s in (0, 1], t > 1 covers (1, inf)."""
    p = float(spec.endpoint_exponent_at_zero)
    q = float(spec.decay_rate)
    inv = 1.0 / (1.0 + p)
    f = spec.evaluator

    def g(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        # u = 0 and v = 0 map to s = 0 and s = inf; their contributions vanish
        head = (t > 0.0) & (t <= 1.0)
        if np.any(head):
            u = t[head]
            s = u**inv
            # ds = inv * u^(inv-1) du and s^p = u^(p*inv), so the Jacobian
            # combined with the s^p singularity is the bounded factor below
            with np.errstate(under="ignore"):
                out[head] = inv * np.asarray(f(s), dtype=float) * s ** (-p)
        tail = t > 1.0
        if np.any(tail):
            v = t[tail] - 1.0
            s = 1.0 - (2.0 / q) * np.log(v)
            out[tail] = np.asarray(f(s), dtype=float) * (2.0 / q) / v
        return out

    return g


def integrate_semi_infinite(spec, tol=1e-10, floor=1e-14, budget=DEFAULT_BUDGET):
    """Integrate ``spec`` over (0, inf).

    The head (0, 1] is mapped by s = u^{1/(1+p)}, which turns the s^p
    endpoint behavior into a bounded integrand; the tail [1, inf) is mapped
    by s = 1 - (2/q) ln v, which turns e^{-q s} decay into a factor v.

    >>> est = integrate_semi_infinite(IntegrandSpec(lambda s: s**2 * np.exp(-2*s), 2.0, 2.0))
    >>> round(est.value, 14)
    0.25
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    g = _mapped_integrand(spec)
    total, err, n, _ = _adaptive(g, [0.0, 1.0, 2.0], tol, floor, budget)
    return QuadratureEstimate(total, err, n)


def wynn_epsilon(partial_sums):
    """Wynn's epsilon extrapolation; returns (limit, error estimate)."""
    s = [float(v) for v in partial_sums]
    n = len(s)
    if n < 3:
        return s[-1], abs(s[-1] - s[-2]) if n > 1 else float("inf")
    prev = [0.0] * (n + 1)
    cur = list(s)
    best = s[-1]
    best_err = abs(s[-1] - s[-2])
    estimates = []
    col = 0
    while len(cur) > 1:
        nxt = []
        for i in range(len(cur) - 1):
            diff = cur[i + 1] - cur[i]
            if diff == 0.0:
                nxt.append(float("inf"))
            else:
                nxt.append(prev[i + 1] + 1.0 / diff)
        prev, cur = cur, nxt
        col += 1
        if col % 2 == 0 and cur and all(math.isfinite(v) for v in cur[-2:]):
            estimates.append(cur[-1])
    if len(estimates) >= 2:
        best = estimates[-1]
        best_err = abs(estimates[-1] - estimates[-2])
        # prefer the most stable diagonal entry
        for i in range(1, len(estimates)):
            e = abs(estimates[i] - estimates[i - 1])
            if e < best_err:
                best, best_err = estimates[i], e
    return best, best_err


def bessel_j_zeros(nu, count):
    """McMahon approximations to the first ``count`` positive zeros of J_nu."""
    m = np.arange(1, count + 1, dtype=float)
    beta = (m + 0.5 * nu - 0.25) * math.pi
    mu4 = 4.0 * nu * nu
    return beta - (mu4 - 1.0) / (8.0 * beta) - 4.0 * (mu4 - 1.0) * (7.0 * mu4 - 31.0) / (
        3.0 * (8.0 * beta) ** 3
    )


def integrate_oscillatory(f, zeros, head, tol=1e-10, n_segments=40, budget=DEFAULT_BUDGET):
    """Integrate f over (0, inf) for an integrand oscillating with given zeros.

    ``head`` is a point beyond the non-oscillatory hump of f.  The range
    [0, z_k] (z_k the first listed zero beyond ``head``) is integrated
    directly; the remaining integral is summed segment by segment between
    consecutive zeros and the partial sums are accelerated by Wynn's epsilon
    algorithm.  The number of segments is doubled until two extrapolations
    agree.
    """
    zeros = np.asarray(zeros, dtype=float)
    k0 = int(np.searchsorted(zeros, head))
    if k0 + 2 * n_segments + 1 > zeros.size:
        raise DomainError("not enough zeros supplied for the requested segments")
    start = zeros[k0]
    inner = np.concatenate([np.linspace(0.0, start, 9)])
    first, err0, used0, _ = _adaptive(f, inner, tol, 1e-300, budget, absolute=True)
    prev_limit = None
    total_used = used0
    for nseg in (n_segments, 2 * n_segments):
        bps = zeros[k0 : k0 + nseg + 1]
        _, err1, used1, segs = _adaptive(f, bps, tol * 1e-2, 1e-300, budget, absolute=True)
        total_used += used1
        partial = first + np.cumsum(segs)
        limit, lerr = wynn_epsilon(partial)
        if prev_limit is not None:
            diff = abs(limit - prev_limit)
            est = max(diff, lerr, err0 + err1)
            if diff <= max(tol * abs(limit), 1e-300) * 10:
                return QuadratureEstimate(limit, est, total_used)
            raise AccuracyError(
                f"oscillatory extrapolation unstable (change {diff:.3e})",
                best=limit,
                error=est,
            )
        prev_limit = limit
    raise AccuracyError("unreachable", best=prev_limit)
