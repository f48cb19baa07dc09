"""Sharp constants and the rational function theta(n, a) with its scans."""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .moments import DEFAULT_TOL, extension_energy
from .params import FractionalParams
from .special import gamma_fn


@dataclass(frozen=True)
class SharpConstants:
    """d_gamma, d*_gamma, the sharp Sobolev constant S(n, gamma) and 1/S."""

    n: float
    gamma: float
    d_gamma: float
    d_star: float
    S_n_gamma: float
    Lambda_sphere: float

    def as_dict(self):
        return {
            "d_gamma": self.d_gamma,
            "d_star": self.d_star,
            "S_n_gamma": self.S_n_gamma,
            "Lambda_sphere": self.Lambda_sphere,
        }


def sphere_volume(n):
    """Volume of the unit n-sphere S^n in R^{n+1}."""
    n = float(n)
    return 2.0 * math.pi ** ((n + 1) / 2.0) / gamma_fn((n + 1) / 2.0)


def d_gamma(gamma):
    """2^{2g} Gamma(g) / Gamma(-g); negative on (0, 1)."""
    g = float(gamma)
    return 2.0 ** (2 * g) * gamma_fn(g) / gamma_fn(-g)


def d_star(gamma):
    """2^{2g-1} Gamma(g) / (g Gamma(-g)); negative on (0, 1)."""
    g = float(gamma)
    return 2.0 ** (2 * g - 1) * gamma_fn(g) / (g * gamma_fn(-g))


def sharp_constants(params):
    """All four constants for ``params``.

    >>> round(sharp_constants(FractionalParams(4, 0.5)).d_star, 12)
    -1.0
    """
    n, g = params.n, params.gamma
    S = gamma_fn((n - 2 * g) / 2) / gamma_fn((n + 2 * g) / 2) * sphere_volume(n) ** (-2 * g / n)
    return SharpConstants(
        n=n, gamma=g, d_gamma=d_gamma(g), d_star=d_star(g), S_n_gamma=S, Lambda_sphere=1.0 / S
    )


def energy_normalization(gamma, tol=DEFAULT_TOL):
    """|d*_gamma| int s^a (phi^2 + phi'^2) ds, which equals 1."""
    return abs(d_star(gamma)) * extension_energy(gamma, tol)


# ----------------------------------------------------------------------------
# theta(n, a)


def theta_numerator_coefficients(a, form="corrected"):
    """Coefficients in n (highest power first) of the numerator of theta.

    ``form="printed"`` keeps the constant term (a+1)(6a^3 - 30a^2 - 114a + 270)
    from the alternative constant term; ``"corrected"`` uses -54a, the value for
    which theta J_2 equals (4-n) I3 - I5 + (n-1+a) I7 identically.
    """
    a = float(a)
    lin = {"corrected": -54.0, "printed": -114.0}[form]
    return [
        15.0,
        -90.0,
        -10 * a * a + 20 * a + 90,
        20 * a * a - 40 * a + 300,
        3 * a**4 - 12 * a**3 + 38 * a * a - 52 * a - 585,
        (a + 1) * (6 * a**3 - 30 * a * a + lin * a + 270),
    ]


def _theta_checked(n, a):
    n, a = np.asarray(n, dtype=float), np.asarray(a, dtype=float)
    if np.any(np.isin(n, (0.0, -2.0, 3.0))):
        raise DomainError("theta has a pole at n in {0, -2, 3}")
    if np.any(np.isin(a, (3.0, -1.0))):
        raise DomainError("theta has a pole at a in {3, -1}")
    return n, a


def _theta(n, a, lin):
    n, a = _theta_checked(n, a)
    num = (
        15 * n**5
        - 90 * n**4
        + (-10 * a * a + 20 * a + 90) * n**3
        + (20 * a * a - 40 * a + 300) * n**2
        + (3 * a**4 - 12 * a**3 + 38 * a * a - 52 * a - 585) * n
        + (a + 1) * (6 * a**3 - 30 * a * a + lin * a + 270)
    )
    den = 10 * n * (n + 2) * (n - 3) * (3 - a) * (a + 1)
    out = num / den
    return float(out) if out.ndim == 0 else out


def theta(n, a):
    """theta(n, a) with the corrected constant term (see the numerator helper)."""
    return _theta(n, a, -54.0)


def theta_printed(n, a):
    """theta(n, a) with the alternative -114a constant-term entry."""
    return _theta(n, a, -114.0)


def theta_from_closed_forms(n, a):
    """(4-n) I3 - I5 + (n-1+a) I7 in units of J_2, from the I closed forms."""
    n, a = float(n), float(a)
    i3 = (5 * n**3 - 10 * n**2 - (a * a - 2 * a + 25) * n - 2 * a * a + 4 * a + 30) / (
        20 * n * (n + 2) * (n - 3)
    )
    i5 = (3 + a) / (20 * n * (3 - a) * (n - 3)) * (
        5 * n**3 - 30 * n**2 - (a * a + 2 * a - 55) * n - 2 * a * a + 16 * a - 30
    )
    i7 = (3 * n**2 - 18 * n - (a * a - 2 * a - 27)) / (2 * (n - 3) * (3 - a) * (a + 1))
    return (4 - n) * i3 - i5 + (n - 1 + a) * i7


class ScanReport(NamedTuple):
    """Minimum of theta over a grid and whether it stays positive."""

    min_value: float
    argmin: tuple
    all_positive: bool
    count: int


def theta_positivity_scan(n_values, a_values, form="corrected"):
    """Evaluate theta on the product grid n_values x a_values."""
    n = np.asarray(list(n_values), dtype=float)
    a = np.asarray(list(a_values), dtype=float)
    if n.size == 0 or a.size == 0:
        raise DomainError("scan grid must be non-empty")
    nn, aa = np.meshgrid(n, a, indexing="ij")
    fn = theta if form == "corrected" else theta_printed
    vals = np.asarray(fn(nn, aa))
    idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
    return ScanReport(
        min_value=float(vals[idx]),
        argmin=(float(nn[idx]), float(aa[idx])),
        all_positive=bool(np.all(vals > 0)),
        count=int(vals.size),
    )


def integer_scan_grid(n_min=6, n_max=30):
    """Integer n in [n_min, n_max] and a in {-0.99, -0.98, ..., 0.99}."""
    n_values = np.arange(int(n_min), int(n_max) + 1, dtype=float)
    a_values = np.round(np.arange(-99, 100) / 100.0, 2)
    return n_values, a_values


def real_scan_grid(gamma, n_max=30.0, step=0.05):
    """n = 5 + 2 gamma + k step for k >= 1 up to n_max, with a = 1 - 2 gamma."""
    g = float(gamma)
    start = 5.0 + 2.0 * g
    k = np.arange(1, int(math.floor((n_max - start) / step + 1e-9)) + 1)
    return np.round(start + k * step, 10), np.array([round(1.0 - 2.0 * g, 12)])


def standard_scans(n_min=6, n_max=30, gammas=None, step=0.05, form="corrected"):
    """The integer scan plus one real-n scan per gamma; returns a list of (label, report)."""
    if gammas is None:
        gammas = [round(0.1 * k, 1) for k in range(1, 10)]
    out = [("integer", theta_positivity_scan(*integer_scan_grid(n_min, n_max), form=form))]
    for g in gammas:
        n_values, a_values = real_scan_grid(g, n_max, step)
        out.append((f"real gamma={g:g}", theta_positivity_scan(n_values, a_values, form=form)))
    return out


def theta_sign_probe():
    """A point below the dimension threshold where theta is negative."""
    return (2.0, 0.0), theta(2.0, 0.0)

