"""The (n, gamma) parameter bundle used by every computation."""

from dataclasses import dataclass, field

from .errors import DomainError


@dataclass(frozen=True)
class FractionalParams:
    """Dimension ``n`` and fractional order ``gamma`` with derived exponents.

    ``n`` may be real so that parameter scans can sweep it continuously.
    """

    n: float
    gamma: float
    a: float = field(init=False)
    s: float = field(init=False)
    two_star: float = field(init=False)

    def __post_init__(self):
        n, g = float(self.n), float(self.gamma)
        if not 0.0 < g < 1.0:
            raise DomainError(f"gamma must lie in (0, 1), got {g}")
        if not n >= 2.0:
            raise DomainError(f"n must be at least 2, got {n}")
        if not n > 2.0 * g:
            raise DomainError(f"need n > 2*gamma, got n={n}, gamma={g}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "a", 1.0 - 2.0 * g)
        object.__setattr__(self, "s", n / 2.0 + g)
        object.__setattr__(self, "two_star", 2.0 * n / (n - 2.0 * g))

    @property
    def above_4(self):
        """True when n > 4 + 2*gamma (the I-integrals converge)."""
        return self.n > 4.0 + 2.0 * self.gamma

    @property
    def above_5(self):
        """True when n > 5 + 2*gamma (the Weyl-term regime)."""
        return self.n > 5.0 + 2.0 * self.gamma

    @property
    def above_3(self):
        """True when n > 3 + 2*gamma (J_1 is finite)."""
        return self.n > 3.0 + 2.0 * self.gamma


def as_params(params_or_gamma, n=None):
    """Accept either a FractionalParams or a bare gamma (with optional n)."""
    if isinstance(params_or_gamma, FractionalParams):
        return params_or_gamma
    return FractionalParams(n if n is not None else 8.0, params_or_gamma)
