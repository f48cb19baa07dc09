"""Numerical verification toolkit for the conformal fractional Laplacian and its curvature energy.

The subpackages are plain modules:

- ``special``: Gamma, modified Bessel K and I, Bessel J, the extension profile
- ``quadrature``: adaptive Gauss-Kronrod on finite and semi-infinite ranges
- ``moments``: moments of the profile and the identities between them
- ``bubble``: Fourier reduction of the extension integrals of the bubble
- ``constants``: sharp constants and the positivity of theta(n, a)
- ``certificate``: curvature input schema and the solvability verdict
- ``geometry``: normal-form identities on warped model metrics
- ``minimizer``: Sobolev quotient minimization over a radial basis
- ``cli``: the ``fyk`` command
"""

from .certificate import CurvatureData, SolvabilityCertificate, certify
from .constants import sharp_constants, theta
from .errors import (
    AccuracyError,
    DomainError,
    FykError,
    IllConditionedError,
    RangeError,
    StepSizeError,
    ValidationError,
)
from .minimizer import SobolevQuotientMinimizer, assemble, minimize
from .params import FractionalParams

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "CurvatureData",
    "DomainError",
    "FractionalParams",
    "FykError",
    "IllConditionedError",
    "RangeError",
    "SobolevQuotientMinimizer",
    "SolvabilityCertificate",
    "StepSizeError",
    "ValidationError",
    "__version__",
    "assemble",
    "certify",
    "minimize",
    "sharp_constants",
    "theta",
]
