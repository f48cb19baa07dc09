"""Solvability certificate from the mu^3 and mu^4 energy coefficients.

The test-function energy expands as Lambda(S^n) plus a mu^3 term driven by
Ric_{rho rho, rho} and, when that vanishes, a mu^4 term driven by the Weyl
norm.  A strictly negative lowest-order coefficient, together with the
hypotheses of the matching theorem, certifies the strict inequality that
gives existence of a minimizer.
"""

import math
from dataclasses import asdict, dataclass, field

import jsonschema

from .bubble import reduce_Jp
from .constants import theta
from .errors import ValidationError
from .params import FractionalParams

CERTIFIED = "strict-inequality-certified"
NOT_CERTIFIED = "not-certified"

CURVATURE_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "CurvatureData",
    "type": "object",
    "additionalProperties": False,
    "required": [
        "umbilic",
        "H",
        "F_trace_zero",
        "F_rho_derivative_zero",
        "F_third_derivative_zero",
        "ric_rho_rho_rho",
        "weyl_norm_sq",
    ],
    "properties": {
        "umbilic": {"type": "boolean"},
        "H": {"type": "number"},
        "F_trace_zero": {"type": "boolean"},
        "F_rho_derivative_zero": {"type": "boolean"},
        "F_third_derivative_zero": {"type": "boolean"},
        "ric_rho_rho_rho": {"type": "number"},
        "weyl_norm_sq": {"type": "number", "minimum": 0},
        "trace_h3": {"type": ["number", "null"]},
    },
}


@dataclass(frozen=True)
class CurvatureData:
    """Pointwise boundary data entering the energy expansion."""

    umbilic: bool
    mean_curvature_H: float
    F_trace_zero: bool
    F_rho_derivative_zero: bool
    F_third_derivative_zero: bool
    ric_rho_rho_rho: float
    weyl_norm_sq: float
    trace_h3: float = None

    def __post_init__(self):
        for name in ("mean_curvature_H", "ric_rho_rho_rho", "weyl_norm_sq"):
            if not math.isfinite(float(getattr(self, name))):
                raise ValidationError(f"{name} must be finite")
        if self.weyl_norm_sq < 0:
            raise ValidationError(f"weyl_norm_sq must be >= 0, got {self.weyl_norm_sq}")
        if self.trace_h3 is not None:
            expected = -3.0 * self.trace_h3
            scale = max(1.0, abs(self.ric_rho_rho_rho), abs(expected))
            if abs(self.ric_rho_rho_rho - expected) > 1e-10 * scale:
                raise ValidationError(
                    "inconsistent data: ric_rho_rho_rho must equal -3 * trace_h3 "
                    f"(got {self.ric_rho_rho_rho} vs {expected})"
                )

    @classmethod
    def from_dict(cls, data):
        """Build from the JSON object layout, validating against the schema."""
        validator = jsonschema.Draft7Validator(CURVATURE_SCHEMA)
        errors = sorted(validator.iter_errors(data), key=lambda e: list(e.path))
        if errors:
            msgs = []
            for err in errors:
                where = ".".join(str(p) for p in err.path) or "<root>"
                msgs.append(f"{where}: {err.message}")
            raise ValidationError("; ".join(msgs))
        return cls(
            umbilic=data["umbilic"],
            mean_curvature_H=float(data["H"]),
            F_trace_zero=data["F_trace_zero"],
            F_rho_derivative_zero=data["F_rho_derivative_zero"],
            F_third_derivative_zero=data["F_third_derivative_zero"],
            ric_rho_rho_rho=float(data["ric_rho_rho_rho"]),
            weyl_norm_sq=float(data["weyl_norm_sq"]),
            trace_h3=None if data.get("trace_h3") is None else float(data["trace_h3"]),
        )

    def to_dict(self):
        return {
            "umbilic": self.umbilic,
            "H": self.mean_curvature_H,
            "F_trace_zero": self.F_trace_zero,
            "F_rho_derivative_zero": self.F_rho_derivative_zero,
            "F_third_derivative_zero": self.F_third_derivative_zero,
            "ric_rho_rho_rho": self.ric_rho_rho_rho,
            "weyl_norm_sq": self.weyl_norm_sq,
            "trace_h3": self.trace_h3,
        }


@dataclass(frozen=True)
class SolvabilityCertificate:
    theorem_applied: str
    mu3_coefficient: float
    mu4_coefficient: float
    hypotheses_report: list = field(default_factory=list)
    verdict: str = NOT_CERTIFIED
    notes: list = field(default_factory=list)

    @property
    def certified(self):
        return self.verdict == CERTIFIED

    def to_dict(self):
        out = asdict(self)
        out["hypotheses_report"] = [
            {"name": name, "pass": ok} for name, ok in self.hypotheses_report
        ]
        return out


def _f_flags(c):
    return [
        ("umbilic", bool(c.umbilic)),
        ("F_trace_zero", bool(c.F_trace_zero)),
        ("F_rho_derivative_zero", bool(c.F_rho_derivative_zero)),
        ("F_third_derivative_zero", bool(c.F_third_derivative_zero)),
    ]


def certify(params, curvature):
    """Evaluate the mu^3 / mu^4 coefficients and decide the verdict.

    mu3 = (n-3)/4 * Ric_{rho rho, rho} * J_1
    mu4 = -theta(n, a) |W|^2 / (48 (n-1)) * J_2
    """
    if not isinstance(curvature, CurvatureData):
        raise ValidationError("curvature must be a CurvatureData instance")
    n, g, a = params.n, params.gamma, params.a
    notes = []
    j1 = reduce_Jp(params, 1) if params.above_3 else math.inf
    j2 = reduce_Jp(params, 2) if params.above_4 else math.inf
    ric = curvature.ric_rho_rho_rho
    weyl = curvature.weyl_norm_sq
    mu3 = (n - 3) / 4.0 * ric * j1 if ric != 0 else 0.0
    th = theta(n, a)
    mu4 = -th * weyl / (48.0 * (n - 1)) * j2 if weyl != 0 else 0.0

    flags = _f_flags(curvature)
    thm1 = flags + [
        ("n >= 5", n >= 5),
        ("n > 3 + 2*gamma (J_1 finite)", params.above_3),
    ]
    h3_zero = (
        curvature.trace_h3 == 0.0
        if curvature.trace_h3 is not None
        else ric == 0.0
    )
    thm2 = flags + [
        ("H = 0", curvature.mean_curvature_H == 0.0),
        ("h3 = 0", h3_zero),
        ("n > 5 + 2*gamma", params.above_5),
    ]
    if n < 6:
        notes.append(
            "n < 6: the mu^3 coefficient is finite because n > 3 + 2*gamma; "
            "J_1 finiteness is often stated only for n >= 6"
        )
    notes.append(f"theta(n, a) = {th!r}")

    if mu3 != 0.0:
        report = thm1
        theorem = "Theorem1"
        ok = mu3 < 0 and math.isfinite(mu3) and all(p for _, p in report)
    elif mu4 != 0.0:
        report = thm2
        theorem = "Theorem2"
        ok = mu4 < 0 and math.isfinite(mu4) and all(p for _, p in report)
    else:
        report = thm1 + [h for h in thm2 if h not in thm1]
        theorem = "none"
        ok = False
        notes.append("both coefficients vanish; no strict inequality follows")
    return SolvabilityCertificate(
        theorem_applied=theorem,
        mu3_coefficient=float(mu3),
        mu4_coefficient=float(mu4),
        hypotheses_report=list(report),
        verdict=CERTIFIED if ok else NOT_CERTIFIED,
        notes=notes,
    )


def canonical_cases():
    """The three reference inputs: Ricci-driven, Weyl-driven and flat."""
    base = dict(
        umbilic=True,
        mean_curvature_H=0.0,
        F_trace_zero=True,
        F_rho_derivative_zero=True,
        F_third_derivative_zero=True,
    )
    return [
        (FractionalParams(7, 0.3), CurvatureData(**base, ric_rho_rho_rho=-1.0, weyl_norm_sq=0.0)),
        (FractionalParams(8, 0.4), CurvatureData(**base, ric_rho_rho_rho=0.0, weyl_norm_sq=2.0)),
        (FractionalParams(8, 0.4), CurvatureData(**base, ric_rho_rho_rho=0.0, weyl_norm_sq=0.0)),
    ]
