"""Command-line entry point: ``fyk <command> [options]``.

Every command emits one document with the rows it checked::

    {"schema": "fyk/1", "command": ..., "config": {...}, "rows": [...], "summary": {...}}

``--format csv`` writes the same rows as a flat table.  Exit codes are
0 when every row passes, 1 for usage or input errors, 2 when a check fails
and 3 when a numerical method does not converge.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import bubble, constants, geometry, minimizer, moments
from .certificate import CurvatureData, certify
from .errors import (
    AccuracyError,
    DomainError,
    FykError,
    IllConditionedError,
    StepSizeError,
    ValidationError,
)
from .params import FractionalParams

SCHEMA = "fyk/1"
EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_NONCONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    """Bad command-line input; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ----------------------------------------------------------------------------
# helpers


def parse_grid(text):
    """``start:stop:step`` (inclusive stop) or a comma-separated list."""
    text = str(text).strip()
    if not text:
        raise UsageError("grid is empty")
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise UsageError(f"grid {text!r} must look like start:stop:step")
            start, stop, step = (float(p) for p in parts)
            if step <= 0:
                raise UsageError(f"grid step must be positive in {text!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [round(start + k * step, 12) for k in range(max(count, 0))]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}") from None
    if not values:
        raise UsageError(f"grid {text!r} is empty")
    return values


def _threads():
    raw = os.environ.get("FYK_THREADS", "")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise UsageError(f"FYK_THREADS must be an integer, got {raw!r}") from None
        if value < 1:
            raise UsageError("FYK_THREADS must be at least 1")
        return value
    return min(4, os.cpu_count() or 1)


def ordered_map(fn, items):
    """Apply ``fn`` in parallel (capped by FYK_THREADS) and keep input order."""
    items = list(items)
    workers = min(_threads(), max(len(items), 1))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _plain(value):
    """Convert numpy scalars and Fractions into JSON-ready values."""
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _row(**fields):
    return {k: _plain(v) for k, v in fields.items()}


def render(document, fmt):
    if fmt == "json":
        return json.dumps(document, indent=2, allow_nan=False) + "\n"
    rows = document["rows"]
    columns = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(row.get(k)) for k in columns})
    return buf.getvalue()


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return value


def _params(n, gamma):
    try:
        return FractionalParams(n, gamma)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


# ----------------------------------------------------------------------------
# commands; each returns (rows, summary)


def cmd_verify_identities(args):
    gammas = parse_grid(args.gamma_grid)
    n_values = parse_grid(args.n_grid)
    tol = args.tol

    def one(g):
        rows = []
        try:
            base, with_n = moments.verify_all_identities(g, n_values)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        for check in base:
            rows.append(_row(gamma=g, n=None, identity=check.name, lhs=check.lhs,
                             rhs=check.rhs, rel_err=check.rel_err, **{"pass": check.rel_err <= tol}))
        for n, check in with_n:
            rows.append(_row(gamma=g, n=n, identity=check.name, lhs=check.lhs,
                             rhs=check.rhs, rel_err=check.rel_err, **{"pass": check.rel_err <= tol}))
        if abs(g - 0.5) < 1e-12:
            a = 0.0
            for kind, p in (("A", a), ("A", a + 2), ("B", a + 2), ("C", a + 1), ("M", 1 - a)):
                num = moments.moment(kind, 0.5, p).value
                exact = moments.closed_form_half(kind, p)
                err = abs(num - exact) / abs(exact)
                rows.append(_row(gamma=g, n=None, identity=f"closed form {kind}_{p:g}",
                                 lhs=num, rhs=exact, rel_err=err, **{"pass": err <= tol}))
        if args.monte_carlo_samples:
            a = 1.0 - 2.0 * g
            mc = moments.moment_monte_carlo("A", g, a + 2, args.monte_carlo_samples, args.seed)
            q = moments.moment("A", g, a + 2).value
            err = abs(mc.value - q) / abs(q)
            rows.append(_row(gamma=g, n=None, identity="A_{a+2} monte carlo", lhs=mc.value,
                             rhs=q, rel_err=err, **{"pass": err <= args.monte_carlo_tol}))
        return rows

    rows = [r for chunk in ordered_map(one, gammas) for r in chunk]
    worst = max(rows, key=lambda r: r["rel_err"])
    return rows, {"max_rel_err": worst["rel_err"], "worst_identity": worst["identity"],
                  "worst_gamma": worst["gamma"]}


def cmd_integrals(args):
    cases = [(n, g) for n in parse_grid(args.n) for g in parse_grid(args.gamma)]
    tol = args.tol

    def one(case):
        n, g = case
        p = _params(n, g)
        if not p.above_4:
            return [_row(n=n, gamma=g, name="convergence", numeric=None, closed_form=None,
                         rel_err=None, message=f"needs n > 4 + 2*gamma = {4 + 2 * g:g}",
                         **{"pass": False})]
        ext = bubble.compute_I(p)
        out = []
        for name, r in ext.rows.items():
            out.append(_row(n=n, gamma=g, name=name, numeric=r.numeric, closed_form=r.closed_form,
                            rel_err=r.rel_err, message="", **{"pass": r.rel_err <= tol}))
        for name, err in ext.relations.items():
            out.append(_row(n=n, gamma=g, name=name, numeric=None, closed_form=None,
                            rel_err=err, message="", **{"pass": err <= tol}))
        lhs, j2 = bubble.theta_combination(p)
        th = constants.theta(n, p.a)
        err = abs(lhs - th * j2) / abs(th * j2)
        out.append(_row(n=n, gamma=g, name="theta identity", numeric=lhs, closed_form=th * j2,
                        rel_err=err, message="", **{"pass": err <= tol}))
        return out

    rows = [r for chunk in ordered_map(one, cases) for r in chunk]
    errs = [r["rel_err"] for r in rows if r["rel_err"] is not None]
    return rows, {"max_rel_err": max(errs) if errs else None, "cases": len(cases)}


def cmd_theta_scan(args):
    gammas = parse_grid(args.gamma_grid)
    if args.n_max <= args.n_min:
        raise UsageError("--n-max must exceed --n-min")

    def one(label_grid):
        label, grid = label_grid
        return label, constants.theta_positivity_scan(*grid, form=args.form)

    jobs = [("integer", constants.integer_scan_grid(args.n_min, args.n_max))]
    for g in gammas:
        if not 0 < g < 1:
            raise UsageError(f"gamma must lie in (0, 1), got {g}")
        jobs.append((f"real gamma={g:g}", constants.real_scan_grid(g, args.n_max, args.step)))
    rows = []
    for label, rep in ordered_map(one, jobs):
        rows.append(_row(scan=label, min_value=rep.min_value, argmin_n=rep.argmin[0],
                         argmin_a=rep.argmin[1], points=rep.count, all_positive=rep.all_positive,
                         **{"pass": rep.all_positive}))
    best = min(rows, key=lambda r: r["min_value"])
    return rows, {"all_positive": all(r["pass"] for r in rows), "min_value": best["min_value"],
                  "argmin": [best["argmin_n"], best["argmin_a"]], "form": args.form}


def cmd_constants(args):
    rows = []
    for n in parse_grid(args.n):
        for g in parse_grid(args.gamma):
            p = _params(n, g)
            sc = constants.sharp_constants(p)
            norm = constants.energy_normalization(g)
            err = abs(norm - 1.0)
            rows.append(_row(n=n, gamma=g, d_gamma=sc.d_gamma, d_star=sc.d_star,
                             S_n_gamma=sc.S_n_gamma, Lambda_sphere=sc.Lambda_sphere,
                             product=sc.Lambda_sphere * sc.S_n_gamma, energy_normalization=norm,
                             rel_err=err, **{"pass": err <= args.tol}))
    return rows, {"max_rel_err": max(r["rel_err"] for r in rows)}


def _parse_cases(text):
    cases = []
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            n, g = chunk.split(":")
            cases.append((float(n), float(g)))
        except ValueError:
            raise UsageError(f"case {chunk!r} must look like n:gamma") from None
    if not cases:
        raise UsageError("no cases given")
    return cases


def cmd_fourier_check(args):
    cases = _parse_cases(args.cases)

    def one(case):
        n, g = case
        p = _params(n, g)
        rep = bubble.verify_bubble_transform(p)
        c0_err = abs(rep.C0_fit - rep.C0_closed) / abs(rep.C0_closed)
        out = [
            _row(n=n, gamma=g, check="transform vs C0 |z|^-g K_g", value=rep.max_rel_dev,
                 reference=0.0, error=rep.max_rel_dev, **{"pass": rep.max_rel_dev <= args.tol}),
            _row(n=n, gamma=g, check="fitted C0 vs closed form", value=rep.C0_fit,
                 reference=rep.C0_closed, error=c0_err, **{"pass": c0_err <= args.tol}),
        ]
        if float(n).is_integer() and n >= 2:
            exact = bubble.angular_moments(int(n))
            mc = bubble.angular_moments_mc(int(n), args.mc_samples, args.seed)
            for key, val in exact.items():
                err = abs(mc[key] - float(val)) / float(val)
                out.append(_row(n=n, gamma=g, check=f"angular {key}", value=mc[key],
                                reference=float(val), error=err, **{"pass": err <= args.mc_tol}))
        return out

    rows = [r for chunk in ordered_map(one, cases) for r in chunk]
    return rows, {"max_transform_dev": max(r["error"] for r in rows if r["check"].startswith("transform"))}


def cmd_geometry_check(args):
    rows = []
    tol = args.tol

    def add(model_name, n, rep_rows, threshold, expect_violation=False):
        for r in rep_rows:
            ok = r.abs_err > threshold if expect_violation else r.abs_err <= threshold
            rows.append(_row(model=model_name, n=n, identity=r.name, lhs=r.lhs, rhs=r.rhs,
                             abs_err=r.abs_err, expect="violation" if expect_violation else "equality",
                             **{"pass": ok}))

    for n_f in parse_grid(args.n_grid):
        if not float(n_f).is_integer():
            raise UsageError("model dimensions must be integers")
        n = int(n_f)
        try:
            ball, flat = geometry.hyperbolic_ball(n), geometry.half_space(n)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        for name, model in (("hyperbolic-ball", ball), ("half-space", flat)):
            res = geometry.fg_residual(model)
            add(name, n, [geometry.ExpansionRow("FG residual", res, 0.0, res)], tol)
            add(name, n, geometry.verify_h2_formulas(model).rows, 0.0)
            add(name, n, geometry.verify_h4_trace(model)[0].rows, 0.0)
            add(name, n, geometry.verify_det_expansion(model).rows, 0.0)
            add(name, n, geometry.verify_ric_h3(model).rows, 0.0)
            add(name, n, geometry.conformal_trace_h3(model, 1.0).rows, tol)
        probe3 = geometry.perturbed(ball, 3, Fraction(1, 100))
        res = geometry.fg_residual(probe3)
        add("ball+0.01rho^3", n, [geometry.ExpansionRow("FG residual", res, 0.0, res)], 1e-4, True)
        probe4 = geometry.perturbed(ball, 4, Fraction(1, 1000))
        add("ball+0.001rho^4", n, geometry.verify_h4_trace(probe4)[0].rows, 1e-6, True)
        probe2 = geometry.perturbed(ball, 2, Fraction(1, 1000))
        add("ball+0.001rho^2", n, geometry.verify_h2_formulas(probe2).rows[1:], 1e-6, True)
        if n > 2 * args.gamma:
            p = _params(n, args.gamma)
            e = geometry.e_rho_expansion(ball, p)
            slope_err = abs(e.slope - p.a)
            coef_err = abs(e.leading_coefficient - e.predicted_coefficient) / abs(e.predicted_coefficient)
            add("hyperbolic-ball", n, [
                geometry.ExpansionRow(f"E(rho) slope (gamma={args.gamma:g})", e.slope, p.a, slope_err)
            ], 1e-3)
            add("hyperbolic-ball", n, [
                geometry.ExpansionRow(f"E(rho) leading coefficient (gamma={args.gamma:g})",
                                      e.leading_coefficient, e.predicted_coefficient, coef_err)
            ], 1e-6)
    return rows, {"checks": len(rows), "failures": sum(1 for r in rows if not r["pass"])}


def cmd_minimize(args):
    p = _params(args.n, args.gamma)
    b = minimizer.bubble_exponent(p)
    offsets = parse_grid(args.offsets)
    betas = [b] + [b + o for o in offsets if o != 0]
    est = minimizer.SobolevQuotientMinimizer(
        n=args.n, gamma=args.gamma, basis_exponents=betas, init=args.init,
        step_rule=args.step_rule, max_iter=args.max_iter, random_state=args.seed,
    )
    est.fit()
    prob = est.problem_
    q_bubble = prob.quotient(prob.unit(0))
    gap = abs(est.quotient_ - q_bubble) / q_bubble
    rng = np.random.default_rng(args.seed)
    c_test = rng.standard_normal(prob.size)
    g_norm = float(np.linalg.norm(prob.gradient(c_test)))
    g_dev = minimizer.gradient_check(prob, c_test)
    conv = minimizer.convention_check(prob)
    rows = [
        _row(check="Q* vs Q(bubble)", value=est.quotient_, reference=q_bubble, error=gap,
             tolerance=1e-6, **{"pass": gap <= 1e-6}),
        _row(check="off-bubble mass", value=est.off_bubble_mass_, reference=0.0,
             error=est.off_bubble_mass_, tolerance=1e-4, **{"pass": est.off_bubble_mass_ <= 1e-4}),
        _row(check="gradient vs finite differences", value=g_dev, reference=0.0, error=g_dev,
             tolerance=1e-6 * (1 + g_norm), **{"pass": g_dev <= 1e-6 * (1 + g_norm)}),
        _row(check="Q(bubble) vs extension energy", value=conv.extension_quotient,
             reference=conv.fourier_quotient, error=conv.rel_err_extension, tolerance=1e-6,
             **{"pass": conv.rel_err_extension <= 1e-6}),
        _row(check="Q(bubble) vs 1/S(n,gamma)", value=conv.inverse_sharp_constant,
             reference=conv.fourier_quotient, error=conv.rel_err_sharp, tolerance=1e-6,
             **{"pass": conv.rel_err_sharp <= 1e-6}),
        _row(check="monotone descent", value=float(np.max(np.diff(est.history_))) if len(est.history_) > 1 else 0.0,
             reference=0.0, error=0.0, tolerance=0.0,
             **{"pass": all(np.diff(est.history_) <= 0)}),
    ]
    summary = {"basis_exponents": list(prob.basis_exponents), "coefficients": list(est.coef_),
               "iterations": est.n_iter_, "gradient_norm": est.gradient_norm_,
               "quotient": est.quotient_}
    return rows, _plain(summary)


def cmd_certify(args):
    try:
        with open(args.input, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.input} is not valid JSON: {exc.msg} (line {exc.lineno})") from None
    try:
        curvature = CurvatureData.from_dict(data)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    p = _params(args.n, args.gamma)
    cert = certify(p, curvature)
    rows = [_row(hypothesis=name, **{"pass": ok}) for name, ok in cert.hypotheses_report]
    rows.append(_row(hypothesis="verdict: " + cert.verdict, **{"pass": cert.certified}))
    return rows, _plain(cert.to_dict())


COMMANDS = {
    "verify-identities": cmd_verify_identities,
    "integrals": cmd_integrals,
    "theta-scan": cmd_theta_scan,
    "constants": cmd_constants,
    "fourier-check": cmd_fourier_check,
    "geometry-check": cmd_geometry_check,
    "minimize": cmd_minimize,
    "certify": cmd_certify,
}

DEFAULT_TOL = {
    "verify-identities": 1e-8,
    "integrals": 1e-6,
    "theta-scan": 0.0,
    "constants": 1e-8,
    "fourier-check": 1e-5,
    "geometry-check": 1e-10,
    "minimize": 1e-6,
    "certify": 0.0,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", default=None, help="write here instead of stdout")
    common.add_argument("--tol", type=float, default=None, help="pass/fail tolerance")
    common.add_argument("--seed", type=int, default=0, help="seed for Monte-Carlo cross-checks")

    parser = _Parser(prog="fyk", description="Verification tables for the fyk toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-identities", parents=[common], help="moment identities")
    p.add_argument("--gamma-grid", default="0.1:0.9:0.1")
    p.add_argument("--n-grid", default="6,7,8,10,12")
    p.add_argument("--monte-carlo-samples", type=int, default=0)
    p.add_argument("--monte-carlo-tol", type=float, default=1e-4)

    p = sub.add_parser("integrals", parents=[common], help="extension integrals vs closed forms")
    p.add_argument("--n", default="8")
    p.add_argument("--gamma", default="0.25")

    p = sub.add_parser("theta-scan", parents=[common], help="positivity scan of theta(n, a)")
    p.add_argument("--n-min", type=int, default=6)
    p.add_argument("--n-max", type=int, default=30)
    p.add_argument("--gamma-grid", default="0.1:0.9:0.1")
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--form", choices=("corrected", "printed"), default="corrected")

    p = sub.add_parser("constants", parents=[common], help="sharp constants")
    p.add_argument("--n", default="4")
    p.add_argument("--gamma", default="0.5")

    p = sub.add_parser("fourier-check", parents=[common], help="bubble transform check")
    p.add_argument("--cases", default="3:0.5,5:0.3,7:0.7", help="comma list of n:gamma")
    p.add_argument("--mc-samples", type=int, default=200_000)
    p.add_argument("--mc-tol", type=float, default=1e-2)

    p = sub.add_parser("geometry-check", parents=[common], help="model-metric identities")
    p.add_argument("--n-grid", default="4:12:1")
    p.add_argument("--gamma", type=float, default=0.3)

    p = sub.add_parser("minimize", parents=[common], help="minimize the Sobolev quotient")
    p.add_argument("--n", type=float, default=5.0)
    p.add_argument("--gamma", type=float, default=0.3)
    p.add_argument("--offsets", default="1.5,2.5", help="perturber exponent offsets")
    p.add_argument("--init", choices=("perturber", "bubble", "random"), default="perturber")
    p.add_argument("--step-rule", choices=("newton", "bb"), default="newton")
    p.add_argument("--max-iter", type=int, default=200)

    p = sub.add_parser("certify", parents=[common], help="solvability certificate")
    p.add_argument("--input", required=True, help="curvature JSON file")
    p.add_argument("--n", type=float, default=7.0)
    p.add_argument("--gamma", type=float, default=0.3)
    return parser


def _config(args):
    skip = {"output"}
    return {k: _plain(v) for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None, stdout=None):
    """Run the CLI and return the exit code (no sys.exit)."""
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    if args.tol is None:
        args.tol = DEFAULT_TOL[args.command]
    if args.tol < 0 or (args.tol == 0 and args.command not in ("theta-scan", "certify")):
        print(f"fyk: error: --tol must be positive, got {args.tol}", file=sys.stderr)
        return EXIT_USAGE
    try:
        rows, summary = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fyk {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AccuracyError, StepSizeError, IllConditionedError) as exc:
        print(f"fyk {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (DomainError, FykError) as exc:
        print(f"fyk {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    passed = all(r.get("pass", True) for r in rows)
    document = {
        "schema": SCHEMA,
        "command": args.command,
        "config": _config(args),
        "rows": rows,
        "summary": {"passed": passed, "rows": len(rows), **summary},
    }
    text = render(_plain(document), args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if not passed:
        failed = [r for r in rows if not r.get("pass", True)]
        print(f"fyk {args.command}: {len(failed)} of {len(rows)} rows failed", file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAIL


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
