"""Command-line front end.

Subcommands: jacobi and classify for bracket structures, flow for
coefficient traces over a t grid, detect for the closure/grid fits,
verify for the named suites. Reports render as text, json, or csv and
are byte-deterministic for fixed inputs, flags, and seed.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from typing import Optional

import numpy as np

from .algfile import (
    AlgebraFileError,
    BUILTIN_NAMES,
    load_algebra_file,
    parse_rep_spec,
    resolve_algebra,
)
from .flow import heisenberg_oracle, matrix_exp, numeric_flow
from .poisson import (
    canonical_20_form,
    classify_canonical_30,
    curl_test_3,
    jacobi_defect,
    quasi_linear_decompose,
    NotQuasiLinear,
)
from .poly import ExprError, parse_scalar, scalar_to_text
from .report import FORMATS, Check, Report, Table
from .reps import DegenerateFitWarning, aw_grid_check, detect_closure, detect_dual_closure, fit_tridiagonal_constants, grid_verdict
from .suites import SUITE_NAMES, run_suite


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasilin",
        description="verification engine for quasi-linear bracket and operator algebras",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=FORMATS, default="text", help="report rendering")

    p = sub.add_parser("jacobi", help="check the Jacobi identity of a bracket file")
    p.add_argument("file", help="definition file with kind=poisson")
    common(p)

    p = sub.add_parser("classify", help="canonical case label and quasi-linearity verdicts")
    p.add_argument("file", help="definition file with kind=poisson, two or three variables")
    common(p)

    p = sub.add_parser("flow", help="evolved coefficient table over a t grid")
    p.add_argument("algebra", help="definition file or builtin name")
    p.add_argument("--t", default="0:1:11", help="time grid: a single value, v1,v2,..., or start:stop:count")
    p.add_argument("--hamiltonian", default=None, help="which generator drives the flow")
    p.add_argument("--rep", default=None, help="representation spec for the oracle column, like qosc:40:1/2")
    p.add_argument("--hval", default="1", help="scalar value of the Hamiltonian in the coefficient table")
    p.add_argument("--plot", default=None, metavar="DIR", help="also render coefficient figures into DIR")
    common(p)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("--suite", required=True, help=f"one of {', '.join(SUITE_NAMES + ('all',))}")
    p.add_argument("--tol", type=float, default=1e-10, help="default acceptance tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized property inputs")
    p.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="override a suite parameter (repeatable)",
    )
    common(p)

    p = sub.add_parser("detect", help="closure ansatz, tridiagonal constants, and grid fits")
    p.add_argument("algebra", nargs="?", default=None, help="definition file or builtin name")
    p.add_argument("--rep", default=None, help="representation spec, like krawtchouk:12:1/3")
    p.add_argument("--deg", default="2,1,2", help="degree bounds for (W1, W2, W0)")
    p.add_argument("--tol", type=float, default=1e-10, help="positive-detection threshold")
    p.add_argument("--plot", default=None, metavar="DIR", help="also render grid/residual figures into DIR")
    common(p)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    handler = {
        "jacobi": cmd_jacobi,
        "classify": cmd_classify,
        "flow": cmd_flow,
        "verify": cmd_verify,
        "detect": cmd_detect,
    }[ns.command]
    try:
        report = handler(ns)
    except (AlgebraFileError, ExprError, ValueError, ZeroDivisionError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(report.render(ns.format))
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# bracket commands


def _poisson_of(bundle):
    if bundle.poisson is None:
        raise ValueError(f"{bundle.name!r} has no bracket structure (need kind=poisson)")
    return bundle.poisson


def cmd_jacobi(ns) -> Report:
    S = _poisson_of(load_algebra_file(ns.file))
    report = Report(title=f"jacobi identity: {ns.file}")
    if S.nvars == 2:
        report.checks.append(
            Check("jacobi identity", True, note="vacuous for two variables")
        )
        return report
    for (i, k, j), defect in jacobi_defect(S).items():
        names = (S.names[i], S.names[k], S.names[j])
        report.checks.append(
            Check(
                f"jacobi triple ({', '.join(names)})",
                defect.is_zero(),
                note="" if defect.is_zero() else f"defect = {defect.to_text(S.names)}",
            )
        )
    if S.nvars == 3:
        curl = curl_test_3(S)
        report.checks.append(
            Check(
                "curl criterion (F, curl F) = 0",
                curl.is_zero(),
                note="" if curl.is_zero() else f"(F, curl F) = {curl.to_text(S.names)}",
            )
        )
    return report


def _quasi_linear_rows(S) -> list:
    rows = []
    for j in range(S.nvars):
        try:
            quasi_linear_decompose(S, j)
            rows.append((S.names[j], "yes", "every bracket is affine in the others"))
        except NotQuasiLinear as e:
            rows.append((S.names[j], "no", str(e)))
    return rows


def cmd_classify(ns) -> Report:
    S = _poisson_of(load_algebra_file(ns.file))
    if S.nvars not in (2, 3):
        raise ValueError("classification covers two or three variables")
    report = Report(title=f"classification: {ns.file}")
    if S.nvars == 2:
        form = canonical_20_form(S)
        if form is None:
            report.checks.append(
                Check("classification", False, note="bracket is not of the quadratic canonical shape")
            )
        else:
            alpha, b1, b2, gamma = form
            label = "(2,0): canonical q-oscillator bracket"
            if alpha.is_zero() or not (b1.is_zero() and b2.is_zero()) or gamma.is_zero():
                label = "(2,0): general affine-quadratic bracket"
            report.checks.append(Check("classification", True, note=label))
            report.tables.append(
                Table(
                    "canonical data",
                    ("coefficient", "value"),
                    (
                        ("alpha", scalar_to_text(alpha)),
                        ("beta_1", scalar_to_text(b1)),
                        ("beta_2", scalar_to_text(b2)),
                        ("gamma", scalar_to_text(gamma)),
                    ),
                )
            )
    else:
        form = classify_canonical_30(S)
        if form.case_label == "unclassified":
            reason = form.violation or ""
            if reason.startswith("Jacobi"):
                reason = "Jacobi fails"
            report.checks.append(
                Check("classification", False, note=f"unclassified ({reason})")
            )
        elif form.case_label == "lie_poisson":
            report.checks.append(Check("classification", True, note="lie-Poisson (linear bracket)"))
        else:
            report.checks.append(Check("classification", True, note=f"case ({form.case_label})"))
        if form.alphas is not None:
            rows = []
            for i in range(3):
                rows.append(
                    (
                        f"F_{i + 1}",
                        scalar_to_text(form.alphas[i]),
                        ", ".join(scalar_to_text(c) for c in form.betas[i]),
                        scalar_to_text(form.gammas[i]),
                    )
                )
            report.tables.append(
                Table("canonical data", ("component", "alpha", "beta row", "gamma"), tuple(rows))
            )
    report.tables.append(
        Table(
            "quasi-linearity by Hamiltonian",
            ("hamiltonian", "quasi-linear", "detail"),
            tuple(_quasi_linear_rows(S)),
        )
    )
    return report


# ---------------------------------------------------------------------------
# flow traces


def _parse_tgrid(text: str) -> list:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("t grid ranges look like start:stop:count")
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
        if count < 1:
            raise ValueError("t grid needs at least one point")
        if count == 1:
            return [start]
        return [float(v) for v in np.linspace(start, stop, count)]
    return [float(v) for v in text.split(",") if v.strip() != ""]


def cmd_flow(ns) -> Report:
    bundle = resolve_algebra(ns.algebra)
    action = bundle.adaction_for(ns.hamiltonian)
    ts = _parse_tgrid(ns.t)
    if not ts:
        raise ValueError("t grid is empty")
    hscalar = parse_scalar(ns.hval)
    hval = complex(hscalar)

    rep = None
    verified = None
    if ns.rep is not None:
        rep, verified = parse_rep_spec(ns.rep)
    elif bundle.rep is not None:
        rep, verified = bundle.rep, bundle.verified_cols

    B = action.dim
    Fh = np.zeros((B, B), dtype=complex)
    for i in range(B):
        for j in range(B):
            Fh[i, j] = complex(action.F[i][j].eval_scalar(hval))

    ops = None
    Hmat = None
    if rep is not None:
        ops = bundle.operator_matrices(action, rep)
        Hmat = ops[action.hamiltonian]

    targets = [n for n in action.basis if n != "1"]
    rows = []
    traces = {name: {} for name in targets}
    for t in ts:
        E = matrix_exp(Fh, t)
        devs = {}
        if rep is not None:
            evolved = numeric_flow(
                action, Hmat, {n: ops[n] for n in action.operator_names()}, t
            )
            for name in targets:
                want = heisenberg_oracle(Hmat, ops[name], t)
                diff = np.abs(evolved[name] - want)
                if verified is not None:
                    diff = diff[:, :verified]
                devs[name] = float(np.max(diff))
        for i, name in enumerate(action.basis):
            if name == "1":
                continue
            for j, comp in enumerate(action.basis):
                v = E[i, j]
                rows.append(
                    (
                        float(t),
                        name,
                        comp,
                        float(v.real),
                        float(v.imag),
                        devs.get(name, "") if rep is not None else "",
                    )
                )
                traces[name].setdefault(comp, []).append(v)

    report = Report(title=f"flow: {bundle.name}, Hamiltonian {action.hamiltonian}")
    report.tables.append(
        Table(
            f"coefficients of the evolved operators at H = {scalar_to_text(hscalar)}",
            ("t", "target", "component", "value_re", "value_im", "oracle_dev"),
            tuple(rows),
        )
    )
    if rep is not None:
        block = "all columns" if verified is None else f"columns 0..{verified - 1}"
        report.notes.append(
            f"oracle_dev: max-abs deviation of the assembled operator from direct conjugation, {block}"
        )
    else:
        report.notes.append("oracle_dev: empty (no representation supplied; pass --rep)")
    if ns.plot:
        from .plots import save_flow_figures

        for path in save_flow_figures(ts, traces, ns.plot):
            report.notes.append(f"figure: {path}")
    return report


# ---------------------------------------------------------------------------
# verify


def cmd_verify(ns) -> Report:
    params = {}
    for item in ns.param:
        if "=" not in item:
            raise ValueError(f"--param entries look like name=value, got {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        if not key.isidentifier():
            raise ValueError(f"bad parameter name {key!r}")
        params[key] = parse_scalar(raw.strip())
    return run_suite(ns.suite, tol=ns.tol, seed=ns.seed, params=params)


# ---------------------------------------------------------------------------
# detect


def _fit_pair(rep):
    ops = rep.ops
    for h, x in (("H", "X"), ("A0", "A1"), ("Y", "X")):
        if h in ops and x in ops:
            return ops[h], ops[x], h, x
    names = ", ".join(sorted(ops))
    raise ValueError(f"no recognized operator pair among [{names}]; need H/X, A0/A1, or Y/X")


def _coeff_text(coeffs) -> str:
    if not coeffs:
        return "0"
    parts = []
    for k, c in enumerate(coeffs):
        c = complex(c)
        if c.imag == 0.0:
            parts.append(f"{c.real!r} * H^{k}")
        else:
            sign = "+" if c.imag >= 0 else "-"
            parts.append(f"({c.real!r} {sign} {abs(c.imag)!r}i) * H^{k}")
    return " + ".join(parts)


def cmd_detect(ns) -> Report:
    if (ns.algebra is None) == (ns.rep is None):
        raise ValueError("give exactly one of a definition file/builtin or --rep")
    if ns.rep is not None:
        rep, _ = parse_rep_spec(ns.rep)
        source = ns.rep
    else:
        bundle = resolve_algebra(ns.algebra)
        if bundle.rep is None:
            raise ValueError(f"{bundle.name!r} carries no operators; detect needs a representation")
        rep = bundle.rep
        source = bundle.name
    try:
        bounds = tuple(int(v) for v in ns.deg.split(","))
    except ValueError:
        raise ValueError("--deg looks like three comma-separated integers, like 2,1,2")
    if len(bounds) != 3 or any(b < 0 for b in bounds):
        raise ValueError("--deg looks like three comma-separated integers, like 2,1,2")

    H, X, hname, xname = _fit_pair(rep)
    report = Report(title=f"closure detection: {source}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateFitWarning)
        fit = detect_closure(H, X, bounds)
        dual = detect_dual_closure(H, X, bounds)
        constants, fit_res = fit_tridiagonal_constants(H, X)
    degenerate = any(issubclass(w.category, DegenerateFitWarning) for w in caught)

    verdict = "positive" if fit.residual < ns.tol else "negative"
    if fit.rank_deficient:
        verdict += " (rank-deficient basis, minimum-norm fit)"
    report.checks.append(
        Check(
            "closure ansatz fits",
            fit.residual < ns.tol,
            residual=fit.residual,
            tol=ns.tol,
            note=f"verdict {verdict}",
        )
    )
    report.checks.append(
        Check(
            "dual closure fits",
            dual.residual < ns.tol,
            residual=dual.residual,
            tol=ns.tol,
        )
    )
    report.checks.append(
        Check(
            "tridiagonal relations fit",
            fit_res < max(ns.tol, 1e-9),
            residual=fit_res,
            tol=max(ns.tol, 1e-9),
            note="gauge-fixed family" if degenerate else "",
        )
    )

    report.tables.append(
        Table(
            f"closure coefficients, ad_{hname}^2 {xname} ansatz",
            ("polynomial", "coefficients (constant first)"),
            (
                ("W1", _coeff_text(fit.W1)),
                ("W2", _coeff_text(fit.W2)),
                ("W0", _coeff_text(fit.W0)),
                ("V1 (dual)", _coeff_text(dual.W1)),
                ("V2 (dual)", _coeff_text(dual.W2)),
                ("V0 (dual)", _coeff_text(dual.W0)),
            ),
        )
    )
    beta, gamma, gamma1, alpha, alpha1 = (complex(v) for v in constants.as_tuple())
    report.tables.append(
        Table(
            "tridiagonal constants",
            ("constant", "value"),
            (
                ("beta", beta),
                ("gamma", gamma),
                ("gamma1", gamma1),
                ("alpha", alpha),
                ("alpha1", alpha1),
            ),
        )
    )

    xs = None
    diag = np.diagonal(X)
    if np.count_nonzero(X - np.diag(diag)) == 0:
        if len(diag) >= 5:
            xs = [complex(v) for v in diag]
            eta, zeta, gres = aw_grid_check(xs)
            label, qv = grid_verdict(eta, zeta)
            if label == "linear":
                text = "linear (degenerate AW)"
            elif label == "quadratic":
                text = "quadratic (degenerate AW)"
            else:
                qc = complex(qv)
                qtext = repr(qc.real) if qc.imag == 0.0 else repr(qc)
                text = f"q-quadratic (q = {qtext})"
            report.checks.append(
                Check(
                    "grid recurrence certified",
                    gres <= ns.tol,
                    residual=gres,
                    tol=ns.tol,
                    note=f"grid verdict: {text}",
                )
            )
        else:
            report.notes.append("grid check skipped: need at least five grid points")
    else:
        report.notes.append(f"grid check skipped: {xname} is not diagonal")

    if ns.plot:
        from .plots import save_grid_figure, save_residual_figure

        if xs is not None:
            report.notes.append(f"figure: {save_grid_figure(xs, ns.plot)}")
        names = [c.name for c in report.checks]
        residuals = [c.residual or 0.0 for c in report.checks]
        report.notes.append(f"figure: {save_residual_figure(names, residuals, ns.plot)}")
    return report


if __name__ == "__main__":
    sys.exit(main())
