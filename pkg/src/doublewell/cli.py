"""Command-line interface.

Subcommands: solve (full pipeline), classify (classification-focused view),
perturb (zero-tilt path following), sweep (root table over tilt
magnitudes), verify (independent oracle checks), reduce (general
linear-operator instance).  Structured output goes to stdout as a
deterministic JSON document; sweep output is also available as CSV.

Exit codes: 0 success, 1 invalid input, 2 wrong mode (zero vs nonzero
tilt), 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .oracle import (
    DEFAULT_SEED,
    finite_difference_check,
    grid_minimize,
    sample_saddle_directions,
)
from .perturbation import DEFAULT_K_MAX, DEFAULT_TOL, perturb_solve
from .plotdata import write_perturb_plot_data, write_solve_plot_data
from .problem import (
    ProblemSpec,
    RegimeTag,
    dual_hessian,
    dual_value,
    primal_hessian,
    primal_value,
)
from .reduction import (
    GeneralProblemSpec,
    NotInRangeError,
    general_gradient,
    lift_solution,
    reduce_problem,
)
from .report import (
    SweepRow,
    SweepTable,
    build_solve_report,
    dumps_canonical,
    sweep_to_csv,
)
from .solver import Classification, cubic_residual, solve_dual
from .triality import analyze, hessian_inertia

__all__ = ["main"]


class _UsageError(Exception):
    """Invalid input; mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; 2 is reserved for wrong-mode here
    def error(self, message):
        raise _UsageError(message)


def _parse_vector(text: str, flag: str) -> np.ndarray:
    try:
        values = [float(token) for token in text.split(",")]
    except ValueError:
        raise _UsageError(f"{flag} must be a comma-separated list of numbers") from None
    if not values:
        raise _UsageError(f"{flag} must not be empty")
    return np.array(values)


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read config file: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _UsageError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise _UsageError("config file must hold a JSON object")
    unknown = set(data) - {"alpha", "lambda", "f", "B"}
    if unknown:
        raise _UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in ("alpha", "lambda", "f"):
        if key not in data:
            raise _UsageError(f"config file is missing the '{key}' key")
    if not isinstance(data["f"], list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in data["f"]
    ):
        raise _UsageError("config key 'f' must be a list of numbers")
    if "B" in data:
        b = data["B"]
        if (
            not isinstance(b, dict)
            or set(b) != {"rows", "cols", "data"}
            or not isinstance(b["rows"], int)
            or not isinstance(b["cols"], int)
            or not isinstance(b["data"], list)
        ):
            raise _UsageError(
                "config key 'B' must be an object {rows, cols, data} with row-major data"
            )
        if b["rows"] < 1 or b["cols"] < 1:
            raise _UsageError("config key 'B': rows and cols must be positive")
        if b["rows"] * b["cols"] != len(b["data"]):
            raise _UsageError("config key 'B': rows*cols must equal len(data)")
    return data


def _spec_from_args(args) -> ProblemSpec:
    if args.config is not None:
        if args.alpha is not None or args.lam is not None or args.f is not None:
            raise _UsageError("--config and inline spec flags are mutually exclusive")
        data = _load_config(args.config)
        if "B" in data:
            raise _UsageError(
                "config contains an operator B; only the reduce command handles it"
            )
        alpha, lam, f = data["alpha"], data["lambda"], np.array(data["f"], dtype=float)
    else:
        if args.alpha is None or args.lam is None:
            raise _UsageError("provide --alpha and --lambda (or --config)")
        alpha, lam = args.alpha, args.lam
        if args.f is not None:
            f = _parse_vector(args.f, "--f")
            if args.n is not None and args.n != f.shape[0]:
                raise _UsageError(f"--n {args.n} does not match the length of --f")
        elif args.n is not None:
            if args.n < 1:
                raise _UsageError("--n must be at least 1")
            f = np.zeros(args.n)
        else:
            raise _UsageError("provide --f (or --n for a zero tilt)")
    try:
        return ProblemSpec(alpha, lam, f)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _check_doc_format(args) -> None:
    if args.format != "doc":
        raise _UsageError(f"the {args.command} command only supports --format doc")


def _emit_document(doc: dict, started: float) -> None:
    doc["timings"] = {"seconds": time.perf_counter() - started}
    sys.stdout.write(dumps_canonical(doc))


def _wrong_mode(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


# ---------------------------------------------------------------- solve


def cmd_solve(args) -> int:
    started = time.perf_counter()
    _check_doc_format(args)
    spec = _spec_from_args(args)
    if spec.force_norm_sq == 0.0:
        if not args.perturb:
            return _wrong_mode(
                "f = 0 has no isolated critical points; "
                "run the perturb command (or pass --perturb)"
            )
        return _run_perturb(spec, args, started)
    analysis = analyze(spec)
    doc = build_solve_report(analysis).to_document()
    if args.emit_plot_data is not None:
        write_solve_plot_data(args.emit_plot_data, analysis)
    _emit_document(doc, started)
    return 0


def cmd_classify(args) -> int:
    started = time.perf_counter()
    _check_doc_format(args)
    spec = _spec_from_args(args)
    if spec.force_norm_sq == 0.0:
        return _wrong_mode(
            "f = 0 has no isolated critical points to classify; run the perturb command"
        )
    analysis = analyze(spec)
    report = build_solve_report(analysis)
    doc = {
        "kind": "classify",
        "spec": {"alpha": spec.alpha, "lambda": spec.lam, "f": list(map(float, spec.f))},
        "regime": {
            "tag": analysis.regime.tag.value,
            "threshold": analysis.regime.threshold,
            "force_norm_sq": analysis.regime.force_norm_sq,
        },
        "classifications": [
            {
                "index": p.index,
                "sigma": p.sigma,
                "classification": p.classification,
                "hessian_inertia": list(p.hessian_inertia),
            }
            for p in report.critical_points
        ],
        "saddle_cone": (
            report.saddle_cone.to_document() if report.saddle_cone else None
        ),
    }
    _emit_document(doc, started)
    return 0


# ---------------------------------------------------------------- perturb


def _perturb_document(spec: ProblemSpec, trace) -> dict:
    return {
        "kind": "perturb",
        "spec": {"alpha": spec.alpha, "lambda": spec.lam, "f": list(map(float, spec.f))},
        "f_o": list(map(float, trace.f_o)),
        "steps": [
            {
                "k": step.k,
                "sigmas": list(step.sigmas),
                "points": [list(map(float, p)) for p in step.points],
                "residuals": list(step.residuals),
            }
            for step in trace.steps
        ],
        "limits": [list(map(float, limit)) for limit in trace.limits],
        "final_gaps": list(trace.final_gaps),
        "converged": trace.converged,
        "tol": trace.tol,
        "k_max": trace.k_max,
    }


def _run_perturb(spec: ProblemSpec, args, started: float) -> int:
    f_o = None
    if args.f_o is not None:
        f_o = _parse_vector(args.f_o, "--f-o")
    try:
        trace = perturb_solve(spec, f_o=f_o, k_max=args.k_max, tol=args.tol)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    doc = _perturb_document(spec, trace)
    if args.emit_plot_data is not None:
        write_perturb_plot_data(args.emit_plot_data, spec, trace)
    _emit_document(doc, started)
    return 0


def cmd_perturb(args) -> int:
    started = time.perf_counter()
    _check_doc_format(args)
    spec = _spec_from_args(args)
    if spec.force_norm_sq != 0.0:
        return _wrong_mode("perturb needs f = 0; use solve for a nonzero tilt")
    return _run_perturb(spec, args, started)


# ---------------------------------------------------------------- sweep


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    if args.config is not None:
        raise _UsageError("sweep takes inline flags, not a config file")
    if args.alpha is None or args.lam is None:
        raise _UsageError("provide --alpha and --lambda")
    if args.f_dir is None:
        raise _UsageError("provide --f-dir")
    direction = _parse_vector(args.f_dir, "--f-dir")
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        raise _UsageError("--f-dir must be nonzero")
    direction = direction / norm
    if args.f_min is None or args.f_max is None:
        raise _UsageError("provide --f-min and --f-max")
    if not 0.0 < args.f_min <= args.f_max:
        raise _UsageError("need 0 < --f-min <= --f-max (zero tilt rows are not defined)")
    if args.steps < 2:
        raise _UsageError("--steps must be at least 2")

    rows = []
    for magnitude in np.linspace(args.f_min, args.f_max, args.steps):
        spec = ProblemSpec(args.alpha, args.lam, magnitude * direction)
        roots, _ = solve_dual(spec)
        regime = roots[0].regime
        sigma_1 = roots[0].sigma
        if regime.tag is RegimeTag.THREE_DISTINCT:
            sigma_2, sigma_3 = roots[1].sigma, roots[2].sigma
        elif regime.tag is RegimeTag.DEGENERATE:
            sigma_2 = sigma_3 = roots[1].sigma
        else:
            sigma_2 = sigma_3 = None
        rows.append(
            SweepRow(
                force_norm=float(magnitude),
                sigma_1=sigma_1,
                sigma_2=sigma_2,
                sigma_3=sigma_3,
                min_value=primal_value(spec, spec.f / sigma_1),
                regime=regime.tag.value,
            )
        )
    table = SweepTable(
        alpha=float(args.alpha),
        lam=float(args.lam),
        direction=tuple(map(float, direction)),
        rows=tuple(rows),
    )
    if args.format == "csv":
        sys.stdout.write(sweep_to_csv(table))
    else:
        _emit_document(table.to_document(), started)
    return 0


# ---------------------------------------------------------------- verify


def _verification_checks(spec: ProblemSpec, seed: int, inject_sigma) -> list:
    checks = []

    def add(name, passed, observed=None, tolerance=None):
        checks.append(
            {
                "name": name,
                "passed": bool(passed),
                "observed": None if observed is None else float(observed),
                "tolerance": None if tolerance is None else float(tolerance),
            }
        )

    fd = finite_difference_check(spec, seed=seed)
    add("fd_primal_gradient", fd.max_rel_error_gradient <= 1e-6, fd.max_rel_error_gradient, 1e-6)
    add("fd_primal_hessian", fd.max_rel_error_hessian <= 1e-5, fd.max_rel_error_hessian, 1e-5)
    add("fd_dual_gradient", fd.max_rel_error_dual_gradient <= 1e-6, fd.max_rel_error_dual_gradient, 1e-6)
    add("fd_dual_hessian", fd.max_rel_error_dual_hessian <= 1e-5, fd.max_rel_error_dual_hessian, 1e-5)

    if spec.force_norm_sq == 0.0:
        # k capped so the identity check below stays inside the range where
        # sigma_3 + alpha*lam is representable in double precision
        trace = perturb_solve(spec, k_max=2**20)
        x1, x2, x3 = (trace.steps[-1].points[i] for i in range(3))
        sphere_gap = abs(float(x1 @ x1) - 2.0 * spec.lam)
        add("sphere_convergence", sphere_gap <= 1e-3, sphere_gap, 1e-3)
        antipodal = float(np.linalg.norm(x1 + x2))
        tol = 1e-3 * (1.0 + math.sqrt(2.0 * spec.lam))
        add("antipodal_convergence", antipodal <= tol, antipodal, tol)
        origin = float(np.linalg.norm(x3))
        add("origin_convergence", origin <= 1e-3, origin, 1e-3)
        well_value = primal_value(spec, trace.limits[0])
        add("sphere_minimum_value", well_value <= 1e-10, well_value, 1e-10)
        from .perturbation import perturbation_residual

        worst = max(max(row) for row in perturbation_residual(spec, trace))
        tol = 1e-9 * (1.0 + 1.0 / float(np.linalg.norm(trace.f_o)))
        add("perturbation_identity", worst <= tol, worst, tol)
    else:
        analysis = analyze(spec)
        fnsq = spec.force_norm_sq
        worst = max(abs(r.residual) / (1.0 + fnsq) for r in analysis.roots)
        add("root_residuals", worst <= 1e-10, worst, 1e-10)
        worst = max(
            abs(p.value - dual_value(spec, p.sigma))
            / (1.0 + abs(dual_value(spec, p.sigma)))
            for p in analysis.points
        )
        add("duality_gap", worst <= 1e-10, worst, 1e-10)
        worst = max(
            abs(0.5 * float(p.x @ p.x) - spec.lam - p.sigma / spec.alpha)
            / (1.0 + abs(p.sigma) / spec.alpha)
            for p in analysis.points
        )
        add("defect_consistency", worst <= 1e-10, worst, 1e-10)

        sigmas = [r.sigma for r in analysis.roots]
        if analysis.regime.tag is RegimeTag.THREE_DISTINCT:
            bound = -2.0 * spec.alpha * spec.lam / 3.0
            ordered = (
                sigmas[0] > 0.0 > sigmas[1] > bound > sigmas[2] > -spec.alpha * spec.lam
            )
            curvature_ok = (
                dual_hessian(spec, sigmas[0]) < 0.0
                and dual_hessian(spec, sigmas[1]) > 0.0
                and dual_hessian(spec, sigmas[2]) < 0.0
            )
        else:
            ordered = sigmas[0] > 0.0
            curvature_ok = dual_hessian(spec, sigmas[0]) < 0.0
        add("root_ordering", ordered)
        add("dual_curvature_signs", curvature_ok)

        inertia_ok = True
        for point in analysis.points:
            closed = hessian_inertia(spec, point)
            eigs = np.linalg.eigvalsh(primal_hessian(spec, point.x))
            scale = spec.alpha * (spec.lam + float(point.x @ point.x))
            tol = 1e-9 * max(1.0, scale)
            numeric = (
                int(np.sum(eigs < -tol)),
                int(np.sum(np.abs(eigs) <= tol)),
                int(np.sum(eigs > tol)),
            )
            inertia_ok = inertia_ok and numeric == closed
        add("hessian_inertia_cross_check", inertia_ok)

        x1 = next(p for p in analysis.points if p.index == 1)
        if spec.n <= 2:
            radius = max(
                2.0 * math.sqrt(2.0 * spec.lam),
                1.5 * float(np.linalg.norm(x1.x)) + 0.5,
            )
            points_per_axis = 201
            result = grid_minimize(spec, radius, points_per_axis)
            spacing = 2.0 * radius / (points_per_axis - 1)
            distance = float(np.linalg.norm(result.best_x - x1.x))
            hess_norm = float(np.linalg.norm(primal_hessian(spec, x1.x), 2))
            value_ok = (
                result.best_value >= x1.value - 1e-12
                and result.best_value <= x1.value + hess_norm * spec.n * spacing**2
            )
            add("grid_minimum", distance <= 2.0 * spacing and value_ok, distance, 2.0 * spacing)

        saddle = next(
            (p for p in analysis.points if p.classification is Classification.SADDLE),
            None,
        )
        if saddle is not None:
            h = 1e-3 * (1.0 + float(np.linalg.norm(saddle.x)))
            summary = sample_saddle_directions(
                spec, saddle, analysis.cone, count=500, h=h, seed=seed
            )
            add(
                "saddle_direction_agreement",
                summary.agreement_fraction == 1.0,
                summary.agreement_fraction,
                1.0,
            )

    if inject_sigma is not None:
        g = abs(cubic_residual(spec, inject_sigma))
        tol = 1e-10 * (1.0 + spec.force_norm_sq)
        add("injected_sigma_residual", g <= tol, g, tol)
    return checks


def cmd_verify(args) -> int:
    started = time.perf_counter()
    _check_doc_format(args)
    spec = _spec_from_args(args)
    checks = _verification_checks(spec, args.seed, args.inject_sigma)
    passed = all(c["passed"] for c in checks)
    doc = {
        "kind": "verify",
        "spec": {"alpha": spec.alpha, "lambda": spec.lam, "f": list(map(float, spec.f))},
        "seed": args.seed,
        "checks": checks,
        "passed": passed,
    }
    _emit_document(doc, started)
    if not passed:
        failed = [c["name"] for c in checks if not c["passed"]]
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return 3
    return 0


# ---------------------------------------------------------------- reduce


def cmd_reduce(args) -> int:
    started = time.perf_counter()
    _check_doc_format(args)
    if args.config is None:
        raise _UsageError("reduce needs --config with an operator B")
    data = _load_config(args.config)
    if "B" not in data:
        raise _UsageError("reduce config must provide the operator B")
    b = data["B"]
    matrix = np.array(b["data"], dtype=float).reshape(b["rows"], b["cols"])
    try:
        gspec = GeneralProblemSpec(data["alpha"], data["lambda"], matrix, data["f"])
        reduced = reduce_problem(gspec)
    except (NotInRangeError, ValueError) as exc:
        raise _UsageError(str(exc)) from None

    doc = {
        "kind": "reduce",
        "alpha": gspec.alpha,
        "lambda": gspec.lam,
        "operator_shape": [gspec.m, gspec.n],
        "membership_residual": reduced.membership_residual,
        "reduced_force": list(map(float, reduced.f_bar)),
    }
    if reduced.spec.force_norm_sq == 0.0:
        # reduced zero-tilt: follow the perturbed path along a direction
        # inside range(B) so the limits lift back
        f_o = None
        for j in range(gspec.n):
            column = reduced.B @ np.eye(gspec.n)[j]
            if float(column @ column) > 0.0:
                f_o = column / np.linalg.norm(column)
                f_o *= math.sqrt(0.5 * reduced.spec.regime_threshold)
                break
        trace = perturb_solve(reduced.spec, f_o=f_o)
        doc["experimental"] = True
        doc["perturb"] = _perturb_document(reduced.spec, trace)
        lifted = []
        labels = ("global_min", "global_min", "local_max")
        for i, limit in enumerate(trace.limits):
            x0 = lift_solution(reduced, limit)
            lifted.append(
                {
                    "index": i + 1,
                    "x": list(map(float, x0)),
                    "classification": labels[i],
                    "gradient_norm": float(np.linalg.norm(general_gradient(gspec, x0))),
                }
            )
        doc["lifted_points"] = lifted
    else:
        analysis = analyze(reduced.spec)
        doc["experimental"] = False
        doc["solve"] = build_solve_report(analysis).to_document()
        lifted = []
        for point in analysis.points:
            x0 = lift_solution(reduced, point.x)
            lifted.append(
                {
                    "index": point.index,
                    "x": list(map(float, x0)),
                    "classification": point.classification.value,
                    "gradient_norm": float(np.linalg.norm(general_gradient(gspec, x0))),
                }
            )
        doc["lifted_points"] = lifted
    _emit_document(doc, started)
    return 0


# ---------------------------------------------------------------- parser


def _add_spec_flags(parser) -> None:
    parser.add_argument("--alpha", type=float, help="stiffness alpha > 0")
    parser.add_argument("--lambda", dest="lam", type=float, help="well level lam > 0")
    parser.add_argument("--f", help="tilt vector as comma-separated numbers")
    parser.add_argument("--n", type=int, help="dimension (for a zero tilt without --f)")
    parser.add_argument("--config", help="JSON config file with keys alpha, lambda, f[, B]")
    parser.add_argument(
        "--format", choices=("doc", "csv"), default="doc", help="output format"
    )


def _add_perturb_flags(parser) -> None:
    parser.add_argument("--f-o", dest="f_o", help="perturbation direction (comma-separated)")
    parser.add_argument("--k-max", dest="k_max", type=int, default=DEFAULT_K_MAX)
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL)
    parser.add_argument(
        "--emit-plot-data",
        dest="emit_plot_data",
        metavar="DIR",
        help="write CSV sample tables for external plotting",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="doublewell",
        description="Complete critical points of the tilted double-well objective.",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("solve", help="solve and classify all critical points")
    _add_spec_flags(p)
    _add_perturb_flags(p)
    p.add_argument(
        "--perturb",
        action="store_true",
        help="route a zero tilt through the perturbation method",
    )
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("classify", help="classification-focused view of a solve")
    _add_spec_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("perturb", help="follow the perturbed path of a zero tilt")
    _add_spec_flags(p)
    _add_perturb_flags(p)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("sweep", help="root/regime table over tilt magnitudes")
    _add_spec_flags(p)
    p.add_argument("--f-dir", dest="f_dir", help="tilt direction (normalized internally)")
    p.add_argument("--f-min", dest="f_min", type=float, help="smallest tilt magnitude > 0")
    p.add_argument("--f-max", dest="f_max", type=float, help="largest tilt magnitude")
    p.add_argument("--steps", type=int, default=100, help="number of rows")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the independent oracle checks")
    _add_spec_flags(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument(
        "--inject-sigma",
        dest="inject_sigma",
        type=float,
        help="check a hand-supplied root candidate against the cubic",
    )
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce", help="reduce a linear-operator instance and lift back")
    _add_spec_flags(p)
    p.set_defaults(func=cmd_reduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if getattr(args, "func", None) is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
