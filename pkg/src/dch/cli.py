"""Command-line interface wiring every module to file-based inputs/outputs.

Exit codes: 0 on success, 1 on validation failure (malformed input), 2 on
numerical failure (tolerance breach, pole proximity, missing dependence).
Errors are emitted as one-line JSON objects on standard error. All file
outputs are written atomically. Set DCH_LOG=debug|info for diagnostics on
standard error.
"""

import argparse
import json
import logging
import math
import os
import sys

from . import basis, calculus, convergence, holomorphy, lattice
from .errors import NumericalError, NotHolomorphicError, ValidationError

_LOG = logging.getLogger("dch.cli")

_CSV_FMT = "%.17g"


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors through the exit-code 1 path."""

    def error(self, message):
        raise ValidationError(message)


def parse_complex(text):
    """Parse a complex scalar in either 'a,b' or 'a+bi' form."""
    s = str(text).strip().replace(" ", "")
    if "," in s:
        re_s, _, im_s = s.partition(",")
        try:
            return complex(float(re_s), float(im_s))
        except ValueError as exc:
            raise ValidationError(f"bad complex literal {text!r}") from exc
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise ValidationError(f"bad complex literal {text!r}") from exc


def parse_levels(text):
    """Parse a refinement range 'A..B' into an inclusive tuple of levels."""
    s = str(text).strip()
    head, sep, tail = s.partition("..")
    if not sep:
        raise ValidationError(f"levels must look like 'A..B', got {text!r}")
    try:
        a, b = int(head), int(tail)
    except ValueError as exc:
        raise ValidationError(f"levels must be integers, got {text!r}") from exc
    if b < a:
        raise ValidationError(f"empty level range {text!r}")
    return tuple(range(a, b + 1))


def _parse_ids(text):
    try:
        return [int(t) for t in str(text).split(",") if t.strip() != ""]
    except ValueError as exc:
        raise ValidationError(f"bad vertex id list {text!r}") from exc


def _load_map(path):
    cmap = lattice.CriticalMap.load(path)
    _LOG.debug(
        "loaded %s: %d vertices, %d quads, delta=%g",
        path, cmap.vertex_count, cmap.quad_count, cmap.delta,
    )
    return cmap


def _load_function(cmap, path):
    return holomorphy.VertexFunction.from_csv(cmap, path)


def _print_complex(value):
    print(f"{value.real:.17g},{value.imag:.17g}")


def _cmd_lattice_gen(args):
    if args.kind == "rect":
        if args.rows is None or args.cols is None:
            raise ValidationError("--rows and --cols are required for --kind rect")
        cmap = lattice.build_rect_lattice(args.delta, args.theta, args.rows, args.cols)
    else:
        if args.n is None:
            raise ValidationError("--n is required for --kind chain")
        cmap = lattice.build_chain(args.n)
    cmap.save(args.output)
    _LOG.info("wrote %s", args.output)


def _cmd_lattice_check(args):
    cmap = _load_map(args.map)
    violations = lattice.validate_criticality(cmap, tol=args.tol)
    for v in violations:
        print(f"{v.kind} at {v.where}: {v.message}")
    if violations:
        raise ValidationError(f"{len(violations)} criticality violations")
    _LOG.info("%s passes all criticality checks", args.map)


def _cmd_check(args):
    cmap = _load_map(args.map)
    f = _load_function(cmap, args.input)
    report = holomorphy.is_holomorphic(f, tol=args.tol)
    if not report:
        raise NotHolomorphicError(report.max_residual, report.tol * report.scale)
    print(
        f"holomorphic: max residual {report.max_residual:.6g} "
        f"within {report.tol:.6g} * scale {report.scale:.6g}"
    )


def _cmd_solve(args):
    cmap = _load_map(args.map)
    if args.boundary is not None:
        data = holomorphy.read_value_csv(args.boundary)
        f = holomorphy.solve_boundary(cmap, data, tol=args.tol)
    elif args.seed is not None:
        import numpy as np

        rng = np.random.default_rng(args.seed)
        f = holomorphy.random_holomorphic(cmap, rng=rng)
    else:
        raise ValidationError("either --boundary or --seed is required")
    f.to_csv(args.output)
    _LOG.info("wrote %s", args.output)


def _cmd_dim(args):
    cmap = _load_map(args.map)
    formula = holomorphy.boundary_dimension_formula(cmap)
    nullity = holomorphy.dimension_of_solution_space(cmap)
    print(formula, nullity)


def _cmd_poly_eval(args):
    cmap = _load_map(args.map)
    calculus.monomial(cmap, args.degree).to_csv(args.output)
    _LOG.info("wrote %s", args.output)


def _cmd_exp_eval(args):
    cmap = _load_map(args.map)
    lam = parse_complex(args.lam)
    if args.series is not None:
        f = calculus.exp_series_partial(cmap, lam, args.series)
    else:
        f = calculus.exp_product(cmap, lam)
    f.to_csv(args.output)
    _LOG.info("wrote %s", args.output)


def _cmd_derive(args):
    cmap = _load_map(args.map)
    f = _load_function(cmap, args.input)
    calculus.derive_duffin(f, tol=args.tol).to_csv(args.output)
    _LOG.info("wrote %s", args.output)


def _cmd_facederiv(args):
    cmap = _load_map(args.map)
    f = _load_function(cmap, args.input)
    deriv = calculus.face_derivative(f, tol=args.tol)
    lines = ["quad_index,re,im"]
    for q, v in enumerate(deriv.values):
        lines.append(f"{q},{v.real:.17g},{v.imag:.17g}")
    lattice.write_text_atomic(args.output, "\n".join(lines) + "\n")
    _LOG.info("wrote %s", args.output)


def _cmd_integrate(args):
    cmap = _load_map(args.map)
    f = _load_function(cmap, args.input)
    path = lattice.as_path(cmap, _parse_ids(args.path))
    _print_complex(calculus.integrate_path(f, path))


def _cmd_basis_table(args):
    if args.max_degree < 1:
        raise ValidationError("--max-degree must be >= 1")
    for k in range(1, args.max_degree + 1):
        bp = basis.b_polynomial(k)
        for parts in sorted(bp.terms, reverse=True):
            shown = ",".join(str(p) for p in parts)
            print(f"{k}; ({shown}); {bp.terms[parts]}")


def _cmd_translate(args):
    cmap = _load_map(args.map)
    a = parse_complex(args.a)
    out = basis.translate_monomial(cmap, args.degree, a, args.b)
    out.to_csv(args.output)
    _LOG.info("wrote %s", args.output)


def _cmd_minpoly(args):
    cmap = _load_map(args.map)
    mp = basis.minimal_polynomial(
        cmap, max_degree=args.max_degree, sv_ratio=args.sv_ratio
    )
    data = {
        "n": mp.degree,
        "a": [[c.real, c.imag] for c in mp.coefficients],
        "symmetry_defect": mp.symmetry_defect,
        "modulus_defect": mp.modulus_defect,
    }
    lattice.write_json_atomic(args.output, data)
    _LOG.info("wrote %s (n=%d)", args.output, mp.degree)


def _cmd_convergence(args):
    levels = parse_levels(args.levels)
    family = convergence.RefiningFamily(args.family, levels, theta=args.theta)
    head, sep, tail = str(args.target).partition(":")
    if not sep:
        raise ValidationError("target must be poly:K, exp:RE,IM or series:coeffs.json")
    if head == "poly":
        try:
            k = int(tail)
        except ValueError as exc:
            raise ValidationError(f"bad monomial degree {tail!r}") from exc
        report = convergence.monomial_convergence(family, k)
    elif head == "exp":
        report = convergence.exp_convergence(family, parse_complex(tail))
    elif head == "series":
        with open(tail, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, list):
            raise ValidationError(f"{tail}: expected a JSON list of coefficients")
        coeffs = [
            complex(c[0], c[1]) if isinstance(c, list) else complex(c) for c in raw
        ]
        report = convergence.series_approximation(family, coeffs)
    else:
        raise ValidationError(f"unknown target kind {head!r}")
    report.save(args.output)
    _LOG.info("wrote %s (order=%.4g)", args.output, report.order)


def _add_map(p):
    p.add_argument("--map", required=True, help="critical map JSON file")


def _add_output(p, what):
    p.add_argument("-o", "--output", required=True, help=f"output path for {what}")


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    top = _Parser(prog="dch", description=__doc__, formatter_class=fmt)
    top.add_argument(
        "--threads", type=int, default=None,
        help="cap worker threads; outputs are identical regardless",
    )
    sub = top.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p_lat = sub.add_parser("lattice", help="generate and validate maps", formatter_class=fmt)
    lat_sub = p_lat.add_subparsers(dest="subcommand", required=True, metavar="ACTION")
    p = lat_sub.add_parser("gen", help="generate a critical map", formatter_class=fmt)
    p.add_argument("--kind", choices=("rect", "chain"), required=True)
    p.add_argument("--delta", type=float, default=1.0, help="rhombus side (rect)")
    p.add_argument("--theta", type=float, default=math.pi / 4,
                   help="rhombus half-angle in radians (rect)")
    p.add_argument("--rows", type=int, default=None, help="quad rows (rect)")
    p.add_argument("--cols", type=int, default=None, help="quad columns (rect)")
    p.add_argument("--n", type=int, default=None, help="subdivision count (chain)")
    _add_output(p, "the map JSON")
    p.set_defaults(func=_cmd_lattice_gen)
    p = lat_sub.add_parser("check", help="validate criticality", formatter_class=fmt)
    p.add_argument("map", help="critical map JSON file")
    p.add_argument("--tol", type=float, default=1e-12, help="geometric tolerance")
    p.set_defaults(func=_cmd_lattice_check)

    p = sub.add_parser("check", help="test a function for discrete holomorphy",
                       formatter_class=fmt)
    _add_map(p)
    p.add_argument("--input", required=True, help="vertex-value CSV")
    p.add_argument("--tol", type=float, default=1e-9, help="relative residual tolerance")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("solve", help="extend boundary data holomorphically",
                       formatter_class=fmt)
    _add_map(p)
    p.add_argument("--boundary", default=None, help="boundary-value CSV")
    p.add_argument("--seed", type=int, default=None,
                   help="generate random boundary data instead of --boundary")
    p.add_argument("--tol", type=float, default=1e-10,
                   help="consistency tolerance for over-determined data")
    _add_output(p, "the solved vertex-value CSV")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("dim", help="print |boundary|/2+1 and the computed nullity",
                       formatter_class=fmt)
    _add_map(p)
    p.set_defaults(func=_cmd_dim)

    p_poly = sub.add_parser("poly", help="discrete monomials", formatter_class=fmt)
    poly_sub = p_poly.add_subparsers(dest="subcommand", required=True, metavar="ACTION")
    p = poly_sub.add_parser("eval", help="evaluate Z^{:K:}", formatter_class=fmt)
    _add_map(p)
    p.add_argument("--degree", type=int, required=True)
    _add_output(p, "the vertex-value CSV")
    p.set_defaults(func=_cmd_poly_eval)

    p_exp = sub.add_parser("exp", help="discrete exponentials", formatter_class=fmt)
    exp_sub = p_exp.add_subparsers(dest="subcommand", required=True, metavar="ACTION")
    p = exp_sub.add_parser("eval", help="evaluate Exp(:lambda:)", formatter_class=fmt)
    _add_map(p)
    p.add_argument("--lambda", dest="lam", required=True, metavar="RE,IM",
                   help="exponential parameter")
    p.add_argument("--series", type=int, default=None, metavar="N",
                   help="use the degree-N partial series instead of the product")
    _add_output(p, "the vertex-value CSV")
    p.set_defaults(func=_cmd_exp_eval)

    p = sub.add_parser("derive", help="Duffin derivative of a holomorphic function",
                       formatter_class=fmt)
    _add_map(p)
    p.add_argument("--input", required=True, help="vertex-value CSV")
    p.add_argument("--tol", type=float, default=1e-9, help="holomorphy tolerance")
    _add_output(p, "the derivative CSV")
    p.set_defaults(func=_cmd_derive)

    p = sub.add_parser("facederiv", help="per-quad diagonal derivative",
                       formatter_class=fmt)
    _add_map(p)
    p.add_argument("--input", required=True, help="vertex-value CSV")
    p.add_argument("--tol", type=float, default=1e-10,
                   help="diagonal agreement tolerance")
    _add_output(p, "the face CSV (quad_index,re,im)")
    p.set_defaults(func=_cmd_facederiv)

    p = sub.add_parser("integrate", help="trapezoid integral along a vertex path",
                       formatter_class=fmt)
    _add_map(p)
    p.add_argument("--input", required=True, help="vertex-value CSV")
    p.add_argument("--path", required=True, metavar="ID1,ID2,...",
                   help="comma-separated vertex ids")
    p.set_defaults(func=_cmd_integrate)

    p_basis = sub.add_parser("basis", help="change-of-basis polynomials",
                             formatter_class=fmt)
    basis_sub = p_basis.add_subparsers(dest="subcommand", required=True, metavar="ACTION")
    p = basis_sub.add_parser("table", help="print B^1..B^K as degree; partition; coefficient",
                             formatter_class=fmt)
    p.add_argument("--max-degree", type=int, required=True)
    p.set_defaults(func=_cmd_basis_table)

    p = sub.add_parser("translate", help="rebase Z^{:K:} to scale a and origin b",
                       formatter_class=fmt)
    _add_map(p)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--a", required=True, metavar="RE,IM", help="scale factor")
    p.add_argument("--b", type=int, required=True, help="new origin vertex id")
    _add_output(p, "the vertex-value CSV")
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("minpoly", help="minimal vanishing polynomial",
                       formatter_class=fmt)
    _add_map(p)
    p.add_argument("--max-degree", type=int, default=None,
                   help="highest degree to try (default min(V, 40))")
    p.add_argument("--sv-ratio", type=float, default=1e-8,
                   help="relative singular value cutoff")
    _add_output(p, "the coefficient JSON")
    p.set_defaults(func=_cmd_minpoly)

    p = sub.add_parser("convergence", help="refinement study against a continuous target",
                       formatter_class=fmt)
    p.add_argument("--family", choices=(convergence.RECT, convergence.CHAIN),
                   required=True)
    p.add_argument("--theta", type=float, default=math.pi / 4,
                   help="rhombus half-angle in radians (rect)")
    p.add_argument("--levels", required=True, metavar="A..B",
                   help="inclusive refinement level range")
    p.add_argument("--target", required=True,
                   help="poly:K, exp:RE,IM or series:coeffs.json")
    _add_output(p, "the report CSV")
    p.set_defaults(func=_cmd_convergence)

    return top


def _apply_threads(n):
    if n is None:
        return
    if n < 1:
        raise ValidationError("--threads must be >= 1")
    os.environ.setdefault("OMP_NUM_THREADS", str(n))
    try:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        pass
    _LOG.debug("thread cap set to %d", n)


def _setup_logging():
    wanted = os.environ.get("DCH_LOG", "").strip().lower()
    level = {"debug": logging.DEBUG, "info": logging.INFO}.get(wanted)
    if level is not None:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("dch %(levelname)s: %(message)s"))
        root = logging.getLogger("dch")
        root.handlers[:] = [handler]
        root.setLevel(level)


def _emit_error(exc):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload), file=sys.stderr)


def run(argv=None):
    """Parse argv, dispatch, and map exceptions to stable exit codes."""
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_threads(args.threads)
        rc = args.func(args)
        return 0 if rc is None else int(rc)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    except NumericalError as exc:
        _emit_error(exc)
        return 2
    except (ValidationError, ValueError, OSError) as exc:
        _emit_error(exc)
        return 1


def main(argv=None):
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
