"""Command-line front door: one subcommand per library operation.

Every run emits a CSV table (stdout or ``--output``) plus a JSON sidecar of
the fully resolved configuration and result summary.  The sidecar is
written next to the CSV file, or to stderr when the CSV goes to stdout.
Complex values always occupy two columns (re, im); rational points cross
the boundary as exact "a1,a2/m" strings.

Exit codes: 0 success, 2 contract violation, 3 numeric/capacity failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import explore, families, fractal, perturb
from .errors import ContractError, WeylLabError
from .exactzero import certify_zero, parse_rational
from .sumcore import TorusPoint, eval_direct, eval_incremental


def _parse_torus(text: str) -> TorusPoint:
    """A torus point: exact "a1,a2/m" rational, or decimal coordinates."""
    if "/" in text:
        return parse_rational(text).to_torus()
    try:
        return TorusPoint(tuple(float(v) for v in text.split(",")))
    except ValueError as exc:
        raise ContractError(f"malformed point {text!r}") from exc


def _parse_region(text: str) -> tuple:
    """Comma-separated "lo..hi" ranges, e.g. "0.4..0.6,0.25..0.75"."""
    try:
        out = []
        for part in text.split(","):
            lo, hi = part.split("..")
            out.append((float(lo), float(hi)))
        return tuple(out)
    except ValueError as exc:
        raise ContractError(f"malformed region {text!r}") from exc


def _parse_rect(text: str) -> tuple:
    try:
        x0, y0, x1, y1 = (float(v) for v in text.split(","))
        return (x0, y0, x1, y1)
    except ValueError as exc:
        raise ContractError(f"malformed rectangle {text!r}") from exc


def _emit(args, header, rows, summary):
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    sidecar = {"subcommand": args.command, "threads": args.threads}
    sidecar.update(
        {
            k: v
            for k, v in sorted(vars(args).items())
            if k not in ("command", "func", "output", "threads")
            and isinstance(v, (int, float, str, bool, type(None)))
        }
    )
    sidecar.update(summary)
    payload = json.dumps(sidecar, sort_keys=True)
    if args.output == "-":
        sys.stdout.write(buf.getvalue())
        sys.stderr.write(payload + "\n")
    else:
        with open(args.output, "w", newline="") as fh:
            fh.write(buf.getvalue())
        with open(args.output + ".json", "w") as fh:
            fh.write(payload + "\n")


# ---------------------------------------------------------------------------
# subcommand handlers: each returns (header, rows, summary)

def _cmd_eval(args):
    x = _parse_torus(args.point)
    fn = eval_direct if args.mode == "direct" else eval_incremental
    v = fn(x, args.n)
    return (
        ["n", "re", "im"],
        [[args.n, repr(v.real), repr(v.imag)]],
        {"abs": abs(v)},
    )


def _cmd_certify(args):
    point = parse_rational(args.point)
    span = args.span if args.span is not None else point.modulus
    cert = certify_zero(point, span)
    return (
        ["point", "span", "mechanism", "verified"],
        [[str(point), span, cert.mechanism, cert.verified]],
        {"mechanism": cert.mechanism, "verified": cert.verified},
    )


def _cmd_family(args):
    pts = families.enumerate_family(
        args.family, args.p, d=args.d, sample_size=args.sample_size,
        seed=args.seed,
    )
    rows = [
        [fp.family, fp.prime, ",".join(map(str, fp.params)), str(fp.point),
         fp.vanishing_span, fp.degenerate]
        for fp in pts
    ]
    return (
        ["family", "prime", "params", "point", "span", "degenerate"],
        rows,
        {"count": len(pts)},
    )


def _cmd_dio(args):
    dio = families.build_dio_point(args.family, args.d, args.depth,
                                   seed=args.seed)
    rows = [
        [i, w.prime, ",".join(map(str, w.numerators)), max(w.margins)]
        for i, w in enumerate(dio.witnesses, start=1)
    ]
    exact = ",".join(f"{f.numerator}/{f.denominator}" for f in dio.exact)
    return (
        ["step", "prime", "numerators", "margin"],
        rows,
        {"family": dio.family, "degree": dio.degree, "exact": exact},
    )


def _cmd_delta(args):
    delta = families.estimate_delta(
        args.p, args.eta, args.family, sample_budget=args.budget,
        d=args.d, seed=args.seed,
    )
    return (
        ["p", "eta", "family", "delta"],
        [[args.p, args.eta, args.family, repr(delta)]],
        {"delta": delta},
    )


def _cmd_bounds(args):
    scan = perturb.incomplete_bound_scan(
        args.kind, args.p_max, d=args.d, sample_size=args.sample_size,
        seed=args.seed,
    )
    rows = [[args.kind, p, ratio] for p, ratio in scan]
    return (
        ["kind", "p", "worst_ratio"],
        rows,
        {"fitted_constant": perturb.fitted_constant(scan)},
    )


def _cmd_continuity(args):
    anchor = parse_rational(args.anchor)
    make = (perturb.gauss_profile if args.profile == "gauss"
            else perturb.quadratic_profile)
    taus = args.taus or [args.tau]
    if len(taus) == 1:
        reports = [
            perturb.continuity_check(
                anchor, make(args.p, taus[0]), args.n,
                samples=args.samples, seed=args.seed,
            )
        ]
    else:
        reports = perturb.tau_scaling_probe(
            anchor, make(args.p, taus[0]), args.n, taus,
            samples=args.samples, seed=args.seed,
        )
    rows = [
        [r.profile.tau, r.n, r.lhs, r.rhs_unit, r.ratio, r.samples, r.c_fit]
        for r in reports
    ]
    return (
        ["tau", "n", "lhs", "rhs_unit", "ratio", "samples", "c_fit"],
        rows,
        {"worst_ratio": max(r.ratio for r in reports)},
    )


def _cmd_liminf(args):
    est = explore.liminf_estimate(_parse_torus(args.point), args.n_max)
    rows = [[n, v] for n, v in est.record_curve]
    return (
        ["n", "running_min_abs"],
        rows,
        {"min_abs": est.min_abs, "argmin_n": est.argmin_n},
    )


def _cmd_search(args):
    res = explore.search_small(
        _parse_region(args.region), args.d, args.eps, args.n_cap,
        args.budget, seed=args.seed,
    )
    coords = ",".join(repr(c) for c in res.x.coords)
    return (
        ["found", "x", "n", "abs_value", "evaluations"],
        [[res.found, coords, res.n, res.abs_value, res.evaluations]],
        {"found": res.found, "abs_value": res.abs_value},
    )


def _cmd_orbit(args):
    st = explore.orbit_stats(
        _parse_torus(args.point), args.n_max, window=args.window,
        grid=args.grid,
    )
    return (
        ["n_max", "max_abs", "visited_fraction", "dir_re", "dir_im",
         "offset_re", "offset_im", "max_residual", "growth_exponent"],
        [[st.n_max, st.max_abs, st.visited_fraction,
          st.line_direction.real, st.line_direction.imag,
          st.line_offset.real, st.line_offset.imag,
          st.line_max_residual, st.growth_exponent]],
        {"max_abs": st.max_abs, "growth_exponent": st.growth_exponent},
    )


def _cmd_restricted(args):
    points = [_parse_torus(t) for t in args.points]
    recs = explore.restricted_membership_scan(
        args.d, args.alpha, points, args.n_min, args.n_max
    )
    rows = [
        [",".join(repr(c) for c in r.point.coords), r.count, r.largest_n]
        for r in recs
    ]
    return (
        ["point", "hits", "largest_n"],
        rows,
        {"alpha": args.alpha, "n_min": args.n_min, "n_max": args.n_max},
    )


def _cmd_band(args):
    c_lower, c_upper = explore.growth_band_check(args.x, args.y, args.n_max)
    return (
        ["x", "y", "n_max", "c_lower", "c_upper"],
        [[args.x, args.y, args.n_max, c_lower, c_upper]],
        {"c_lower": c_lower, "c_upper": c_upper},
    )


def _cmd_psi(args):
    curve = explore.psi_distribution(args.n, args.grid)
    rows = [[float(a), float(v)] for a, v in zip(curve.alphas, curve.psi)]
    return (["alpha", "psi"], rows, {"n": curve.n, "grid": curve.grid})


def _cmd_boxdim(args):
    if args.points_file:
        with open(args.points_file, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)  # header
            pts = np.array([[float(v) for v in row] for row in reader])
    else:
        real = fractal.cantor_sample(args.cantor_depth, args.seed)
        pts = fractal.cantor_draw(real, args.seed, args.count)
    res = fractal.box_count(pts, args.k_min, args.k_max)
    rows = [[k, c] for k, c in zip(res.scales, res.counts)]
    return (
        ["k", "count"],
        rows,
        {"slope": res.slope, "r2": res.r2, "points": len(pts)},
    )


def _cmd_cantor(args):
    if args.action == "sample":
        real = fractal.cantor_sample(args.depth, args.seed)
        return (
            ["record"],
            [[fractal.realization_record(real)]],
            {"depth": real.depth, "kept_count": real.kept_count},
        )
    if args.action == "measure":
        real = fractal.cantor_sample(args.depth, args.seed)
        value = fractal.cantor_measure(real, _parse_rect(args.rect))
        return (
            ["depth", "seed", "rect", "measure"],
            [[args.depth, args.seed, args.rect, repr(float(value))]],
            {"measure": float(value)},
        )
    if args.action == "expectation":
        mean, stderr, area = fractal.cantor_expectation_test(
            _parse_rect(args.rect), args.depth, args.trials, args.seed
        )
        return (
            ["depth", "trials", "mean", "stderr", "lebesgue"],
            [[args.depth, args.trials, repr(mean), repr(stderr), repr(area)]],
            {"mean": mean, "stderr": stderr, "lebesgue": area},
        )
    if args.action == "draw":
        real = fractal.cantor_sample(args.depth, args.seed)
        pts = fractal.cantor_draw(real, args.seed, args.count)
        return (
            ["x", "y"],
            [[repr(float(x)), repr(float(y))] for x, y in pts],
            {"count": len(pts)},
        )
    if args.action == "weyl-stat":
        summary = fractal.cantor_weyl_statistic(
            args.depth, args.trials, args.n_max, args.g, seed=args.seed
        )
        q1, q2, q3 = summary.quartiles
        return (
            ["g", "depth", "n_max", "q1", "median", "q3", "max"],
            [[summary.g_name, summary.depth, summary.n_max, q1, q2, q3,
              summary.max]],
            {"median": q2, "max": summary.max},
        )
    raise ContractError(f"unknown cantor action {args.action!r}")


# ---------------------------------------------------------------------------
# parser assembly

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weyl-lab",
        description="Weyl sum evaluation, vanishing certificates, and "
        "exploration tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        p.add_argument("--output", default="-", help="CSV path, - for stdout")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument(
            "--threads", type=int,
            default=int(os.environ.get("WEYL_LAB_THREADS", 0))
            or os.cpu_count(),
        )
        return p

    p = add("eval", _cmd_eval, help="evaluate a Weyl sum")
    p.add_argument("--point", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=["incremental", "direct"],
                   default="incremental")

    p = add("certify", _cmd_certify, help="exact vanishing certificate")
    p.add_argument("--point", required=True, help='rational "a1,a2/m"')
    p.add_argument("--span", type=int, default=None)

    p = add("family", _cmd_family, help="enumerate a rational point family")
    p.add_argument("--family", required=True,
                   choices=[families.FAMILY_P, families.FAMILY_Q,
                            families.FAMILY_R, families.FAMILY_LAMBDA])
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--sample-size", type=int, default=None)

    p = add("dio", _cmd_dio, help="nested-interval Diophantine point")
    p.add_argument("--family", required=True,
                   choices=[families.DIO_P, families.DIO_Q, families.DIO_R,
                            families.DIO_RECT])
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--depth", type=int, default=3)

    p = add("delta", _cmd_delta, help="safe neighborhood radius")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--family", default=families.FAMILY_Q)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--budget", type=int, default=200)

    p = add("bounds", _cmd_bounds, help="incomplete-sum bound scan")
    p.add_argument("--kind", required=True, choices=list(perturb.SCAN_KINDS))
    p.add_argument("--p-max", type=int, required=True)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--sample-size", type=int, default=None)

    p = add("continuity", _cmd_continuity, help="continuity bound check")
    p.add_argument("--anchor", required=True, help='rational "a1,a2/m"')
    p.add_argument("--profile", choices=["gauss", "quadratic"],
                   default="gauss")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--taus", type=float, nargs="*", default=None)
    p.add_argument("--samples", type=int, default=40)

    p = add("liminf", _cmd_liminf, help="minimum |S(N)| over a horizon")
    p.add_argument("--point", required=True)
    p.add_argument("--n-max", type=int, required=True)

    p = add("search", _cmd_search, help="small-value search in a region")
    p.add_argument("--region", required=True, help='"lo..hi,lo..hi"')
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n-cap", type=int, default=1000)
    p.add_argument("--budget", type=int, default=50)

    p = add("orbit", _cmd_orbit, help="orbit statistics of partial sums")
    p.add_argument("--point", required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--window", type=float, default=50.0)
    p.add_argument("--grid", type=int, default=64)

    p = add("restricted", _cmd_restricted, help="|S(N)| >= N^alpha hits")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--points", nargs="+", required=True)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, required=True)

    p = add("band", _cmd_band, help="growth band of |S|/sqrt(N)")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--n-max", type=int, required=True)

    p = add("psi", _cmd_psi, help="distribution of normalized Gauss sums")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=int, required=True)

    p = add("boxdim", _cmd_boxdim, help="box-counting dimension estimate")
    p.add_argument("--points-file", default=None, help="CSV with x,y columns")
    p.add_argument("--cantor-depth", type=int, default=10)
    p.add_argument("--count", type=int, default=10000)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=10)

    p = add("cantor", _cmd_cantor, help="random Cantor set operations")
    p.add_argument("action", choices=["sample", "measure", "expectation",
                                      "draw", "weyl-stat"])
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--rect", default="0,0,1,1", help='"x0,y0,x1,y1"')
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--n-max", type=int, default=1000)
    p.add_argument("--g", choices=list(fractal.G_MENU), default="1")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        header, rows, summary = args.func(args)
        _emit(args, header, rows, summary)
    except ContractError as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 2
    except WeylLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
