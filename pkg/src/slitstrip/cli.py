"""Command line entry point: ``slitstrip <subcommand> ...``.

Exit status is 0 on success, 2 on invalid input and 3 when a numerical
method fails to converge.
"""

from __future__ import annotations

import os
import sys

_threads = os.environ.get("SLITSTRIP_THREADS")
if _threads and _threads.isdigit() and int(_threads) > 0:
    # BLAS pools are sized at import time, so this must precede numpy
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import json  # noqa: E402
import math  # noqa: E402

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


class InvalidInput(ValueError):
    pass


def _number(x):
    if isinstance(x, complex):
        return {"re": _number(x.real), "im": _number(x.imag)}
    x = float(x)
    if not math.isfinite(x):
        raise ArithmeticError(f"non-finite result {x}")
    return x


def _dump(obj) -> str:
    # json writes floats with repr, the shortest string that round-trips
    return json.dumps(obj, sort_keys=True, allow_nan=False)


def _geometry(args):
    from .geometry import make_geometry, symmetric_geometry
    if (args.a is None) != (args.b is None):
        raise InvalidInput("--a and --b must be given together")
    if args.a is not None:
        return make_geometry(args.a, args.b)
    if args.width is None:
        raise InvalidInput("give --width or both --a and --b")
    return symmetric_geometry(args.width)


def _key(args):
    from .geometry import parse_half_set
    return (parse_half_set(args.alpha), parse_half_set(args.beta_left),
            parse_half_set(args.beta_right))


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _int_list(text):
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"malformed integer list {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def cmd_diagonalize(args):
    from .discrete_cx import eigenfunction_basis
    if args.width < 1:
        raise InvalidInput("--width must be positive")
    basis = eigenfunction_basis(args.width)
    modes = []
    for i, k2 in enumerate(basis.modes):
        f = basis.plus[i]
        modes.append({"k2": k2, "omega": _number(basis.omega[i]),
                      "lambda": _number(basis.eigenvalue[i]),
                      "f_re": [_number(v) for v in f.real],
                      "f_im": [_number(v) for v in f.imag]})
    return {"config": {"width": args.width}, "modes": modes}


def cmd_fusion(args):
    from .fusion import DirectFusion, RecursiveFusion, canonical_key
    from .geometry import format_key
    geom = _geometry(args)
    key = canonical_key(*_key(args), geom=geom)
    out = {"config": {"a": geom.a, "b": geom.b, "method": args.method},
           "key": format_key(*key), "method": args.method}
    values = {}
    if args.method in ("direct", "both"):
        direct = DirectFusion(geom)
        values["direct"] = _number(direct.ratio(key))
        out["B_vacuum"] = _number(direct.vacuum)
    if args.method in ("recursive", "both"):
        values["recursive"] = _number(RecursiveFusion(geom).ratio(key))
    out["value"] = values
    if len(values) == 2:
        out["difference"] = _number(abs(values["direct"] - values["recursive"]))
    return out


def cmd_continuum(args):
    from .continuum import continuum_fusion, continuum_fusion_recursive
    from .fusion import canonical_key
    from .geometry import format_key
    key = canonical_key(*_key(args))
    out = {"config": {"method": args.method, "tol": args.tol}, "key": format_key(*key),
           "method": args.method}
    values = {}
    if args.method in ("pfaffian", "both"):
        res = continuum_fusion(key, tol=args.tol)
        values["pfaffian"] = _number(res.value)
        out["quadrature"] = {"nodes": res.nodes, "change": _number(res.change),
                             "imag": _number(res.imag)}
    if args.method in ("recursive", "both"):
        values["recursive"] = _number(continuum_fusion_recursive(key))
    out["value"] = values
    if len(values) == 2:
        out["difference"] = _number(abs(values["pfaffian"] - values["recursive"]))
    return out


def cmd_converge(args):
    from .geometry import parse_key
    from .scaling import WidthSchedule, default_inner_products, fusion_id, run_convergence
    keys = []
    for chunk in args.keys:
        keys += [parse_key(k) for k in chunk.split("|") if k.strip()]
    schedule = WidthSchedule.balanced(args.widths)
    report = run_convergence(schedule, keys, default_inner_products(args.ip_max))
    text = report.to_csv()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        summary = {fusion_id(k): {"extrapolated": _number(report.extrapolated(fusion_id(k))),
                                  "continuum": _number(report.targets[fusion_id(k)])}
                   for k in keys if report.series(fusion_id(k))}
        return {"config": {"widths": args.widths, "keys": [fusion_id(k) for k in keys],
                           "out": args.out}, "rows": len(report.rows), "fusion": summary}
    sys.stdout.write(text)
    return None


def cmd_oracle(args):
    from .statespace import oracle_partition_and_correlations
    from .transfer import truncated_partition_function, truncated_spin_correlation
    geom = _geometry(args)
    if args.ht < 0 or args.hb < 0:
        raise InvalidInput("heights must be nonnegative")
    x = geom.b - 1 if geom.b - 1 > 0 else geom.a + 1
    points = [(x, -args.hb), (x, args.ht)]
    enum = oracle_partition_and_correlations(geom, args.ht, args.hb, args.slit, spins=[points])
    z_tm = truncated_partition_function(geom, args.ht, args.hb, args.slit)
    c_tm = truncated_spin_correlation(geom, args.ht, args.hb, points, args.slit)
    c_en = enum.correlations[tuple(points)]
    return {"config": {"a": geom.a, "b": geom.b, "ht": args.ht, "hb": args.hb,
                       "slit": args.slit},
            "partition_function": {"enumeration": _number(enum.partition_function),
                                   "transfer": _number(z_tm),
                                   "gap": _number(abs(z_tm / enum.partition_function - 1))},
            "correlation": {"points": points, "enumeration": _number(c_en),
                            "transfer": _number(c_tm), "gap": _number(abs(c_tm - c_en))}}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slitstrip", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("diagonalize", help="vertical translation eigenfunctions of one width")
    d.add_argument("--width", type=int, required=True)
    d.set_defaults(func=cmd_diagonalize)

    def geometry_flags(q):
        q.add_argument("--width", type=int)
        q.add_argument("--a", type=int)
        q.add_argument("--b", type=int)

    def key_flags(q):
        q.add_argument("--alpha", default="", help="comma-separated odd integers 2k")
        q.add_argument("--beta-left", default="")
        q.add_argument("--beta-right", default="")

    f = sub.add_parser("fusion", help="lattice fusion coefficient ratio")
    geometry_flags(f)
    key_flags(f)
    f.add_argument("--method", choices=("direct", "recursive", "both"), default="both")
    f.set_defaults(func=cmd_fusion)

    c = sub.add_parser("continuum", help="continuum fusion coefficient")
    key_flags(c)
    c.add_argument("--method", choices=("pfaffian", "recursive", "both"), default="both")
    c.add_argument("--tol", type=_positive_float, default=1e-8)
    c.set_defaults(func=cmd_continuum)

    v = sub.add_parser("converge", help="lattice versus continuum table as CSV")
    v.add_argument("--widths", type=_int_list, default=[4, 8, 16, 32, 64])
    v.add_argument("--keys", nargs="*", default=[],
                   help='keys "alpha;beta_left;beta_right", several separated by spaces or |')
    v.add_argument("--ip-max", type=int, default=5,
                   help="largest doubled index in the inner-product table")
    v.add_argument("--out", help="CSV path (stdout if omitted)")
    v.set_defaults(func=cmd_converge)

    o = sub.add_parser("oracle", help="transfer matrices against exhaustive enumeration")
    geometry_flags(o)
    o.add_argument("--ht", type=int, default=1)
    o.add_argument("--hb", type=int, default=1)
    o.add_argument("--slit", action="store_true")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    from numpy.linalg import LinAlgError

    from .continuum import QuadratureError
    from .transfer import ConvergenceError
    try:
        from .scaling import worker_count
        worker_count()
        result = args.func(args)
    except (ConvergenceError, QuadratureError, ArithmeticError, LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if result is not None:
        print(_dump(result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
