"""Command line front-end: ``gfa classify | spectrum | verify | parse``.

Exit codes: 0 all Pass or as annotated, 1 a verdict contradicts the
annotation of a built-in family, 2 an Inconclusive verdict or an exhausted
Fourier budget, 3 a usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Optional

from . import __version__, dsl
from .report import Verdict, sanitize
from .scale import EpsGrid, geometric_grid

EXIT_OK, EXIT_MISMATCH, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3

CSV_COLUMNS = ("eps", "region", "alpha", "m_or_k", "sup_logmag", "fit_slope", "residual")
SPECTRUM_COLUMNS = ("eps", "peak_xi", "peak_xi_times_eps", "npts", "L", "accuracy")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(spec: str) -> EpsGrid:
    """``geom:<start>:<stop>:<count>``: ``count`` values ``2^-t`` with ``t``
    evenly spaced from ``start`` to ``stop``; the smallest ``4/7`` (at least 8)
    form the fitting tail."""
    parts = spec.split(":")
    if len(parts) != 4 or parts[0] != "geom":
        raise UsageError(f"grid spec {spec!r} is not geom:<start>:<stop>:<count>")
    try:
        start, stop, count = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise UsageError(f"grid spec {spec!r} has non-numeric fields") from None
    if not 0 < start < stop or count < 8:
        raise UsageError("grid needs 0 < start < stop and at least 8 points")
    if start == int(start) and stop == int(stop) and count == stop - start + 1:
        return geometric_grid(int(start), int(stop), tail=max(8, count * 4 // 7))
    import numpy as np

    eps = 2.0 ** -np.linspace(start, stop, count)
    return EpsGrid(eps, (count - max(8, count * 4 // 7), count))


def _load_family(args):
    from .examples import BUILTIN_NAMES, builtin
    from .family import load_family_file

    if args.builtin:
        if args.builtin not in BUILTIN_NAMES:
            raise UsageError(f"unknown builtin family {args.builtin!r}; choose from {', '.join(BUILTIN_NAMES)}")
        return builtin(args.builtin)
    try:
        return load_family_file(args.family)
    except OSError as exc:
        raise UsageError(f"cannot read {args.family}: {exc.strerror}") from None


def _expected(args) -> dict:
    if not args.builtin:
        return {}
    from .examples import canonical_families

    for c in canonical_families():
        if c.name == args.builtin:
            return c.expected
    return {}


def _builtin_grid(args) -> Optional[EpsGrid]:
    if args.builtin == "example510":
        from .examples import Example510Config

        return Example510Config().grid()
    return None


def _params(args):
    from .suite import RunParams

    grid = parse_grid(args.eps_grid) if args.eps_grid else None
    kw = {}
    for name in ("m_max", "k_max", "n_max"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    space = grid or _builtin_grid(args)
    return RunParams(grid=space, fourier_grid=grid, **kw)


def _split_tests(text: str, allowed) -> list:
    names = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in names if t not in allowed]
    if bad or not names:
        raise UsageError(f"unknown test(s) {', '.join(bad) or '(none)'}; choose from {', '.join(allowed)}")
    return names


def _dump_json(obj, path: str):
    text = json.dumps(sanitize(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _write_csv(rows, columns, path: str):
    fh = sys.stdout if path == "-" else open(path, "w", encoding="utf-8", newline="")
    try:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        for r in rows:
            r = dict(r)
            if isinstance(r.get("alpha"), (list, tuple)):
                r["alpha"] = ",".join(str(a) for a in r["alpha"])
            w.writerow({k: r.get(k, "") for k in columns})
    finally:
        if fh is not sys.stdout:
            fh.close()


def _run(args, names, spectrum: bool) -> int:
    from .classify import recording
    from .suite import expectation_key, run_test

    family = _load_family(args)
    params = _params(args)
    expected = _expected(args)
    results = []
    code = EXIT_OK
    with recording() as rows:
        for name in names:
            report = run_test(name, family, params)
            entry = report.as_dict()
            entry["family"] = family.name
            entry["version"] = __version__
            key = expectation_key(name)
            line = f"{name:20s} {report.verdict.value}"
            if key in expected:
                want = Verdict.PASS if expected[key] else Verdict.FAIL
                entry["expected"] = want.value
                if report.verdict not in (want, Verdict.INCONCLUSIVE):
                    code = EXIT_MISMATCH
                    line += f"  (expected {want.value})"
            if report.verdict == Verdict.INCONCLUSIVE:
                if code == EXIT_OK:
                    code = EXIT_INCONCLUSIVE
                why = report.diagnostics.get("fourier_budget") or report.diagnostics.get("precondition")
                if why:
                    line += f"  [{why}]"
            print(line)
            results.append(entry)
    doc = {"version": __version__, "family": family.describe(), "params": params.describe(),
           "results": results}
    if args.json:
        _dump_json(doc, args.json)
    if args.csv:
        if spectrum:
            _write_csv(_spectrum_rows(family, params), SPECTRUM_COLUMNS, args.csv)
        else:
            _write_csv(rows, CSV_COLUMNS, args.csv)
    return code


def _spectrum_rows(family, params) -> list:
    import numpy as np

    from .fourier import SPECTRUM_TOL, FourierError, dft_family

    out = []
    for e in params.freq_grid().eps:
        try:
            sp = dft_family(family, float(e), tol=SPECTRUM_TOL)
        except FourierError:
            continue
        xi = float(abs(sp.xi_grid[int(np.argmax(np.abs(sp.values)))]))
        out.append({"eps": float(e), "peak_xi": xi, "peak_xi_times_eps": xi * float(e),
                    "npts": sp.npts, "L": sp.L, "accuracy": sp.accuracy})
    return out


def cmd_classify(args) -> int:
    from .suite import DEFAULT_TESTS, TESTS

    names = _split_tests(args.tests, list(TESTS)) if args.tests else list(DEFAULT_TESTS)
    return _run(args, names, spectrum=False)


def cmd_spectrum(args) -> int:
    from .suite import SPECTRUM_TESTS

    names = _split_tests(args.tests, list(SPECTRUM_TESTS)) if args.tests else list(SPECTRUM_TESTS)
    return _run(args, names, spectrum=True)


def cmd_verify(args) -> int:
    from .verify import run_battery

    rows = run_battery(quick=args.quick, stream=sys.stdout)
    if args.json:
        _dump_json({"version": __version__, "quick": args.quick,
                    "criteria": [r.as_dict(timing=False) for r in rows]}, args.json)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_MISMATCH


def cmd_parse(args) -> int:
    from .family import parse_family_file

    try:
        if args.family:
            with open(args.family, encoding="utf-8") as fh:
                fam = parse_family_file(fh.read(), args.family)
            expr, dim = fam.expr, fam.dim
        elif args.expr:
            expr = dsl.parse(args.expr, args.dim)
            dim = args.dim or max(1, dsl.max_coordinate(expr))
        else:
            raise UsageError("give an expression or --family PATH")
        if args.diff:
            for var in args.diff.split(","):
                var = var.strip()
                if var not in {f"x{i}" for i in range(1, dim + 1)}:
                    raise UsageError(f"cannot differentiate in {var!r} with dim = {dim}")
                expr = dsl.differentiate(expr, var)
    except dsl.DSLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: cannot read {args.family}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    print(dsl.to_text(expr))
    return EXIT_OK


def _family_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", metavar="NAME", help="a shipped family")
    src.add_argument("--family", metavar="PATH", help="a family file (dim/name/u lines)")
    p.add_argument("--tests", metavar="LIST", help="comma-separated test names")
    p.add_argument("--eps-grid", metavar="SPEC", help="geom:<start>:<stop>:<count>")
    p.add_argument("--m-max", type=int, dest="m_max")
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--n-max", type=float, dest="n_max")
    p.add_argument("--json", metavar="PATH", help="write the JSON report ('-' for stdout)")
    p.add_argument("--csv", metavar="PATH", help="write sweep rows as CSV ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gfa", description="Classify eps-families of smooth functions.")
    parser.add_argument("--version", action="version", version=f"gfa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("classify", help="run growth and regularity tests")
    _family_args(p)
    p.set_defaults(fn=cmd_classify)
    p = sub.add_parser("spectrum", help="run Fourier-side tests")
    _family_args(p)
    p.set_defaults(fn=cmd_spectrum)
    p = sub.add_parser("verify", help="run the acceptance battery")
    p.add_argument("--quick", action="store_true", help="fast subset")
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(fn=cmd_verify)
    p = sub.add_parser("parse", help="check and print a DSL expression")
    p.add_argument("expr", nargs="?")
    p.add_argument("--family", metavar="PATH")
    p.add_argument("--dim", type=int)
    p.add_argument("--diff", metavar="VARS", help="differentiate, e.g. x1,x1")
    p.set_defaults(fn=cmd_parse)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"gfa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
