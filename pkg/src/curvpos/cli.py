"""Command-line entry point.

    curvpos certify SPEC.json [--json OUT] [--tolerance T] [--seed S] [--timings]
    curvpos integrate --r R --A 1,2 --B 1,2 [--mc N --seed S]
    curvpos l2metric --r R --k K
    curvpos suite {identities,examples,counterexamples,all} [--seed S] [--json OUT]

Exit codes: 0 all requested certifications positive, 1 some not positive,
2 only an unconverged heuristic stands in the way, 3 usage or spec error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .expr import SpecError, load_spec
from .quadrature import l2_constant, l2_induced_metric, monomial_integral_exact, monomial_integral_mc
from .report import EXIT_OK, EXIT_USAGE, Report, certify
from .suites import SUITES, run_suite


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _index_list(text: str) -> tuple[int, ...]:
    if text.strip() == "":
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="curvpos", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"curvpos {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("certify", help="certify positivity of a bundle spec")
    c.add_argument("spec", type=Path)
    c.add_argument("--json", type=Path, dest="json_out")
    c.add_argument("--tolerance", type=float)
    c.add_argument("--seed", type=int)
    c.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")

    i = sub.add_parser("integrate", help="monomial integral over P^{r-1}")
    i.add_argument("--r", type=int, required=True)
    i.add_argument("--A", type=_index_list, required=True)
    i.add_argument("--B", type=_index_list, required=True)
    i.add_argument("--mc", type=int, metavar="N", help="also run a Monte Carlo estimate with N samples")
    i.add_argument("--seed", type=int, default=0)

    m = sub.add_parser("l2metric", help="exact L2 metric on the degree-k monomial basis")
    m.add_argument("--r", type=int, required=True)
    m.add_argument("--k", type=int, required=True)

    s = sub.add_parser("suite", help="run a check battery")
    s.add_argument("name", choices=sorted(SUITES))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--json", type=Path, dest="json_out")
    s.add_argument("--timings", action="store_true")
    return p


def _write_report(report: Report, path):
    if path is not None:
        Path(path).write_text(report.to_json(), encoding="utf-8")


def _cmd_certify(args) -> int:
    try:
        spec = load_spec(args.spec)
    except OSError as exc:
        raise UsageError(f"cannot read spec: {exc}") from None
    except SpecError as exc:
        raise UsageError(f"invalid spec: {exc}") from None
    overrides = {}
    if args.tolerance is not None:
        if args.tolerance < 0:
            raise UsageError("--tolerance must be non-negative")
        overrides["tolerance"] = args.tolerance
    if args.seed is not None:
        overrides["seed"] = args.seed
    spec = dataclasses.replace(spec, **overrides)
    report = certify(spec, timings=args.timings)
    print(f"bundle: base_dim={report.subject['base_dim']} rank={report.subject['rank']}")
    for v in report.verdicts:
        print(
            f"{v['test']:<12} {v['classification']:<14} margin={v['margin']:+.12e} "
            f"tol={v['tolerance']:.1e} method={v['method']}"
        )
    _write_report(report, args.json_out)
    return report.exit_code


def _cmd_integrate(args) -> int:
    if len(args.A) != len(args.B):
        raise UsageError("--A and --B must have the same length")
    try:
        exact = monomial_integral_exact(args.A, args.B, args.r)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"exact {exact} = {float(exact):.15g}")
    if args.mc is not None:
        if args.mc < 1000:
            raise UsageError("--mc needs at least 1000 samples")
        est = monomial_integral_mc(args.A, args.B, args.r, args.mc, args.seed)
        print(
            f"mc    {est.value.real:.15g}{est.value.imag:+.3g}j stderr={est.stderr:.3g} "
            f"samples={est.samples} seed={est.seed}"
        )
    return EXIT_OK


def _fmt(x: Fraction) -> str:
    return str(x)


def _cmd_l2metric(args) -> int:
    if args.r < 1 or args.k < 0:
        raise UsageError("need --r >= 1 and --k >= 0")
    g = l2_induced_metric(args.r, args.k)
    print(f"constant (r+k)^(r-1)/(r+k-1)! = {l2_constant(args.r, args.k)}")
    labels = ["(" + ",".join(map(str, A)) + ")" for A in g.basis]
    width = max(max(len(lbl) for lbl in labels), max(len(_fmt(x)) for row in g.entries for x in row))
    print(" " * (width + 1) + " ".join(lbl.rjust(width) for lbl in labels))
    for lbl, row in zip(labels, g.entries):
        print(lbl.rjust(width) + " " + " ".join(_fmt(x).rjust(width) for x in row))
    return EXIT_OK


def _cmd_suite(args) -> int:
    report = run_suite(args.name, args.seed, timings=args.timings)
    for c in report.checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}: {c['detail']}")
    _write_report(report, args.json_out)
    return report.exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "certify": _cmd_certify,
        "integrate": _cmd_integrate,
        "l2metric": _cmd_l2metric,
        "suite": _cmd_suite,
    }[args.command]
    try:
        return handler(args)
    except UsageError as exc:
        print(f"curvpos: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
