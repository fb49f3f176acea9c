"""Command line interface: ``latstretch <command> --omega 2,2,4 ...``.

Exit codes: 0 success, 1 validation error, 2 computational guard,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from latstretch.asymptotics import predict
from latstretch.counting import RegionKind, brute_force_count, count
from latstretch.domain import Exponents, StretchFactors, balanced_factors, gamma_rate
from latstretch.errors import GuardExceeded, InvalidArgument
from latstretch.measure import measure_table
from latstretch.optimizer import Objective, OptimizationResult, SearchConfig, optimize
from latstretch.sweep import default_t_grid, emit, fit_json, fit_rate, run_sweep
from latstretch import verify as suites

EXIT_OK, EXIT_INVALID, EXIT_GUARD, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("latstretch")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _out(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    sys.stdout.flush()


def _factors(args, exponents: Exponents) -> StretchFactors:
    if not args.a:
        return StretchFactors.identity(exponents.d)
    try:
        values = [float(x) for x in args.a.split(",")]
    except ValueError as exc:
        raise InvalidArgument(f"cannot parse factors {args.a!r}") from exc
    if len(values) != exponents.d:
        raise InvalidArgument(f"{len(values)} factors given for {exponents.d} exponents")
    if any(not v > 0 for v in values):
        raise InvalidArgument(f"factors must be positive: {values}")
    prod = math.prod(values)
    if abs(prod - 1) > 1e-6:
        print(f"warning: factors multiply to {prod:.9g}; rescaled to determinant 1", file=sys.stderr)
    return StretchFactors.normalized(values, tol=math.inf)


def _search_config(args) -> SearchConfig:
    base = SearchConfig()
    return SearchConfig(
        levels=args.levels or base.levels,
        grid_per_axis=args.grid or base.grid_per_axis,
        initial_radius=args.radius or base.initial_radius,
        keep_top=args.keep_top or base.keep_top,
        expand_limit=base.expand_limit if args.expand_limit is None else args.expand_limit,
    )


def _scope_note(exponents: Exponents) -> list[str]:
    return [] if exponents.in_theorem_scope else ["d = 2 is outside theorem scope (d >= 3)"]


def result_json(res: OptimizationResult) -> dict:
    return {
        "t": res.t,
        "objective": res.objective.value,
        "best": list(res.best.a),
        "value": res.value,
        "ties": [list(a.a) for a in res.ties],
        "tie_count": len(res.ties),
        "resolution": res.resolution,
        "deviations": list(res.deviations),
        "max_deviation": res.max_deviation,
        "expansions": res.expansions,
        "boundary_hit": res.boundary_hit,
    }


def cmd_volume(args) -> int:
    exponents = Exponents.parse(args.omega)
    table = measure_table(exponents)
    _out({
        "omega": list(exponents.omegas),
        "volume_full": table.volume_full,
        "octant_volume": table.octant_volume,
        "sections": list(table.sections),
        "double_sections": [list(r) for r in table.double_sections],
        "balanced_factors": list(balanced_factors(exponents).a),
        "notes": _scope_note(exponents),
    })
    return EXIT_OK


def cmd_count(args) -> int:
    exponents = Exponents.parse(args.omega)
    A = _factors(args, exponents)
    region = RegionKind(args.region)
    res = count(exponents, A, args.t, region, args.threads)
    pred = predict(exponents, A, args.t, region)
    doc = {
        "region": region.value,
        "t": args.t,
        "factors": list(A.a),
        "count": res.count,
        "prediction": {"leading": pred.leading, "second": pred.second, "value": pred.value},
        "remainder": res.count - pred.value,
        "error_budget": pred.error_budget,
        "boundary_escalations": res.boundary_escalations,
        "notes": _scope_note(exponents),
    }
    if args.oracle:
        oracle = brute_force_count(exponents, A, args.t, region)
        doc["oracle_count"] = oracle.count
        doc["oracle_match"] = oracle.count == res.count
    _out(doc)
    return EXIT_OK if not args.oracle or doc["oracle_match"] else EXIT_VERIFY


def cmd_predict(args) -> int:
    exponents = Exponents.parse(args.omega)
    A = _factors(args, exponents)
    pred = predict(exponents, A, args.t, RegionKind(args.region))
    _out({
        "region": pred.region.value,
        "t": args.t,
        "factors": list(A.a),
        "leading": pred.leading,
        "second": pred.second,
        "value": pred.value,
        "error_budget": pred.error_budget,
        "notes": _scope_note(exponents),
    })
    return EXIT_OK


def cmd_optimize(args) -> int:
    exponents = Exponents.parse(args.omega)
    res = optimize(exponents, args.t, Objective(args.objective), _search_config(args), args.threads)
    _out(result_json(res))
    return EXIT_OK


def cmd_sweep(args) -> int:
    exponents = Exponents.parse(args.omega)
    grid = default_t_grid(args.points, args.t_min, args.t_max)
    records = run_sweep(exponents, grid, Objective(args.objective), _search_config(args), args.threads)
    fit = fit_rate(records, gamma_rate(exponents))
    stem = Path(args.out)
    written = []
    for fmt in args.format or ["csv", "json", "svg"]:
        path = stem.with_suffix("." + fmt)
        emit(records, fit, fmt, path)
        written.append(str(path))
    summary = fit_json(fit)
    summary["written"] = written
    summary["notes"] = _scope_note(exponents)
    _out(summary)
    return EXIT_OK


def cmd_verify(args) -> int:
    exponents = Exponents.parse(args.omega)
    ts = suites.t_values(1.0, args.t_max)
    results = list(suites.oracle_and_symmetry(exponents, ts, args.seed, args.threads))
    results.append(suites.two_term_bounds(exponents, threads=args.threads))
    results.append(suites.balanced_lemma(args.lemma_samples, args.seed))
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  cases={r.cases} failures={len(r.failures)}")
        for f in r.failures[:5]:
            print(f"    {f}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latstretch", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, t=True, a=True):
        p.add_argument("--omega", required=True, help="comma separated even exponents, e.g. 2,2,4")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        if t:
            p.add_argument("--t", type=float, required=True)
        if a:
            p.add_argument("--a", help="comma separated stretch factors (rescaled to det 1)")

    def search(p):
        p.add_argument("--objective", choices=[o.value for o in Objective], default="max-positive")
        p.add_argument("--levels", type=int)
        p.add_argument("--grid", type=int)
        p.add_argument("--radius", type=float)
        p.add_argument("--keep-top", type=int)
        p.add_argument("--expand-limit", type=int)

    p = sub.add_parser("volume", help="closed-form measures and balanced factors")
    common(p, t=False, a=False)
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("count", help="exact lattice point count")
    common(p)
    p.add_argument("--region", choices=[r.value for r in RegionKind], default="full")
    p.add_argument("--oracle", action="store_true", help="cross-check with brute force enumeration")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("predict", help="two-term asymptotic prediction")
    common(p)
    p.add_argument("--region", choices=[r.value for r in RegionKind], default="full")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("optimize", help="best stretch found by grid refinement")
    common(p, a=False)
    search(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="optimize over a log-spaced t grid and fit the decay rate")
    common(p, t=False, a=False)
    search(p)
    p.add_argument("--t-min", type=float, default=20.0)
    p.add_argument("--t-max", type=float, default=300.0)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--out", default="sweep", help="output path stem; one file per format")
    p.add_argument("--format", action="append", choices=["csv", "json", "svg"])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the property suites")
    common(p, t=False, a=False)
    p.add_argument("--t-max", type=float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lemma-samples", type=int, default=10_000, help="samples per (d, eps) pair")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except GuardExceeded as exc:
        print(f"error: {exc}; try a smaller t", file=sys.stderr)
        return EXIT_GUARD
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
