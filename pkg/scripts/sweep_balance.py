"""Optimal-stretch sweep: deviation from the balanced factors against t.

    python scripts/sweep_balance.py --omega 2,2,4 --out results/sweep_224
"""
import argparse
import logging
import os
from pathlib import Path

from latstretch.domain import Exponents, gamma_rate
from latstretch.optimizer import Objective, SearchConfig
from latstretch.sweep import default_t_grid, emit, fit_rate, run_sweep


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--omega", default="2,2,4")
    p.add_argument("--t-min", type=float, default=20.0)
    p.add_argument("--t-max", type=float, default=300.0)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--objective", default="max-positive", choices=[o.value for o in Objective])
    p.add_argument("--keep-top", type=int, default=SearchConfig.keep_top)
    p.add_argument("--levels", type=int, default=SearchConfig.levels)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default="results/sweep")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO)

    exponents = Exponents.parse(args.omega)
    config = SearchConfig(levels=args.levels, keep_top=args.keep_top)
    records = run_sweep(exponents, default_t_grid(args.points, args.t_min, args.t_max),
                        Objective(args.objective), config, args.workers)
    fit = fit_rate(records, gamma_rate(exponents))

    stem = Path(args.out)
    stem.parent.mkdir(parents=True, exist_ok=True)
    for fmt in ("csv", "json", "svg"):
        emit(records, fit, fmt, stem.with_suffix("." + fmt))

    print(f"{'t':>9} {'max_dev':>9} {'count':>12} {'resolution':>11}")
    for r in records:
        print(f"{r.t:9.2f} {r.max_deviation:9.5f} {r.count_observed:12d} {r.result.resolution:11.2e}")
    slope = "saturated" if fit.saturated else f"{fit.slope:.4f} (r^2 {fit.r_squared:.3f})"
    print(f"fitted slope {slope}, reference -{fit.gamma_theoretical}, censored {fit.censored}")


if __name__ == "__main__":
    main()
