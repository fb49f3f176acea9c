"""Convergence sweeps over t, rate fits, and CSV/JSON/SVG output."""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from latstretch.asymptotics import predict
from latstretch.counting import RegionKind
from latstretch.domain import Exponents, StretchFactors
from latstretch.errors import InvalidArgument
from latstretch.optimizer import Objective, OptimizationResult, SearchConfig, optimize

log = logging.getLogger(__name__)

# |observed - predicted| beyond this many error budgets is logged
ENVELOPE_FACTOR = 3.0


@dataclass(frozen=True)
class SweepRecord:
    t: float
    result: OptimizationResult
    max_deviation: float
    count_observed: int
    count_predicted: float
    error_budget: float


@dataclass(frozen=True)
class RateFit:
    slope: float | None
    intercept: float | None
    r_squared: float | None
    points_used: int
    gamma_theoretical: Fraction
    censored: int = 0

    @property
    def saturated(self) -> bool:
        return self.slope is None


def default_t_grid(points: int = 25, t_min: float = 20.0, t_max: float = 300.0) -> list[float]:
    return np.geomspace(t_min, t_max, points).tolist()


def _record(exponents: Exponents, t: float, objective: Objective, config: SearchConfig, workers: int) -> SweepRecord:
    result = optimize(exponents, t, objective, config, workers)
    region = RegionKind.POSITIVE if objective is Objective.MAXIMIZE_POSITIVE else RegionKind.NONNEGATIVE
    pred = predict(exponents, result.best, t, region)
    rec = SweepRecord(
        t=t,
        result=result,
        max_deviation=result.max_deviation,
        count_observed=result.value,
        count_predicted=pred.value,
        error_budget=pred.error_budget,
    )
    if abs(rec.count_observed - rec.count_predicted) > ENVELOPE_FACTOR * rec.error_budget:
        log.warning("t=%g: |count - prediction| = %.4g exceeds %g error budgets",
                    t, abs(rec.count_observed - rec.count_predicted), ENVELOPE_FACTOR)
    return rec


def _record_args(args):
    return _record(*args)


def run_sweep(
    exponents: Exponents,
    t_grid: Sequence[float],
    objective: Objective = Objective.MAXIMIZE_POSITIVE,
    config: SearchConfig | None = None,
    workers: int = 1,
) -> list[SweepRecord]:
    """One optimization per t; records are independent, so process order does not matter."""
    t_grid = [float(t) for t in t_grid]
    if not t_grid:
        raise InvalidArgument("t_grid is empty")
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise InvalidArgument("t_grid must be strictly increasing")
    if t_grid[0] < 1:
        raise InvalidArgument("t values must be >= 1")
    objective = Objective(objective)
    config = config or SearchConfig()
    if workers <= 1 or len(t_grid) == 1:
        return [_record(exponents, t, objective, config, 1) for t in t_grid]
    jobs = [(exponents, t, objective, config, 1) for t in t_grid]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_record_args, jobs))


def fit_rate(records: Sequence[SweepRecord], gamma: Fraction) -> RateFit:
    """Least squares of log max_deviation on log t, censoring deviations at the resolution floor."""
    used = [r for r in records if r.max_deviation > r.result.resolution]
    censored = len(records) - len(used)
    if len(used) < 2:
        return RateFit(None, None, None, len(used), Fraction(gamma), censored)
    x = np.log([r.t for r in used])
    y = np.log([r.max_deviation for r in used])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0), len(used), Fraction(gamma), censored)


# --- serialization -------------------------------------------------------


def csv_header(d: int) -> list[str]:
    return (["t"] + [f"a_{j}" for j in range(1, d + 1)] + [f"dev_{j}" for j in range(1, d + 1)]
            + ["max_dev", "count", "predicted", "resolution"])


def _record_json(r: SweepRecord) -> dict:
    res = r.result
    return {
        "t": r.t,
        "objective": res.objective.value,
        "a": list(res.best.a),
        "deviations": list(res.deviations),
        "max_deviation": r.max_deviation,
        "count_observed": r.count_observed,
        "count_predicted": r.count_predicted,
        "error_budget": r.error_budget,
        "resolution": res.resolution,
        "tie_count": len(res.ties),
        "expansions": res.expansions,
    }


def fit_json(fit: RateFit) -> dict:
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "points_used": fit.points_used,
        "censored": fit.censored,
        "saturated": fit.saturated,
        "gamma_theoretical": str(fit.gamma_theoretical),
        "gamma_theoretical_value": float(fit.gamma_theoretical),
    }


def _svg(records: Sequence[SweepRecord], fit: RateFit) -> str:
    used = [r for r in records if r.max_deviation > r.result.resolution]
    width, height, pad = 640, 480, 60
    xs = [math.log(r.t) for r in used] or [math.log(r.t) for r in records]
    ys = [math.log(r.max_deviation) for r in used] or [0.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    # headroom for the lines
    y0, y1 = y0 - 0.5 * (y1 - y0), y1 + 0.5 * (y1 - y0)

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<path d="M{pad},{pad} V{height - pad} H{width - pad}" stroke="black" fill="none"/>',
        f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">log t</text>',
        f'<text x="15" y="{height / 2}" transform="rotate(-90 15 {height / 2})" text-anchor="middle">log max deviation</text>',
    ]
    for x, y in zip(xs, ys) if used else []:
        out.append(f'<circle cx="{px(x):.3f}" cy="{py(y):.3f}" r="4" fill="steelblue"/>')
    if not fit.saturated:
        f0, f1 = fit.slope * x0 + fit.intercept, fit.slope * x1 + fit.intercept
        out.append(f'<line class="fit" x1="{px(x0):.3f}" y1="{py(f0):.3f}" x2="{px(x1):.3f}" y2="{py(f1):.3f}" '
                   f'stroke="steelblue"/>')
    # reference slope -gamma through the centroid of the plotted points
    g = float(fit.gamma_theoretical)
    xm, ym = sum(xs) / len(xs), sum(ys) / len(ys)
    r0, r1 = ym - g * (x0 - xm), ym - g * (x1 - xm)
    out.append(f'<line class="reference" x1="{px(x0):.3f}" y1="{py(r0):.3f}" x2="{px(x1):.3f}" y2="{py(r1):.3f}" '
               f'stroke="firebrick" stroke-dasharray="6 4"/>')
    out.append(f'<text x="{width - pad}" y="{pad - 20}" text-anchor="end">fit slope '
               f'{"saturated" if fit.saturated else f"{fit.slope:.3f}"}, reference -{fit.gamma_theoretical}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit(records: Sequence[SweepRecord], fit: RateFit, format: str, destination) -> None:
    """Write records and fit as csv, json or svg_scatter to ``destination``."""
    path = Path(destination)
    fmt = {"svg": "svg_scatter"}.get(format, format)
    try:
        if fmt == "csv":
            d = records[0].result.best.d if records else 0
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(csv_header(d))
                for r in records:
                    w.writerow([repr(r.t), *map(repr, r.result.best.a), *map(repr, r.result.deviations),
                                repr(r.max_deviation), r.count_observed, repr(r.count_predicted),
                                repr(r.result.resolution)])
        elif fmt == "json":
            doc = {"records": [_record_json(r) for r in records], "fit": fit_json(fit)}
            path.write_text(json.dumps(doc, indent=2) + "\n")
        elif fmt == "svg_scatter":
            path.write_text(_svg(records, fit))
        else:
            raise InvalidArgument(f"unknown format {format!r}")
    except OSError as exc:
        raise OSError(f"cannot write {fmt} output to {path}: {exc}") from exc


def load_json(source) -> tuple[list[dict], dict]:
    doc = json.loads(Path(source).read_text())
    return doc["records"], doc["fit"]
