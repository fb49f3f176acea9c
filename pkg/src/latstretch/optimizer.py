"""Grid search for optimal volume-preserving stretches.

Counts are step functions of the stretch, so the search is a nested
refinement grid in log coordinates u (a_j = exp(u_j), u_d = -sum u_j),
centred on the balanced factors. Results are "best found at resolution";
the full tie set at the final level is reported.
"""
from __future__ import annotations

import enum
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from latstretch.counting import RegionKind, count
from latstretch.domain import Exponents, StretchFactors, balanced_factors
from latstretch.errors import InvalidArgument

log = logging.getLogger(__name__)


class Objective(enum.Enum):
    MAXIMIZE_POSITIVE = "max-positive"
    MINIMIZE_NONNEGATIVE = "min-nonnegative"


@dataclass(frozen=True)
class SearchConfig:
    levels: int = 7
    grid_per_axis: int = 17
    initial_radius: float = 0.5
    keep_top: int = 5
    expand_limit: int = 3

    def __post_init__(self):
        if self.levels < 1:
            raise InvalidArgument("levels must be >= 1")
        if self.grid_per_axis < 3 or self.grid_per_axis % 2 == 0:
            raise InvalidArgument("grid_per_axis must be odd and >= 3")
        if not self.initial_radius > 0:
            raise InvalidArgument("initial_radius must be positive")
        if self.keep_top < 1 or self.expand_limit < 0:
            raise InvalidArgument("keep_top must be >= 1 and expand_limit >= 0")


@dataclass(frozen=True)
class OptimizationResult:
    t: float
    objective: Objective
    best: StretchFactors
    value: int
    ties: tuple[StretchFactors, ...]
    resolution: float
    deviations: tuple[float, ...]
    expansions: int = 0
    boundary_hit: bool = False
    evaluations: int = 0

    @property
    def max_deviation(self) -> float:
        return max(abs(x) for x in self.deviations)


def evaluate_objective(exponents: Exponents, t: float, objective: Objective, A: StretchFactors, threads: int = 1) -> int:
    region = (
        RegionKind.POSITIVE if Objective(objective) is Objective.MAXIMIZE_POSITIVE else RegionKind.NONNEGATIVE
    )
    return count(exponents, A, t, region, threads).count


def _factors(u: tuple[float, ...]) -> StretchFactors:
    return StretchFactors.from_log(list(u) + [-math.fsum(u)])


def _key(u) -> tuple[float, ...]:
    return tuple(round(x, 12) + 0.0 for x in u)


class _Search:
    def __init__(self, exponents: Exponents, t: float, objective: Objective, config: SearchConfig, workers: int):
        self.exponents = exponents
        self.t = t
        self.objective = objective
        self.config = config
        self.workers = workers
        self.values: dict[tuple[float, ...], int] = {}

    def rank(self, u: tuple[float, ...]):
        v = self.values[u]
        return (-v if self.objective is Objective.MAXIMIZE_POSITIVE else v, u)

    def grid(self, center, radius: float) -> list[tuple[float, ...]]:
        half = self.config.grid_per_axis // 2
        h = radius / half
        steps = range(-half, half + 1)
        return [_key(c + i * h for c, i in zip(center, idx))
                for idx in itertools.product(steps, repeat=len(center))]

    def evaluate(self, points) -> None:
        todo = sorted({p for p in points if p not in self.values})
        fn = lambda u: evaluate_objective(self.exponents, self.t, self.objective, _factors(u))
        if self.workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                vals = list(pool.map(fn, todo))
        else:
            vals = [fn(u) for u in todo]
        self.values.update(zip(todo, vals))


def optimize(
    exponents: Exponents,
    t: float,
    objective: Objective = Objective.MAXIMIZE_POSITIVE,
    config: SearchConfig | None = None,
    workers: int = 1,
) -> OptimizationResult:
    objective = Objective(objective)
    config = config or SearchConfig()
    if not t >= 1:
        raise InvalidArgument(f"t must be >= 1, got {t}")
    balanced = balanced_factors(exponents)
    center = _key(np.log(balanced.a[:-1]))
    search = _Search(exponents, t, objective, config, workers)
    half = config.grid_per_axis // 2

    radius = config.initial_radius
    expansions = 0
    # the identity is always a candidate, so the result dominates it
    identity = _key([0.0] * (exponents.d - 1))
    while True:
        level_points = search.grid(center, radius) + [identity]
        search.evaluate(level_points)
        best = min(level_points, key=search.rank)
        if best == identity:
            break
        edge = radius - 0.5 * radius / half
        if any(abs(b - c) >= edge for b, c in zip(best, center)) and expansions < config.expand_limit:
            radius *= 2
            expansions += 1
            log.info("t=%g: optimum on search boundary, radius -> %g", t, radius)
            continue
        break
    outer = radius

    r = radius
    for _ in range(1, config.levels):
        r /= 2
        top = sorted(set(level_points), key=search.rank)[: config.keep_top]
        level_points = sorted({p for c in top for p in search.grid(c, r)})
        search.evaluate(level_points)

    final = sorted(set(level_points), key=search.rank)
    best = final[0]
    value = search.values[best]
    ties = [u for u in final if search.values[u] == value]
    boundary_hit = any(abs(b - c) >= outer - 0.5 * outer / half for b, c in zip(best, center))
    if boundary_hit:
        log.warning("t=%g: best stretch lies on the expanded search boundary (radius %g)", t, outer)
    best_a = _factors(best)
    return OptimizationResult(
        t=t,
        objective=objective,
        best=best_a,
        value=value,
        ties=tuple(_factors(u) for u in ties),
        resolution=r / half,
        deviations=tuple(x - y for x, y in zip(best_a.a, balanced.a)),
        expansions=expansions,
        boundary_hit=boundary_hit,
        evaluations=len(search.values),
    )
