"""Closed-form measures of the domain and of its coordinate sections."""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from latstretch.domain import Exponents
from latstretch.errors import InvalidArgument


@dataclass(frozen=True)
class MeasureTable:
    volume_full: float
    octant_volume: float
    sections: tuple[float, ...]
    # |D_{j,k}|; diagonal entries are 0.0 and unused. Empty for d = 2.
    double_sections: tuple[tuple[float, ...], ...]


def _prefactor(omegas: Sequence[int]) -> int:
    # sum_l prod_{k != l} w_k, exact
    return sum(math.prod(omegas[:l] + omegas[l + 1:]) for l in range(len(omegas)))


def octant_volume(omegas: Sequence[int]) -> float:
    """Volume of {x >= 0 : sum x_l^w_l <= 1}.

    Equals prod Gamma(1/w_l) / Gamma(sum 1/w_l) divided by the integer
    sum_l prod_{k != l} w_k; the Gamma part is evaluated in log space.
    """
    omegas = tuple(int(w) for w in omegas)
    if not omegas:
        raise InvalidArgument("octant_volume needs at least one exponent")
    for w in omegas:
        if w < 2 or w % 2:
            raise InvalidArgument(f"exponent {w} is not an even integer >= 2")
    inv = [1.0 / w for w in omegas]
    log_gamma = sum(math.lgamma(x) for x in inv) - math.lgamma(math.fsum(inv))
    return math.exp(log_gamma - math.log(_prefactor(omegas)))


@functools.lru_cache(maxsize=256)
def _table(omegas: tuple[int, ...]) -> MeasureTable:
    d = len(omegas)
    octant = octant_volume(omegas)
    sections = tuple(2 ** (d - 1) * octant_volume(omegas[:j] + omegas[j + 1:]) for j in range(d))
    double: tuple[tuple[float, ...], ...] = ()
    if d >= 3:
        rows = [[0.0] * d for _ in range(d)]
        for j, k in itertools.combinations(range(d), 2):
            rest = tuple(w for i, w in enumerate(omegas) if i not in (j, k))
            rows[j][k] = rows[k][j] = 2 ** (d - 2) * octant_volume(rest)
        double = tuple(tuple(r) for r in rows)
    return MeasureTable(2**d * octant, octant, sections, double)


def measure_table(exponents: Exponents) -> MeasureTable:
    return _table(exponents.omegas)


def parallel_section(exponents: Exponents, j: int, x: float) -> float:
    """(d-1)-measure of the slice of the domain at x_j = x."""
    if not 0 <= j < exponents.d:
        raise InvalidArgument(f"axis {j} out of range for d = {exponents.d}")
    if x < 0:
        raise InvalidArgument(f"x must be nonnegative, got {x}")
    if x >= 1:
        return 0.0
    omegas = exponents.omegas
    rest = omegas[:j] + omegas[j + 1:]
    power = sum(1.0 / w for w in rest)
    return (1.0 - x ** omegas[j]) ** power * measure_table(exponents).sections[j]
