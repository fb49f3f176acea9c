"""Exact lattice point counts in stretched, dilated domains tAD.

The fast path enumerates the first d-1 coordinates (nonnegative orthant,
with symmetry weights for the full count), prunes prefixes whose partial
sum already exceeds 1, and closes the last coordinate from
floor(a_d t (1 - s)^(1/w_d)) with a certified +-1 correction. Float sums
near the boundary are settled in exact rational arithmetic.
"""
from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numba
import numpy as np

from latstretch.domain import (
    Exponents,
    StretchFactors,
    classify,
    exact_scales,
    exact_sum,
    float_error_factor,
)
from latstretch.errors import GuardExceeded, InvalidArgument

BRUTE_FORCE_GUARD = 10**8


class RegionKind(enum.Enum):
    FULL = "full"
    POSITIVE = "positive"
    NONNEGATIVE = "nonnegative"
    HYPERPLANE_UNION = "hyperplane_union"


@dataclass(frozen=True)
class LatticeCount:
    region: RegionKind
    t: float
    A: StretchFactors
    count: int
    boundary_escalations: int = 0


@numba.njit(cache=True, nogil=True)
def _odometer(terms, bounds, lo, first_start, first_stop, wl, sl, bound_l, tol, region, dirty):
    """Walk prefixes (k_1..k_p) >= lo with pruning and close the last axis.

    Returns (count over certified prefixes, number of dirty prefixes). A
    prefix is dirty when some test on its last axis is not certified; its
    coordinates go to ``dirty`` (rows past its capacity are dropped, the
    caller reruns with more room).
    """
    p = terms.shape[0]
    idx = np.empty(p, dtype=np.int64)
    partial = np.zeros(p + 1)
    total = 0
    ndirty = 0
    level = 0
    idx[0] = first_start
    while level >= 0:
        limit = first_stop if level == 0 else bounds[level] + 1
        k = idx[level]
        s = partial[level] + terms[level, k] if k < limit else 2.0
        if k >= limit or s * (1.0 - tol) > 1.0:
            # terms grow with k, so the rest of this level is outside too
            level -= 1
            if level >= 0:
                idx[level] += 1
            continue
        if level < p - 1:
            partial[level + 1] = s
            level += 1
            idx[level] = lo
            continue
        beta = sl * max(1.0 - s, 0.0) ** (1.0 / wl)
        m = min(np.int64(np.floor(beta)), bound_l)
        dirty_here = False
        while m + 1 <= bound_l:
            tot = s + ((m + 1) / sl) ** wl
            if tot + tot * tol < 1.0:
                m += 1
            elif tot - tot * tol > 1.0:
                break
            else:
                dirty_here = True
                break
        while not dirty_here and m >= 0:
            tot = s + (m / sl) ** wl
            if tot + tot * tol < 1.0:
                break
            elif tot - tot * tol > 1.0:
                m -= 1
            else:
                dirty_here = True
        if dirty_here:
            if ndirty < dirty.shape[0]:
                dirty[ndirty, :] = idx
            ndirty += 1
        else:
            weight = 1
            if region == 0:
                for j in range(p):
                    if idx[j] > 0:
                        weight *= 2
                total += weight * (2 * m + 1 if m >= 0 else 0)
            elif region == 1:
                total += max(m, 0)
            else:
                total += m + 1
        idx[level] += 1
    return total, ndirty


_REGION_CODE = {"full": 0, "positive": 1, "nonnegative": 2}


class _Kernel:
    """Count for one region on a box of axes with given exact scales.

    Works in any dimension m >= 1; region is FULL, POSITIVE or NONNEGATIVE.
    """

    def __init__(self, omegas: Sequence[int], scales: Sequence[Fraction], region: RegionKind):
        # largest scale becomes the analytically closed last axis
        order = sorted(range(len(omegas)), key=lambda j: (scales[j], j))
        self.omegas = [int(omegas[j]) for j in order]
        self.scales = [scales[j] for j in order]
        self.scales_f = [float(s) for s in self.scales]
        self.bounds = [math.floor(s) for s in self.scales]
        self.region = region
        self.lo = 1 if region is RegionKind.POSITIVE else 0
        self.tol = float_error_factor(max(self.omegas), len(self.omegas))
        self.escalations = 0

    def first_axis_range(self) -> range:
        return range(self.lo, self.bounds[0] + 1)

    def _contribution(self, prefix: Sequence[int], m: int) -> int:
        if self.region is RegionKind.FULL:
            return (2 * m + 1 if m >= 0 else 0) * 2 ** sum(1 for k in prefix if k > 0)
        if self.region is RegionKind.NONNEGATIVE:
            return m + 1
        return max(m, 0)

    def _resolve_exact(self, prefix: Sequence[int]) -> int:
        """Largest last coordinate m >= 0 with the point inside (-1 if none), exactly."""
        s = float(sum((k / sf) ** w for k, sf, w in zip(prefix, self.scales_f, self.omegas)))
        bound = self.bounds[-1]
        m = min(math.floor(self.scales_f[-1] * max(1.0 - s, 0.0) ** (1.0 / self.omegas[-1])), bound)

        def inside(kd):
            self.escalations += 1
            return exact_sum(self.omegas, self.scales, list(prefix) + [kd]) <= 1

        while m + 1 <= bound and inside(m + 1):
            m += 1
        while m >= 0 and not inside(m):
            m -= 1
        return m

    def count(self, first: range | None = None) -> int:
        m = len(self.omegas)
        if any(b < self.lo for b in self.bounds):
            return 0
        if m == 1:
            # |k| <= scale exactly
            return self._contribution((), self.bounds[0])
        first = first if first is not None else self.first_axis_range()
        p = m - 1
        width = max(self.bounds[:p]) + 1
        terms = np.full((p, width), np.inf)
        for j in range(p):
            k = np.arange(self.bounds[j] + 1)
            terms[j, : len(k)] = (k / self.scales_f[j]) ** self.omegas[j]
        bounds = np.asarray(self.bounds[:p], dtype=np.int64)
        capacity = 1024
        while True:
            dirty = np.zeros((capacity, p), dtype=np.int64)
            total, ndirty = _odometer(
                terms, bounds, self.lo, first.start, first.stop,
                self.omegas[-1], self.scales_f[-1], self.bounds[-1], self.tol,
                _REGION_CODE[self.region.value], dirty,
            )
            if ndirty <= capacity:
                break
            capacity = ndirty
        for row in dirty[:ndirty].tolist():
            total += self._contribution(row, self._resolve_exact(row))
        return int(total)


def _chunks(r: range, n: int) -> list[range]:
    if len(r) == 0:
        return []
    n = max(1, min(n, len(r)))
    step = -(-len(r) // n)
    return [range(r.start + i, min(r.start + i + step, r.stop)) for i in range(0, len(r), step)]


def _count_box(omegas: Sequence[int], scales: Sequence[Fraction], region: RegionKind, threads: int = 1) -> tuple[int, int]:
    """(count, escalations) for FULL / POSITIVE / NONNEGATIVE in dimension len(omegas)."""
    if len(omegas) == 0:
        return 1, 0  # the origin
    kernel = _Kernel(omegas, scales, region)
    if threads <= 1 or len(omegas) == 1:
        return kernel.count(), kernel.escalations
    # exact integer partial counts: the sum is independent of scheduling
    parts = _chunks(kernel.first_axis_range(), threads)
    kernels = [_Kernel(omegas, scales, region) for _ in parts]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        counts = list(pool.map(lambda kp: kp[0].count(kp[1]), zip(kernels, parts)))
    return sum(counts), sum(k.escalations for k in kernels)


def _union_count(omegas: Sequence[int], scales: Sequence[Fraction], threads: int = 1) -> tuple[int, int]:
    """Points with at least one zero coordinate, by inclusion-exclusion over axis subsets."""
    d = len(omegas)
    total = escalations = 0
    for r in range(1, d + 1):
        for zeroed in itertools.combinations(range(d), r):
            rest = [j for j in range(d) if j not in zeroed]
            c, e = _count_box([omegas[j] for j in rest], [scales[j] for j in rest], RegionKind.FULL, threads)
            total += c if r % 2 else -c
            escalations += e
    return total, escalations


def _check(exponents: Exponents, A: StretchFactors, t) -> None:
    if A.d != exponents.d:
        raise InvalidArgument(f"dimension mismatch: {A.d} factors for {exponents.d} exponents")
    if not t > 0:
        raise InvalidArgument(f"t must be positive, got {t}")


def count(exponents: Exponents, A: StretchFactors, t, region: RegionKind, threads: int = 1) -> LatticeCount:
    """Exact number of lattice points of the given region kind in tAD."""
    _check(exponents, A, t)
    region = RegionKind(region)
    scales = exact_scales(A, t)
    if region is RegionKind.HYPERPLANE_UNION:
        n, esc = _union_count(exponents.omegas, scales, threads)
    else:
        n, esc = _count_box(exponents.omegas, scales, region, threads)
    return LatticeCount(region, t, A, n, esc)


def brute_force_size(exponents: Exponents, A: StretchFactors, t) -> int:
    return math.prod(2 * math.floor(s) + 1 for s in exact_scales(A, t))


def brute_force_all(exponents: Exponents, A: StretchFactors, t) -> tuple[dict[RegionKind, int], int]:
    """Enumerate the whole bounding box once; counts for all four regions."""
    _check(exponents, A, t)
    size = brute_force_size(exponents, A, t)
    if size > BRUTE_FORCE_GUARD:
        raise GuardExceeded(f"bounding box has {size} points, above the guard {BRUTE_FORCE_GUARD}", size)
    d = exponents.d
    scales = exact_scales(A, t)
    bounds = [math.floor(s) for s in scales]
    axes = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    tol = float_error_factor(exponents.omega_max, d)
    tf = float(t)
    terms = [(np.abs(k) / (a * tf)) ** w for k, a, w in zip(axes, A.a, exponents.omegas)]

    rest_shape = [len(k) for k in axes[1:]]
    rest_sum = np.zeros(rest_shape)
    for j, tj in enumerate(terms[1:]):
        shape = [1] * (d - 1)
        shape[j] = len(tj)
        rest_sum = rest_sum + tj.reshape(shape)
    rest_pos = np.ones(rest_shape, dtype=bool)
    rest_nonneg = np.ones(rest_shape, dtype=bool)
    rest_zero = np.zeros(rest_shape, dtype=bool)
    for j, kj in enumerate(axes[1:]):
        shape = [1] * (d - 1)
        shape[j] = len(kj)
        kj = kj.reshape(shape)
        rest_pos = rest_pos & (kj > 0)
        rest_nonneg = rest_nonneg & (kj >= 0)
        rest_zero = rest_zero | (kj == 0)

    counts = dict.fromkeys(RegionKind, 0)
    escalations = 0
    for k0, t0 in zip(axes[0].tolist(), terms[0].tolist()):
        total = t0 + rest_sum
        code = classify(total, tol)
        inside = code < 0
        for pos in np.argwhere(code == 0):
            escalations += 1
            point = [k0] + [int(axes[j + 1][p]) for j, p in enumerate(pos)]
            inside[tuple(pos)] = exact_sum(exponents.omegas, scales, point) <= 1
        counts[RegionKind.FULL] += int(inside.sum())
        if k0 > 0:
            counts[RegionKind.POSITIVE] += int((inside & rest_pos).sum())
        if k0 >= 0:
            counts[RegionKind.NONNEGATIVE] += int((inside & rest_nonneg).sum())
        if k0 == 0:
            counts[RegionKind.HYPERPLANE_UNION] += int(inside.sum())
        else:
            counts[RegionKind.HYPERPLANE_UNION] += int((inside & rest_zero).sum())
    return counts, escalations


def brute_force_count(exponents: Exponents, A: StretchFactors, t, region: RegionKind) -> LatticeCount:
    """Oracle: test every point of the bounding box with certified membership."""
    counts, esc = brute_force_all(exponents, A, t)
    region = RegionKind(region)
    return LatticeCount(region, t, A, counts[region], esc)


def symmetry_decomposition_check(exponents: Exponents, A: StretchFactors, t, threads: int = 1) -> bool:
    """full == 2^d * positive + hyperplane_union, exactly."""
    full = count(exponents, A, t, RegionKind.FULL, threads).count
    pos = count(exponents, A, t, RegionKind.POSITIVE, threads).count
    union = count(exponents, A, t, RegionKind.HYPERPLANE_UNION, threads).count
    return full == 2**exponents.d * pos + union
