"""Two-term predictions, error envelopes, and empirical bound checks."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from latstretch.counting import RegionKind, count
from latstretch.domain import Exponents, StretchFactors
from latstretch.errors import InvalidArgument
from latstretch.measure import measure_table


@dataclass(frozen=True)
class Prediction:
    leading: float
    second: float
    error_budget: float
    region: RegionKind

    @property
    def value(self) -> float:
        return self.leading + self.second


def envelope_exponents(exponents: Exponents) -> tuple[float, float]:
    """Powers of t in the two envelope terms, using w = max exponent."""
    d, w = exponents.d, exponents.omega_max
    return (d - 1) * (1 - 1 / w), d - 2 + 2 / (d + 1)


def error_budget(exponents: Exponents, A: StretchFactors, t: float) -> float:
    """Envelope a*^(1+(d-1)/w) t^((d-1)(1-1/w)) + a*^(2-2/(d+1)) t^(d-2+2/(d+1)), unit constant."""
    d, w = exponents.d, exponents.omega_max
    p1, p2 = envelope_exponents(exponents)
    s = A.a_star
    return s ** (1 + (d - 1) / w) * t**p1 + s ** (2 - 2 / (d + 1)) * t**p2


def predict(exponents: Exponents, A: StretchFactors, t: float, region: RegionKind) -> Prediction:
    region = RegionKind(region)
    t = float(t)
    if t / A.a_star < 1:
        warnings.warn(f"t / a* = {t / A.a_star:.3g} < 1: outside the range of the asymptotic formulas", stacklevel=2)
    d = exponents.d
    table = measure_table(exponents)
    bulk = table.volume_full * t**d
    boundary = sum(s / a for s, a in zip(table.sections, A.a)) * t ** (d - 1)
    if region is RegionKind.FULL:
        leading, second = bulk, 0.0
    elif region is RegionKind.POSITIVE:
        leading, second = bulk / 2**d, -boundary / 2**d
    elif region is RegionKind.NONNEGATIVE:
        leading, second = bulk / 2**d, boundary / 2**d
    else:
        leading, second = boundary, 0.0
    return Prediction(leading, second, error_budget(exponents, A, t), region)


def remainder(exponents: Exponents, A: StretchFactors, t: float, region: RegionKind, threads: int = 1) -> float:
    """Exact count minus the two-term prediction."""
    n = count(exponents, A, t, region, threads).count
    return n - predict(exponents, A, t, region).value


def _require_scale(A: StretchFactors, t: float) -> None:
    if float(t) / A.a_star < 1:
        raise InvalidArgument(f"need t / a* >= 1, got t = {t}, a* = {A.a_star}")


def _half_volume_term(exponents: Exponents, t: float) -> float:
    return measure_table(exponents).volume_full * float(t) ** exponents.d / 2**exponents.d


def check_two_term_upper(exponents: Exponents, A: StretchFactors, t: float, c: float, threads: int = 1) -> bool:
    """#(positive points) <= 2^-d |D| t^d - c a* t^(d-1)."""
    _require_scale(A, t)
    n = count(exponents, A, t, RegionKind.POSITIVE, threads).count
    return n <= _half_volume_term(exponents, t) - c * A.a_star * float(t) ** (exponents.d - 1)


def check_two_term_lower(exponents: Exponents, A: StretchFactors, t: float, c: float, threads: int = 1) -> bool:
    """#(nonnegative points) >= 2^-d |D| t^d + c a* t^(d-1)."""
    _require_scale(A, t)
    n = count(exponents, A, t, RegionKind.NONNEGATIVE, threads).count
    return n >= _half_volume_term(exponents, t) + c * A.a_star * float(t) ** (exponents.d - 1)


def estimate_c(
    exponents: Exponents,
    samples: Iterable[tuple[StretchFactors, float]],
    threads: int = 1,
) -> tuple[float, float]:
    """Largest constants (c_upper, c_lower) consistent with the two-term bounds on the samples."""
    samples = list(samples)
    if not samples:
        raise InvalidArgument("estimate_c needs at least one (A, t) sample")
    c_upper = c_lower = math.inf
    for A, t in samples:
        _require_scale(A, t)
        half = _half_volume_term(exponents, t)
        scale = A.a_star * float(t) ** (exponents.d - 1)
        pos = count(exponents, A, t, RegionKind.POSITIVE, threads).count
        nonneg = count(exponents, A, t, RegionKind.NONNEGATIVE, threads).count
        c_upper = min(c_upper, (half - pos) / scale)
        c_lower = min(c_lower, (nonneg - half) / scale)
    return c_upper, c_lower


# float slack on the lemma hypotheses
_LEMMA_SLACK = 1e-12


def check_balanced_lemma(s: Sequence[float], epsilon: float, C: float) -> bool:
    """max_j |s_j - 1| <= C sqrt(eps) for s with prod s = 1 and sum s <= d + eps."""
    s = np.asarray(s, dtype=float)
    if not 0 < epsilon < 1:
        raise InvalidArgument(f"epsilon must lie in (0, 1), got {epsilon}")
    if np.any(s <= 0):
        raise InvalidArgument("all s_j must be positive")
    if abs(math.prod(s.tolist()) - 1.0) > 1e-12:
        raise InvalidArgument(f"prod s_j = {math.prod(s.tolist())!r} is not 1")
    if s.sum() > len(s) + epsilon + _LEMMA_SLACK:
        raise InvalidArgument(f"sum s_j = {s.sum()!r} exceeds d + eps = {len(s) + epsilon}")
    return bool(np.max(np.abs(s - 1.0)) <= C * math.sqrt(epsilon))


def sample_lemma_inputs(d: int, epsilon: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n points s with prod s = 1 and sum s <= d + eps.

    Directions are uniform on the sum-zero sphere in log space; the radius
    is bisected to the boundary sum s = d + eps, then half of the samples
    sit on that boundary and the rest are spread inside.
    """
    v = rng.standard_normal((n, d))
    v -= v.mean(axis=1, keepdims=True)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    lo = np.zeros(n)
    hi = np.full(n, 1.0)
    while np.any(np.exp(hi[:, None] * v).sum(axis=1) <= d + epsilon):
        hi *= 2
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        ok = np.exp(mid[:, None] * v).sum(axis=1) <= d + epsilon
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    r_max = lo * (1 - 1e-9)
    on_edge = rng.random(n) < 0.5
    r = np.where(on_edge, r_max, r_max * rng.random(n) ** (1.0 / (d - 1)))
    u = r[:, None] * v
    u -= u.mean(axis=1, keepdims=True)
    return np.exp(u)
