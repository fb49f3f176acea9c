"""Property suites shared by the ``verify`` command and the acceptance tests."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from latstretch.asymptotics import (
    check_balanced_lemma,
    check_two_term_lower,
    check_two_term_upper,
    estimate_c,
    sample_lemma_inputs,
)
from latstretch.counting import RegionKind, brute_force_all, count
from latstretch.domain import Exponents, StretchFactors, balanced_factors


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.cases > 0 and not self.failures


def random_factors(d: int, n: int, rng: np.random.Generator, a_star_max: float = 2.0) -> list[StretchFactors]:
    """n det-1 stretches with a* <= a_star_max, by rejection in log space."""
    out = []
    span = math.log(a_star_max)
    while len(out) < n:
        u = rng.uniform(-span, span, d)
        A = StretchFactors.from_log(u)
        if A.a_star <= a_star_max:
            out.append(A)
    return out


def t_values(t_min: float, t_max: float, step: float = 0.5) -> list[float]:
    n = int(round((t_max - t_min) / step))
    return [t_min + i * step for i in range(n + 1)]


def counting_cases(exponents: Exponents, ts: Sequence[float], seed: int, n_random: int = 5):
    rng = np.random.default_rng(seed)
    stretches = [StretchFactors.identity(exponents.d), balanced_factors(exponents)]
    stretches += random_factors(exponents.d, n_random, rng)
    return [(A, t) for A in stretches for t in ts]


def oracle_and_symmetry(
    exponents: Exponents, ts: Sequence[float], seed: int, threads: int = 1, n_random: int = 5
) -> tuple[SuiteResult, SuiteResult]:
    """Fast count vs brute force on all regions, and full = 2^d positive + union."""
    oracle = SuiteResult("oracle_equivalence")
    symmetry = SuiteResult("symmetry_identity")
    for A, t in counting_cases(exponents, ts, seed, n_random):
        expected, _ = brute_force_all(exponents, A, t)
        got = {r: count(exponents, A, t, r, threads).count for r in RegionKind}
        for r in RegionKind:
            oracle.cases += 1
            if got[r] != expected[r]:
                oracle.failures.append((exponents.omegas, A.a, t, r.value, got[r], expected[r]))
        symmetry.cases += 1
        lhs = got[RegionKind.FULL]
        rhs = 2**exponents.d * got[RegionKind.POSITIVE] + got[RegionKind.HYPERPLANE_UNION]
        if lhs != rhs:
            symmetry.failures.append((exponents.omegas, A.a, t, lhs, rhs))
        oracle.details.setdefault("counts", []).append([t, list(A.a), [got[r] for r in RegionKind]])
    return oracle, symmetry


def two_term_bounds(
    exponents: Exponents, ts: Sequence[float] = (5, 10, 20, 50, 100), threads: int = 1
) -> SuiteResult:
    """estimate_c on {identity, balanced} x ts, then both bounds at half the estimates."""
    suite = SuiteResult("two_term_bounds")
    samples = [(A, float(t)) for A in (StretchFactors.identity(exponents.d), balanced_factors(exponents))
               for t in ts if float(t) / A.a_star >= 1]
    c_upper, c_lower = estimate_c(exponents, samples, threads)
    suite.details.update(c_upper=c_upper, c_lower=c_lower)
    suite.cases += 2
    if not c_upper > 0:
        suite.failures.append(("c_upper", c_upper))
    if not c_lower > 0:
        suite.failures.append(("c_lower", c_lower))
    for A, t in samples:
        suite.cases += 2
        if not check_two_term_upper(exponents, A, t, c_upper / 2, threads):
            suite.failures.append(("upper", A.a, t))
        if not check_two_term_lower(exponents, A, t, c_lower / 2, threads):
            suite.failures.append(("lower", A.a, t))
    return suite


def balanced_lemma(
    samples: int, seed: int, dims: Sequence[int] = (3, 4), epsilons: Sequence[float] = (1e-2, 1e-3, 1e-4),
    C: float = 10.0,
) -> SuiteResult:
    """``samples`` hypothesis-satisfying points per (d, eps); max |s_j - 1| <= C sqrt(eps)."""
    suite = SuiteResult("balanced_lemma")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for d in dims:
        for eps in epsilons:
            for s in sample_lemma_inputs(d, eps, samples, rng):
                suite.cases += 1
                worst = max(worst, float(np.max(np.abs(s - 1.0))) / math.sqrt(eps))
                if not check_balanced_lemma(s, eps, C):
                    suite.failures.append((d, eps, s.tolist()))
    suite.details["worst_ratio"] = worst
    return suite
