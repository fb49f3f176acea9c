"""Model domains x_1^w_1 + ... + x_d^w_d <= 1, stretches and membership."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from latstretch.errors import InvalidArgument

# Accept user factors this far from det 1, then renormalize.
ACCEPT_DET_TOL = 1e-9
DET_TOL = 1e-12


@dataclass(frozen=True)
class Exponents:
    """Even exponents (w_1, ..., w_d) defining the domain."""

    omegas: tuple[int, ...]
    omega_max: int = field(init=False, repr=False)

    def __post_init__(self):
        omegas = tuple(self.omegas)
        if len(omegas) < 2:
            raise InvalidArgument(f"need at least 2 exponents, got {len(omegas)}")
        for w in omegas:
            if isinstance(w, bool) or int(w) != w:
                raise InvalidArgument(f"exponent {w} is not an integer")
            if int(w) % 2 != 0:
                raise InvalidArgument(f"exponent {w} is not even")
            if int(w) < 2:
                raise InvalidArgument(f"exponent {w} is smaller than 2")
        omegas = tuple(int(w) for w in omegas)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "omega_max", max(omegas))

    @property
    def d(self) -> int:
        return len(self.omegas)

    @property
    def in_theorem_scope(self) -> bool:
        return self.d >= 3

    @classmethod
    def parse(cls, text: str) -> "Exponents":
        try:
            values = [int(p) for p in text.replace(" ", "").split(",") if p]
        except ValueError as exc:
            raise InvalidArgument(f"cannot parse exponents {text!r}") from exc
        return cls(tuple(values))


@dataclass(frozen=True)
class StretchFactors:
    """Volume-preserving diagonal stretch diag(a_1, ..., a_d)."""

    a: tuple[float, ...]
    a_star: float = field(init=False)

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        if any(not math.isfinite(x) or x <= 0 for x in a):
            raise InvalidArgument(f"stretch factors must be positive and finite: {a}")
        prod = math.prod(a)
        if abs(prod - 1.0) > DET_TOL:
            raise InvalidArgument(f"stretch factors multiply to {prod!r}, not 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "a_star", a_star(a))

    @property
    def d(self) -> int:
        return len(self.a)

    @classmethod
    def identity(cls, d: int) -> "StretchFactors":
        return cls((1.0,) * d)

    @classmethod
    def normalized(cls, values: Sequence[float], tol: float = ACCEPT_DET_TOL) -> "StretchFactors":
        """Build from user values whose product is within ``tol`` of 1.

        Each factor is divided by the d-th root of the product.
        """
        vals = [float(v) for v in values]
        if any(not math.isfinite(v) or v <= 0 for v in vals):
            raise InvalidArgument(f"stretch factors must be positive and finite: {vals}")
        prod = math.prod(vals)
        if abs(prod - 1.0) > tol:
            raise InvalidArgument(f"stretch factors multiply to {prod!r}; |prod - 1| exceeds {tol}")
        return cls.from_log([math.log(v) for v in vals])

    @classmethod
    def from_log(cls, u: Sequence[float]) -> "StretchFactors":
        """Factors exp(u_j - mean(u)); the mean shift forces det 1."""
        u = np.asarray(u, dtype=float)
        a = np.exp(u - u.mean())
        # one correction pass pulls the float product to within a few ulp of 1
        a = a / math.prod(a.tolist()) ** (1.0 / len(a))
        return cls(tuple(a.tolist()))


class Membership(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    UNCERTAIN = "boundary-uncertain"


def a_star(a: Sequence[float] | StretchFactors) -> float:
    if isinstance(a, StretchFactors):
        a = a.a
    return max(1.0 / x for x in a)


def float_error_factor(omega_max: int, d: int) -> float:
    """Relative error bound for a float sum of d terms (k/s)^w, w <= omega_max.

    Each term carries 3 roundings on its base (scale product, scale rounding
    from t, division) raised to w, one for pow, and the sum adds d more.
    Doubled for slack.
    """
    return 2.0 * (3 * omega_max + d + 4) * 2.0 ** -53


def exact_scales(A: StretchFactors, t) -> tuple[Fraction, ...]:
    t = Fraction(t)
    return tuple(Fraction(a) * t for a in A.a)


def exact_sum(omegas: Sequence[int], scales: Sequence[Fraction], k: Sequence[int]) -> Fraction:
    return sum((Fraction(int(kj)) / s) ** w for kj, s, w in zip(k, scales, omegas))


def classify(total: np.ndarray | float, tol_factor: float):
    """Tri-state code per float sum: -1 inside, 1 outside, 0 uncertain."""
    total = np.asarray(total, dtype=float)
    err = total * tol_factor
    return np.where(total + err < 1.0, -1, np.where(total - err > 1.0, 1, 0))


def membership(exponents: Exponents, A: StretchFactors, t, k: Sequence[int], exact_fallback: bool = True) -> Membership:
    """Certified test of sum_j (k_j / (a_j t))^w_j <= 1.

    The float sum is bracketed by a rigorous relative error bound. When the
    bracket contains 1 the test is redone in exact rational arithmetic
    (floats are dyadic rationals), unless ``exact_fallback`` is False.
    """
    if len(k) != exponents.d or A.d != exponents.d:
        raise InvalidArgument(f"dimension mismatch: k has {len(k)} entries, domain has {exponents.d}")
    if not t > 0:
        raise InvalidArgument(f"t must be positive, got {t}")
    tf = float(t)
    total = 0.0
    for kj, aj, w in zip(k, A.a, exponents.omegas):
        total += (abs(kj) / (aj * tf)) ** w
    code = int(classify(total, float_error_factor(exponents.omega_max, exponents.d)))
    if code < 0:
        return Membership.INSIDE
    if code > 0:
        return Membership.OUTSIDE
    if not exact_fallback:
        return Membership.UNCERTAIN
    inside = exact_sum(exponents.omegas, exact_scales(A, t), k) <= 1
    return Membership.INSIDE if inside else Membership.OUTSIDE


def balanced_factors(exponents: Exponents) -> StretchFactors:
    """b_j = |D_j| / (prod_k |D_k|)^(1/d): every coordinate section gets equal area."""
    from latstretch.measure import measure_table

    sections = np.asarray(measure_table(exponents).sections)
    logs = np.log(sections)
    return StretchFactors.from_log(logs)


def gamma_rate(exponents: Exponents) -> Fraction:
    d = exponents.d
    if d < 3:
        warnings.warn(f"d = {d} is outside the range d >= 3 covered by the convergence theorems", stacklevel=2)
    return min(Fraction(d - 1, 2 * exponents.omega_max), Fraction(d - 1, 2 * d + 2))
