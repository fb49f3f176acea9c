import itertools
import math

import pytest

from latstretch.domain import Exponents, StretchFactors, balanced_factors
from latstretch.errors import InvalidArgument
from latstretch.optimizer import Objective, SearchConfig, evaluate_objective, optimize

BALL = Exponents((2, 2, 2))
SMALL = SearchConfig(levels=3, grid_per_axis=9, initial_radius=0.5, keep_top=3, expand_limit=2)


def test_evaluate_objective_examples():
    I = StretchFactors.identity(3)
    assert evaluate_objective(BALL, 2, Objective.MAXIMIZE_POSITIVE, I) == 1
    assert evaluate_objective(BALL, 2, Objective.MINIMIZE_NONNEGATIVE, I) == 11


def test_evaluate_objective_relabeling():
    E = Exponents((2, 4, 6))
    A = StretchFactors.from_log([0.3, -0.1, -0.2])
    for perm in itertools.permutations(range(3)):
        E2 = Exponents([E.omegas[j] for j in perm])
        A2 = StretchFactors(tuple(A.a[j] for j in perm))
        for obj in Objective:
            assert evaluate_objective(E2, 9.5, obj, A2) == evaluate_objective(E, 9.5, obj, A)


def test_ball_t2_dominates_identity():
    res = optimize(BALL, 2, Objective.MAXIMIZE_POSITIVE, SMALL)
    assert res.value >= 1


@pytest.mark.parametrize("omegas, t", [((2, 2, 4), 12.0), ((4, 4, 4), 9.0), ((2, 4), 15.0)])
def test_result_contract(omegas, t):
    E = Exponents(omegas)
    for obj in Objective:
        res = optimize(E, t, obj, SMALL)
        ref = [evaluate_objective(E, t, obj, A) for A in (balanced_factors(E), StretchFactors.identity(E.d))]
        if obj is Objective.MAXIMIZE_POSITIVE:
            assert res.value >= max(ref)
        else:
            assert res.value <= min(ref)
        assert res.best in res.ties
        assert abs(math.prod(res.best.a) - 1) <= 1e-12
        assert all(evaluate_objective(E, t, obj, A) == res.value for A in res.ties)
        assert res.deviations == pytest.approx([x - y for x, y in zip(res.best.a, balanced_factors(E).a)])
        assert res.resolution == pytest.approx(2 * SMALL.initial_radius * 2**res.expansions
                                               / (SMALL.grid_per_axis - 1) / 2 ** (SMALL.levels - 1))


def test_deterministic():
    E = Exponents((2, 2, 4))
    assert optimize(E, 14.0, config=SMALL) == optimize(E, 14.0, config=SMALL)
    assert optimize(E, 14.0, config=SMALL, workers=3) == optimize(E, 14.0, config=SMALL)


def test_symmetric_ties_permutation_closed():
    res = optimize(Exponents((4, 4, 4)), 11.0, config=SMALL)
    for tie in res.ties:
        for perm in itertools.permutations(tie.a):
            A = StretchFactors(tuple(perm))
            assert evaluate_objective(Exponents((4, 4, 4)), 11.0, Objective.MAXIMIZE_POSITIVE, A) == res.value


def test_boundary_expansion():
    cfg = SearchConfig(levels=2, grid_per_axis=5, initial_radius=0.01, keep_top=2, expand_limit=3)
    res = optimize(BALL, 1.2, Objective.MINIMIZE_NONNEGATIVE, cfg)
    assert 0 <= res.expansions <= 3
    assert res.expansions > 0
    assert res.value <= evaluate_objective(BALL, 1.2, Objective.MINIMIZE_NONNEGATIVE, StretchFactors.identity(3))


def test_invalid():
    with pytest.raises(InvalidArgument):
        optimize(BALL, 0.5)
    with pytest.raises(InvalidArgument):
        SearchConfig(grid_per_axis=4)
    with pytest.raises(InvalidArgument):
        SearchConfig(levels=0)
