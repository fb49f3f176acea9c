"""Acceptance gate: eight criteria at their stated tolerances.

Each criterion is a function of the thread count returning (passed, summary,
canonical output). Criterion 8 reruns everything at N threads and compares
the canonical outputs bitwise. Summary lines appear in the terminal report.
"""
import functools
import json
import math
import os
import time

import numpy as np
import pytest

from latstretch import verify
from latstretch.asymptotics import predict, remainder
from latstretch.counting import RegionKind
from latstretch.domain import Exponents, StretchFactors, gamma_rate
from latstretch.measure import octant_volume
from latstretch.optimizer import Objective
from latstretch.sweep import default_t_grid, fit_rate, run_sweep

from oracles import monte_carlo_octant, quadrature_octant

OMEGA_SETS = [(2, 2), (2, 4), (2, 2, 2), (2, 2, 4), (4, 4, 4), (2, 2, 2, 2)]
SEED = 2024
N_THREADS = max(4, os.cpu_count() or 1)


def _report(report, number, name, passed, summary, elapsed):
    line = f"criterion {number} {name:<22} {'PASS' if passed else 'FAIL'}  {summary}  ({elapsed:.1f}s)"
    report.append(line)
    print(line)


@functools.lru_cache(maxsize=None)
def counting_criteria(threads):
    """Criteria 1 and 2 share the same case grid."""
    ts = verify.t_values(1.0, 8.0)
    oracle_cases = oracle_fail = sym_cases = sym_fail = 0
    counts = []
    start = time.perf_counter()
    for omegas in OMEGA_SETS:
        oracle, symmetry = verify.oracle_and_symmetry(Exponents(omegas), ts, SEED, threads)
        oracle_cases += oracle.cases
        oracle_fail += len(oracle.failures)
        sym_cases += symmetry.cases
        sym_fail += len(symmetry.failures)
        counts.append([list(omegas), oracle.details["counts"]])
    elapsed = time.perf_counter() - start
    return {
        "oracle": (oracle_cases, oracle_fail),
        "symmetry": (sym_cases, sym_fail),
        "counts": json.dumps(counts),
        "elapsed": elapsed,
    }


@functools.lru_cache(maxsize=None)
def measure_criterion(threads):
    # measures are single threaded; recomputed anyway so criterion 8 covers them
    ball = octant_volume((2, 2, 2))
    ball_ok = abs(ball - math.pi / 6) <= 1e-9 * math.pi / 6
    rows = []
    ok = ball_ok
    for i, omegas in enumerate(OMEGA_SETS):
        v = octant_volume(omegas)
        quad = quadrature_octant(omegas)
        mc, se = monte_carlo_octant(omegas, 10**7, SEED + i)
        quad_ok = abs(v - quad) <= 1e-6 * abs(quad)
        mc_ok = abs(v - mc) <= 3 * se
        ok = ok and quad_ok and mc_ok
        rows.append((omegas, v, quad, mc, se, quad_ok, mc_ok))
    worst_quad = max(abs(r[1] - r[2]) / r[2] for r in rows)
    worst_se = max(abs(r[1] - r[3]) / r[4] for r in rows)
    summary = f"ball rel err {abs(ball - math.pi / 6) / (math.pi / 6):.1e}, max quad rel {worst_quad:.1e}, max MC {worst_se:.2f} SE"
    return ok, summary, json.dumps([[list(r[0]), r[1], r[2], r[3], r[4]] for r in rows])


@functools.lru_cache(maxsize=None)
def bounds_criterion(threads):
    suite = verify.two_term_bounds(Exponents((2, 2, 4)), ts=(5, 10, 20, 50, 100), threads=threads)
    c_up, c_lo = suite.details["c_upper"], suite.details["c_lower"]
    summary = f"c_upper={c_up:.4f} c_lower={c_lo:.4f} cases={suite.cases} failures={len(suite.failures)}"
    return suite.passed, summary, json.dumps([c_up, c_lo, suite.failures])


@functools.lru_cache(maxsize=None)
def remainder_criterion(threads):
    exponents = Exponents((4, 4, 4))
    identity = StretchFactors.identity(3)
    ts = np.geomspace(10, 200, 20)
    rem = np.array([remainder(exponents, identity, float(t), RegionKind.FULL, threads) for t in ts])
    budget = np.array([predict(exponents, identity, float(t), RegionKind.FULL).error_budget for t in ts])
    slope = float(np.polyfit(np.log(ts), np.log(np.abs(rem)), 1)[0])
    ratio = float(np.max(np.abs(rem) / budget))
    ok = slope <= 1.7 and math.isfinite(ratio)
    return ok, f"slope={slope:.4f} (<= 1.7), max |remainder|/budget={ratio:.3f}", json.dumps([rem.tolist(), slope, ratio])


def _sweep(omegas, threads):
    exponents = Exponents(omegas)
    records = run_sweep(exponents, default_t_grid(25, 20.0, 300.0), Objective.MAXIMIZE_POSITIVE, workers=threads)
    return records, fit_rate(records, gamma_rate(exponents))


@functools.lru_cache(maxsize=None)
def sweep_criterion(threads):
    rec224, fit224 = _sweep((2, 2, 4), threads)
    devs = [r.max_deviation for r in rec224]
    first, last = float(np.median(devs[:5])), float(np.median(devs[-5:]))
    ok_a = fit224.slope is not None and fit224.slope <= -0.05
    ok_b = last <= first
    rec444, _ = _sweep((4, 4, 4), threads)
    late = [(r.t, r.max_deviation) for r in rec444 if r.t >= 100]
    worst_t, worst = max(late, key=lambda p: p[1])
    ok_c = worst <= 0.1
    slope = "saturated" if fit224.slope is None else f"{fit224.slope:.4f}"
    summary = (f"(a) slope={slope} [{'ok' if ok_a else 'FAIL'}] "
               f"(b) median last5={last:.4f} first5={first:.4f} [{'ok' if ok_b else 'FAIL'}] "
               f"(c) (4,4,4) max dev t>=100 = {worst:.4f} at t={worst_t:.1f} [{'ok' if ok_c else 'FAIL'}]")
    out = json.dumps([[(r.t, list(r.result.best.a), r.result.value) for r in rec] for rec in (rec224, rec444)])
    return (ok_a, ok_b, ok_c), summary, out


@functools.lru_cache(maxsize=None)
def lemma_criterion(threads):
    suite = verify.balanced_lemma(100_000, SEED, dims=(3, 4), epsilons=(1e-2, 1e-3, 1e-4), C=10.0)
    summary = f"samples={suite.cases} failures={len(suite.failures)} worst |s-1|/sqrt(eps)={suite.details['worst_ratio']:.4f}"
    return suite.passed, summary, json.dumps([suite.cases, len(suite.failures), suite.details["worst_ratio"]])


def _timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - start


def test_criterion_1_oracle_equivalence(acceptance_report):
    res, elapsed = _timed(counting_criteria, 1)
    cases, failures = res["oracle"]
    ok = cases >= 2000 and failures == 0 and res["elapsed"] < 120
    _report(acceptance_report, 1, "oracle equivalence", ok, f"cases={cases} mismatches={failures}", res["elapsed"])
    assert cases >= 2000
    assert failures == 0
    assert res["elapsed"] < 120


def test_criterion_2_symmetry_identity(acceptance_report):
    res, elapsed = _timed(counting_criteria, 1)
    cases, failures = res["symmetry"]
    _report(acceptance_report, 2, "symmetry identity", failures == 0 and cases > 0,
            f"cases={cases} failures={failures}", elapsed)
    assert cases > 0 and failures == 0


def test_criterion_3_measures(acceptance_report):
    (ok, summary, _), elapsed = _timed(measure_criterion, 1)
    _report(acceptance_report, 3, "measures", ok, summary, elapsed)
    assert ok


def test_criterion_4_two_term_bounds(acceptance_report):
    (ok, summary, _), elapsed = _timed(bounds_criterion, 1)
    _report(acceptance_report, 4, "two-term bounds", ok and elapsed < 60, summary, elapsed)
    assert ok
    assert elapsed < 60


def test_criterion_5_remainder_envelope(acceptance_report):
    (ok, summary, _), elapsed = _timed(remainder_criterion, 1)
    _report(acceptance_report, 5, "remainder envelope", ok, summary, elapsed)
    assert ok


@pytest.mark.slow
def test_criterion_6_convergence_to_balance(acceptance_report):
    # the target is 15 minutes with parallelism; a single sweep per exponent set at N workers
    ((ok_a, ok_b, ok_c), summary, _), elapsed = _timed(sweep_criterion, N_THREADS)
    _report(acceptance_report, 6, "convergence to balance", ok_a and ok_b and ok_c, summary, elapsed)
    assert ok_a, summary
    assert ok_b, summary
    assert ok_c, summary


def test_criterion_7_balanced_lemma(acceptance_report):
    (ok, summary, _), elapsed = _timed(lemma_criterion, 1)
    _report(acceptance_report, 7, "balanced lemma", ok, summary, elapsed)
    assert ok


@pytest.mark.slow
def test_criterion_8_determinism(acceptance_report):
    start = time.perf_counter()
    pairs = {
        "counting": (counting_criteria(1)["counts"], counting_criteria(N_THREADS)["counts"]),
        "measures": (measure_criterion(1)[2], measure_criterion(N_THREADS)[2]),
        "bounds": (bounds_criterion(1)[2], bounds_criterion(N_THREADS)[2]),
        "remainder": (remainder_criterion(1)[2], remainder_criterion(N_THREADS)[2]),
        "sweep": (sweep_criterion(1)[2], sweep_criterion(N_THREADS)[2]),
        "lemma": (lemma_criterion(1)[2], lemma_criterion(N_THREADS)[2]),
    }
    differing = [name for name, (a, b) in pairs.items() if a != b]
    ok = not differing
    summary = f"threads 1 vs {N_THREADS}: " + ("all outputs identical" if ok else f"differ in {differing}")
    _report(acceptance_report, 8, "determinism", ok, summary, time.perf_counter() - start)
    assert ok, differing
