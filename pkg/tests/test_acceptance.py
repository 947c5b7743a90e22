"""Acceptance suite: one test per shipping criterion, one PASS line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; the whole suite is also part of the default pytest run.
"""

import math

import numpy as np

from permex import (
    EnsembleSpec,
    analytic_solution,
    argmax_profile,
    ensemble_average_bruteforce,
    estimate_moments,
    expectation_perm,
    expectation_product,
    single_rate,
    solve_stationary,
    subpermanent_bruteforce,
    subpermanent_profile,
)
from permex.model import SquareMatrix

GRID_DENSITIES = [i / 10 for i in range(1, 10)]
GRID_R = [2, 3, 4, 5, 6]


def report(num, name, passed, detail):
    line = f"criterion {num} ({name}): {'PASS' if passed else 'FAIL'} [{detail}]"
    print(line)
    assert passed, line


def test_criterion_1_oracle_equality_single():
    checked = 0
    worst = None
    for n in range(1, 6):
        for r in range(1, 4):
            for m in range(n + 1):
                got = expectation_perm(n, r, m).value
                want = ensemble_average_bruteforce(n, r, m, 0).value
                if got != want:
                    worst = (n, r, m, got, want)
                checked += 1
    report(1, "oracle equality, single", worst is None,
           f"{checked} cases exactly equal" if worst is None else f"first mismatch {worst}")


def test_criterion_2_oracle_equality_product():
    cases = [(n, r) for n in range(1, 5) for r in range(1, 4)] + [(5, 2)]
    checked = 0
    worst = None
    for n, r in cases:
        for m in range(n + 1):
            for m2 in range(m, n + 1):
                got = expectation_product(n, r, m, m2).value
                want = ensemble_average_bruteforce(n, r, m, m2).value
                if got != want:
                    worst = (n, r, m, m2, got, want)
                checked += 1
    report(2, "oracle equality, product", worst is None,
           f"{checked} cases exactly equal" if worst is None else f"first mismatch {worst}")


def test_criterion_3_stationarity_residuals():
    worst = 0.0
    for r in GRID_R:
        for p in GRID_DENSITIES:
            for q in GRID_DENSITIES:
                worst = max(worst, analytic_solution(p, q, r).residual_max)
    report(3, "stationarity of the closed form", worst < 1e-9,
           f"max relative residual {worst:.3e} over 405 grid points")


def test_criterion_4_factorization():
    worst_analytic = 0.0
    worst_solver = 0.0
    for r in GRID_R:
        for p in GRID_DENSITIES:
            for q in GRID_DENSITIES:
                target = single_rate(p, r) + single_rate(q, r)
                sol = analytic_solution(p, q, r)
                worst_analytic = max(worst_analytic, abs(sol.s_over_n - target))
                num = solve_stationary(p, q, r)
                worst_solver = max(worst_solver, abs(num.s_over_n - target))
    passed = worst_analytic < 1e-9 and worst_solver < 1e-6
    report(4, "rate factorization", passed,
           f"analytic gap {worst_analytic:.3e}, solver gap {worst_solver:.3e}")


def test_criterion_5_solver_agreement():
    rng = np.random.Generator(np.random.Philox(key=2718))
    worst = 0.0
    for _ in range(20):
        p = float(rng.uniform(0.05, 0.95))
        q = float(rng.uniform(0.05, 0.95))
        r = int(rng.integers(2, 7))
        ref = analytic_solution(p, q, r)
        sol = solve_stationary(p, q, r)
        diff = max(abs(sol.a - ref.a), abs(sol.b - ref.b), abs(sol.d - ref.d),
                   abs(sol.e - ref.e), abs(sol.L - ref.L))
        worst = max(worst, diff)
    report(5, "solver matches closed form", worst < 1e-8,
           f"max coordinate difference {worst:.3e} on 20 seeded triples")


def test_criterion_6_finite_size_trend():
    prediction = 2 * single_rate(0.5, 2)
    gaps = []
    for n in (8, 10, 12):
        value = expectation_product(n, 2, n // 2, n // 2).value
        log_rate = (math.log(value.numerator) - math.log(value.denominator)) / n
        gaps.append(abs(log_rate - prediction))
    within = all(g < 0.6 for g in gaps)
    decreasing = gaps[0] > gaps[1] > gaps[2]
    report(6, "finite-size trend", within and decreasing,
           "gaps at n=8,10,12: " + ", ".join(f"{g:.4f}" for g in gaps))


def test_criterion_7_mc_consistency():
    exact = float(expectation_product(6, 2, 3, 3).value)
    hits = 0
    for run in range(100):
        est = estimate_moments(EnsembleSpec(6, 2, seed=run), 3, 3, samples=2000)
        if abs(est.product.mean - exact) <= 3 * est.product.stderr:
            hits += 1
    report(7, "Monte Carlo consistency", hits >= 99,
           f"{hits}/100 runs within 3 stderr of the exact value")


def _balance_ok(counts, slots):
    total = sum(counts)
    mean = total / slots
    return all(abs(c - mean) <= 1 for c in counts)


def test_criterion_8_dominant_term_balance():
    failures = []
    for n in (8, 10, 12):
        m = n // 2
        profile, _ = argmax_profile(n, 2, m, m)
        ok = abs(profile.base[0] - m / 2) <= 1
        ok = ok and abs(profile.row_hit_total - profile.col_hit_total) <= 2
        for counts in (profile.base, profile.fresh, profile.dup,
                       profile.cross_colors):
            ok = ok and _balance_ok(counts, 2)
        for mat in (profile.row_hits, profile.col_hits,
                    profile.cross_rows, profile.cross_cols):
            cells = [mat[i][k] for i in range(2) for k in range(2) if i != k]
            ok = ok and _balance_ok(cells, 2)
        if not ok:
            failures.append((n, profile))
    report(8, "dominant term is color balanced", not failures,
           "maximizers at n=8,10,12 balanced within 1" if not failures
           else f"unbalanced: {failures}")


def test_criterion_9_profile_cross_check():
    rng = np.random.default_rng(31415)
    checked = 0
    worst = None
    for _ in range(200):
        n = int(rng.integers(1, 7))
        rows = [[int(rng.integers(0, 4)) for _ in range(n)] for _ in range(n)]
        mat = SquareMatrix.from_rows(rows)
        prof = subpermanent_profile(mat)
        for m in range(n + 1):
            if prof.values[m] != subpermanent_bruteforce(mat, m):
                worst = (mat, m)
        checked += 1
    report(9, "profile vs brute force", worst is None,
           f"{checked} random matrices, all orders equal" if worst is None
           else f"mismatch at {worst}")
