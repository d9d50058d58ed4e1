"""Acceptance criteria 1-13. Each test prints exactly one line:

    ACCEPTANCE <n> PASS|FAIL <summary>

The lines are also repeated in the pytest terminal summary. Run this file
directly (``python3 tests/test_acceptance.py``) to see only those lines.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from sawgraph.exact import enumerate_census, evaluate, monotonicity_scan, verify_intersection_identity
from sawgraph.graph import (complete, cycle, girth, hypercube, path, petersen, random_regular,
                            regular_degree, torus)
from sawgraph.meanfield import (critical_constant, envelope_contains, evaluate_complete,
                                poisson_log_tail, poisson_tail_bound, saw_count_complete,
                                supercritical_envelope)
from sawgraph.nbrw import (estimate_measure, estimate_measure_from_stats, estimate_survival,
                           estimate_survival_splitting, exact_T_distribution, mixing_time,
                           nbrw_operator)
from sawgraph.predictions import (INCONCLUSIVE, calibrate_floor_constant, check_bound,
                                  critical_L_bounds, exact_paper_L, gamma_prediction_large_girth,
                                  subcritical_L_bounds, supercritical_L_floor)

RESULTS = []
K8_TAU = 3
K8_MAX_DEV = ("0x1.0000000000000p-3", "0x1.0000000000000p-3", "0x1.5555555555554p-5")


def report(n, ok, summary):
    line = f"ACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'} {summary}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_01_complete_graph_counts():
    t0 = time.perf_counter()
    bad = [(n, k) for n in range(3, 10)
           for k, c in enumerate(enumerate_census(complete(n)).counts)
           if c != saw_count_complete(n, k)]
    dt = time.perf_counter() - t0
    report(1, not bad and dt < 10, f"K_3..K_9 census == (n-1)!/(n-1-k)! exactly; "
           f"mismatches={len(bad)}; {dt:.2f}s (< 10s)")


def test_02_intersection_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for g in (petersen(), cycle(6), complete(4), complete(6), hypercube(3)):
        d = regular_degree(g)
        xs = (0.1, 0.3, 1.0 / (d - 1), 1.0)
        for chk in verify_intersection_identity(g, xs):
            worst = max(worst, chk.residual)
    dt = time.perf_counter() - t0
    report(2, worst <= 1e-10 and dt < 120,
           f"L+1 = I*Z with brute-force I on 5 transitive graphs x 4 x; "
           f"max rel residual {worst:.2e} (<= 1e-10); {dt * 1000:.0f} ms (< 120s)")


def _regular_family():
    gs = [petersen(), hypercube(3), hypercube(4), torus(3, 2), torus(4, 2), torus(5, 2),
          torus(3, 3)]
    gs += [complete(n) for n in range(4, 10)]
    gs += [random_regular(n, d, s) for n, d, s in
           [(12, 3, 1), (20, 3, 2), (50, 3, 3), (100, 3, 7), (16, 4, 1), (30, 4, 5), (200, 3, 11)]]
    return gs


def test_03_girth_prefix_law():
    checked = bad = 0
    for g in _regular_family():
        d, g0 = regular_degree(g), int(girth(g))
        counts = enumerate_census(g, k_max=min(g0 - 1, g.n - 1)).counts
        for k in range(1, g0):
            checked += 1
            bad += counts[k] != d * (d - 1) ** (k - 1)
    report(3, bad == 0, f"census[k] == d(d-1)^(k-1) for 1 <= k < girth on "
           f"{len(_regular_family())} regular graphs; {checked} entries, {bad} mismatches")


def test_04_key_identity_rational():
    graphs = [complete(4), complete(5), complete(6), petersen(), hypercube(3), torus(3, 2),
              random_regular(10, 3, 5), random_regular(12, 3, 2), random_regular(12, 4, 1)]
    bad = entries = 0
    for g in graphs:
        d = regular_degree(g)
        counts = enumerate_census(g).counts
        surv = exact_T_distribution(g).survival
        for k in range(1, g.n + 1):
            c = counts[k] if k < len(counts) else 0
            entries += 1
            bad += d * (d - 1) ** (k - 1) * surv[k] != Fraction(c)
    report(4, bad == 0, f"d(d-1)^(k-1) P[T>k] == census[k] as rationals on {len(graphs)} "
           f"regular graphs (n <= 12); {entries} entries, {bad} mismatches")


def test_05_monte_carlo_consistency():
    t0 = time.perf_counter()
    tallies = {}
    for g in (petersen(), complete(6)):
        d = regular_degree(g)
        census = enumerate_census(g)
        for x in (0.2, 1.0 / (d - 1)):
            ex = evaluate(census, x)
            ok = 0
            for seed in range(1, 31):
                mc = estimate_measure(g, x, 100_000, seed)
                ok += (abs(mc.Z - ex.Z) <= 3 * mc.Z_stderr and abs(mc.L - ex.L) <= 3 * mc.L_stderr)
            tallies[(g.name, round(x, 4))] = ok
    dt = time.perf_counter() - t0
    worst = min(tallies.values())
    detail = ", ".join(f"{name}@{x}:{ok}/30" for (name, x), ok in tallies.items())
    report(5, worst >= 29 and dt < 120,
           f"Z and L within 3 sigma (1e5 samples): {detail} (need >= 29); {dt:.1f}s (< 120s)")


def test_06_length_monotone():
    graphs = [complete(n) for n in range(3, 9)] + [cycle(5), cycle(9), path(7), petersen(),
                                                   hypercube(3), torus(3, 2),
                                                   random_regular(14, 3, 1)]
    grid = np.geomspace(1e-3, 10.0, 200)
    violations = [g.name for g in graphs if not monotonicity_scan(enumerate_census(g), grid)[0]]
    report(6, not violations, f"L(x) non-decreasing on a 200-point grid for {len(graphs)} graphs; "
           f"violations={len(violations)} (tol 1e-12)")


def test_07_critical_constant():
    t0 = time.perf_counter()
    n = 40_000
    ratio = evaluate_complete(n, 1.0 / (n - 1)).L / math.sqrt(n - 1)
    rel = abs(ratio / critical_constant() - 1)
    dt = time.perf_counter() - t0
    report(7, rel <= 0.05 and dt < 30, f"L(1/(n-1), K_n)/sqrt(n-1) = {ratio:.5f} at n=4e4 vs "
           f"sqrt(2/pi) = {critical_constant():.5f}; rel err {rel:.2%} (<= 5%); {dt:.2f}s (< 30s)")


def test_08_meanfield_sub_and_super():
    n = 10_000
    L_sub = evaluate_complete(n, 0.5 / (n - 1)).L
    sub_ok = abs(L_sub - 1.0) <= 0.02
    inside = []
    for eps in (0.5, 1.0, 2.0):
        env = supercritical_envelope(500, eps)
        inside.append(envelope_contains(evaluate_complete(500, (1 + eps) / 499).L, env))
    report(8, sub_ok and all(inside), f"n=1e4, eps=0.5: L = {L_sub:.5f} (within 2% of 1); "
           f"n=500 envelope contains L for eps 0.5/1/2: {inside}")


def test_09_poisson_tail():
    grid = [(x, n) for x in (0.05, 0.1, 0.25, 0.5, 1.0) for n in (0, 1, 2, 3)]
    grid = [(x, int(math.floor(1 / x)) + 1 + 5 * j) for x, j in grid]
    assert len(grid) == 20 and all(n > 1 / x for x, n in grid)
    gaps = [poisson_tail_bound(x, n) - poisson_log_tail(x, n) for x, n in grid]
    report(9, min(gaps) >= 0, f"exact tail <= bound on 20 (x, n) points; "
           f"min log-gap {min(gaps):.3f}")


def test_10_large_girth_trends():
    # sub-critical sandwich, paper convention
    g = random_regular(10_000, 3, 1)
    stats = estimate_survival(g, 100_000, 1)
    x, d = 0.2, 3
    mc = estimate_measure_from_stats(stats, x, "paper")
    lo, hi = subcritical_L_bounds(x, d, girth(g))
    sub = check_bound("L", mc.L, (mc.L - 3 * mc.L_stderr, mc.L + 3 * mc.L_stderr), (lo, hi), "sub")
    sub_ok = sub.holds is True or sub.holds == INCONCLUSIVE

    # super-critical trend: L/n above a floor calibrated at the smallest size
    x = 0.8
    rows = []
    for n in (500, 1000, 2000):
        gg = random_regular(n, 3, 1)
        st = estimate_survival_splitting(gg, 2000, 1, replicates=8)
        ev = estimate_measure_from_stats(st, x, "paper", transitive=True)
        rows.append((n, ev.L, ev.L_stderr, ev.I))
    c = calibrate_floor_constant(rows[0][1], x, d, rows[0][0], safety=0.5)
    floor_ok = all(L - 3 * se >= supercritical_L_floor(x, d, n, c) for n, L, se, _ in rows[1:])
    Is = [r[3] for r in rows]
    i_ok = all(b < a for a, b in zip(Is, Is[1:])) and Is[-1] < 1e-10
    ratios = "/".join(f"{L / n:.3f}" for n, L, _, _ in rows)
    report(10, sub_ok and floor_ok and i_ok,
           f"n=1e4 x=0.2: L_hat={mc.L:.6f}+-{mc.L_stderr:.1e} in [{lo:.4f}, {hi:.4f}] "
           f"({sub.holds}); x=0.8 L/n={ratios} >= c(1^log y) with c={c:.3f} from n=500; "
           f"I (identity proxy) {Is[0]:.1e}->{Is[-1]:.1e}")


def test_11_critical_bracket():
    P = petersen()
    br = critical_L_bounds(exact_T_distribution(P), 3, 5)
    L = exact_paper_L(enumerate_census(P), 3, 0.5)
    exact_ok = br.lo <= L <= br.hi
    g = random_regular(2000, 3, 1)
    stats = estimate_survival(g, 100_000, 1)
    mbr = critical_L_bounds(stats, 3, girth(g))
    mc = estimate_measure_from_stats(stats, 0.5, "paper")
    rep = check_bound("L", mc.L, (mc.L - 3 * mc.L_stderr, mc.L + 3 * mc.L_stderr),
                      (mbr.lo_ci[0], mbr.hi_ci[1]), "critical")
    report(11, exact_ok and rep.holds is True,
           f"Petersen: {br.lo:.4f} <= L_paper(1/2) = {L:.4f} <= {br.hi:.4f}; "
           f"RRG n=2000: L_hat = {mc.L:.2f} in [{mbr.lo:.2f}, {mbr.hi:.2f}] ({rep.holds})")


def test_12_stationarity_and_mixing():
    worst = 0.0
    for g in (petersen(), complete(8), hypercube(3), torus(4, 2), random_regular(100, 3, 7)):
        M = nbrw_operator(g)
        u = np.full(M.shape[0], 1.0 / M.shape[0])
        worst = max(worst, float(np.abs(M.T @ u - u).max()))
    q3 = mixing_time(hypercube(3), 200).tau
    a, b = mixing_time(complete(8), 50), mixing_time(complete(8), 50)
    golden = a == b and a.tau == K8_TAU and tuple(v.hex() for v in a.max_dev) == K8_MAX_DEV
    report(12, worst <= 1e-12 and q3 is None and golden,
           f"stationarity residual {worst:.1e} (<= 1e-12); Hypercube(3) tau: "
           f"{'exceeds horizon' if q3 is None else q3}; K_8 tau = {a.tau} bit-identical to golden")


def test_13_gamma_predictions():
    gammas = []
    for n in (500, 1000, 2000):
        stats = estimate_survival(random_regular(n, 3, 1), 100_000, 1)
        gammas.append(estimate_measure_from_stats(stats, 0.5, "paper").gamma)
    dists = [abs(gm - 1) for gm in gammas]
    trend_ok = all(b < a for a, b in zip(dists, dists[1:])) and dists[-1] <= 0.25
    sub = estimate_measure_from_stats(stats, 0.25, "paper").gamma
    pred = gamma_prediction_large_girth(0.25, 3)
    rel = abs(sub / pred - 1)
    report(13, trend_ok and rel <= 0.05,
           f"critical gamma (paper) n=500/1000/2000: "
           f"{'/'.join(f'{gm:.4f}' for gm in gammas)} (monotone toward 1, last within 0.25); "
           f"sub-critical gamma {sub:.4f} vs formula {pred:.4f} ({rel:.2%}, <= 5%)")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
