import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sawgraph.exact import enumerate_census, evaluate
from sawgraph.exceptions import DegreeTooSmall, EmptyStats, NotRegular
from sawgraph.graph import (complete, cycle, girth, hypercube, path, petersen, random_regular,
                            regular_degree, torus)
from sawgraph.nbrw import (_plugin, block_rng, census_from_survival, estimate_measure,
                           estimate_measure_from_stats, estimate_survival,
                           estimate_survival_splitting, exact_T_distribution,
                           large_girth_ratio, mixing_time, nbrw_operator, ratios_decreasing,
                           sample_T, transition_distribution)

K8_MAX_DEV = ("0x1.0000000000000p-3", "0x1.0000000000000p-3", "0x1.5555555555554p-5")


def test_guards():
    with pytest.raises(DegreeTooSmall):
        sample_T(cycle(5))
    with pytest.raises(NotRegular):
        estimate_survival(path(5), 10, 1)
    with pytest.raises(DegreeTooSmall):
        mixing_time(cycle(6), 10)
    with pytest.raises(EmptyStats):
        estimate_survival(petersen(), 0, 1)


def test_sample_T_ranges():
    rng = np.random.default_rng(0)
    assert {sample_T(complete(4), rng=rng) for _ in range(300)} == {3, 4}
    assert min(sample_T(petersen(), rng=rng) for _ in range(300)) >= 5


def test_survival_prefix_and_monotone():
    stats = estimate_survival(petersen(), 100_000, 11)
    assert stats.survival[:5] == (1.0,) * 5
    s = np.array(stats.survival)
    assert np.all(np.diff(s) <= 0)
    assert stats.samples.min() >= girth(petersen())


def test_survival_k4_against_exact():
    stats = estimate_survival(complete(4), 100_000, 5)
    exact = exact_T_distribution(complete(4))
    assert exact.survival[3] == Fraction(1, 2)
    assert abs(stats.survival[3] - 0.5) <= 3 * stats.stderr[3]


def test_single_sample_is_step():
    stats = estimate_survival(petersen(), 1, 3)
    assert set(stats.survival) <= {0.0, 1.0}


def test_determinism_and_worker_independence():
    g = random_regular(200, 3, 1)
    a = estimate_survival(g, 10_000, 42, workers=1)
    b = estimate_survival(g, 10_000, 42, workers=1)
    c = estimate_survival(g, 10_000, 42, workers=2)
    assert a == b == c
    assert estimate_survival(g, 10_000, 43) != a


def test_block_streams_differ():
    a = block_rng(1, 0).integers(0, 2**32, 4)
    b = block_rng(1, 1).integers(0, 2**32, 4)
    c = block_rng(2, 0).integers(0, 2**32, 4)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)


def test_exact_T_examples():
    assert exact_T_distribution(petersen()).survival[4] == 1
    k4 = exact_T_distribution(complete(4))
    assert k4.survival[2] == 1 and k4.survival[3] == Fraction(1, 2) and k4.survival[4] == 0


@pytest.mark.parametrize("g", [complete(4), complete(6), petersen(), hypercube(3), torus(3, 2),
                               random_regular(10, 3, 5), random_regular(12, 3, 2),
                               random_regular(12, 4, 1)], ids=lambda g: g.name)
def test_key_identity_exact(g):
    d = regular_degree(g)
    counts = enumerate_census(g).counts
    surv = exact_T_distribution(g).survival
    for k in range(1, g.n):
        c = counts[k] if k < len(counts) else 0
        assert d * (d - 1) ** (k - 1) * surv[k] == c


def test_census_from_survival_examples():
    pet = census_from_survival(exact_T_distribution(petersen()))
    assert round(pet.counts[4]) == 24
    k4 = census_from_survival(exact_T_distribution(complete(4)))
    assert k4.counts[3] == pytest.approx(6.0)
    assert k4.counts[0] == 1.0 and k4.counts[1] == pytest.approx(3.0)
    paper = census_from_survival(exact_T_distribution(complete(4)), convention="paper")
    assert paper.counts[0] == pytest.approx(1.5)


def test_estimate_measure_examples():
    census = enumerate_census(petersen())
    ex = evaluate(census, 0.2)
    mc = estimate_measure(petersen(), 0.2, 100_000, 9)
    assert abs(mc.L - ex.L) <= 3 * mc.L_stderr
    k4 = estimate_measure(complete(4), 1.0, 100_000, 9)
    assert abs(k4.Z - 16.0) <= 3 * k4.Z_stderr
    tiny = estimate_measure(petersen(), 1e-9, 1000, 1)
    assert tiny.L < 1e-8 and tiny.Z == pytest.approx(1.0)


def test_paper_convention_shift():
    stats = estimate_survival(petersen(), 20_000, 3)
    for x in (0.1, 0.5, 1.0):
        exact = estimate_measure_from_stats(stats, x, "exact")
        paper = estimate_measure_from_stats(stats, x, "paper")
        assert paper.Z - exact.Z == pytest.approx(0.5, rel=1e-9)


@given(st.lists(st.integers(3, 60), min_size=2, max_size=50), st.floats(0.05, 2.5),
       st.sampled_from([3, 4, 5]), st.sampled_from(["exact", "paper"]))
def test_plugin_matches_closed_form(ts, y, d, convention):
    t_vals, weights = np.unique(np.array(ts), return_counts=True)
    log_Z, L, _, _ = _plugin(t_vals, weights.astype(float), y, d, convention)
    c = d / (d - 1)
    T = np.array(ts, dtype=float)
    if abs(y - 1) < 1e-9:
        a = T
        b = T * (T - 1) / 2
    else:
        a = (y**T - 1) / (y - 1)
        b = (y * (1 - y**T) / (1 - y) ** 2 - T * y**T / (1 - y))
    if convention == "exact":
        Z = 1 + c * np.mean(a - 1)
    else:
        Z = c * np.mean(a)
    assert log_Z == pytest.approx(math.log(Z), rel=1e-9, abs=1e-12)
    assert L == pytest.approx(c * np.mean(b) / Z, rel=1e-8)


def test_monte_carlo_consistency_small():
    ex = evaluate(enumerate_census(complete(6)), 0.25)
    hits = 0
    for seed in range(1, 11):
        mc = estimate_measure(complete(6), 0.25, 20_000, seed)
        hits += abs(mc.L - ex.L) <= 3 * mc.L_stderr and abs(mc.log_Z - ex.log_Z) <= 3 * mc.logZ_stderr
    assert hits >= 9


def test_bootstrap_interval_covers_estimate():
    stats = estimate_survival(petersen(), 20_000, 4)
    mc = estimate_measure_from_stats(stats, 0.5, n_boot=200, boot_seed=1)
    assert mc.L_ci[0] < mc.L < mc.L_ci[1]


def test_splitting_matches_exact_survival():
    g = complete(6)
    exact = [float(s) for s in exact_T_distribution(g).survival]
    stats = estimate_survival_splitting(g, 4000, 2, replicates=8)
    for k in range(len(exact)):
        assert abs(stats.survival[k] - exact[k]) <= 4 * stats.stderr[k] + 1e-12
    assert stats == estimate_survival_splitting(g, 4000, 2, replicates=8)


def test_splitting_measure_close_to_exact():
    g = petersen()
    ex = evaluate(enumerate_census(g), 1.0)
    stats = estimate_survival_splitting(g, 4000, 7, replicates=8)
    mc = estimate_measure_from_stats(stats, 1.0)
    assert abs(mc.L - ex.L) <= 4 * mc.L_stderr + 1e-9


def test_transition_examples():
    k4 = transition_distribution(complete(4), 0, 1)
    assert k4.marginal.tolist() == pytest.approx([0, 1 / 3, 1 / 3, 1 / 3])
    for t in range(1, 5):
        dist = transition_distribution(petersen(), 3, t)
        assert dist.marginal[3] == 0.0
        assert dist.probs.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("g", [petersen(), complete(7), hypercube(4), random_regular(30, 3, 1)],
                         ids=lambda g: g.name)
def test_uniform_is_stationary(g):
    M = nbrw_operator(g)
    u = np.full(M.shape[0], 1.0 / M.shape[0])
    assert np.abs(M.T @ u - u).max() <= 1e-12
    assert np.abs(M.sum(axis=1) - 1).max() <= 1e-12


def test_mixing_golden_k8():
    a = mixing_time(complete(8), 50)
    b = mixing_time(complete(8), 50)
    assert a == b
    assert a.tau == 3
    assert tuple(v.hex() for v in a.max_dev) == K8_MAX_DEV


def test_mixing_exceeds_horizon():
    for horizon in (0, 10, 200):
        assert mixing_time(hypercube(3), horizon).tau is None
    assert mixing_time(petersen(), 2).tau is None
    assert mixing_time(petersen(), 50).tau is not None


def test_large_girth_ratio():
    assert large_girth_ratio(10, 20, 3) == pytest.approx(0.3125)
    assert large_girth_ratio(100, 4, 3) == pytest.approx(50.0)
    assert ratios_decreasing([3.0, 2.0, 1.5]) and not ratios_decreasing([3.0, 3.5])
