import numpy as np
import pytest

from syndaware.channels import average_error_rate, ml_normalize
from syndaware.codes import catalog, parse_target
from syndaware.noise import depolarizing, enumerate_exact
from syndaware.surface_mc import (
    GapExperiment,
    GapGroup,
    matching_graph,
    mwpm_decode,
    run_gap_experiment,
)

from oracles import brute_force_class_weights


@pytest.mark.parametrize("d", [2, 3, 4])
def test_class_minima_against_exhaustive_search(d):
    g = matching_graph(d)
    oracle = brute_force_class_weights(g.checks, g.parity_mask)
    assert len(oracle) == 2**g.num_checks
    for s, (w0, w1) in oracle.items():
        assert mwpm_decode(g, s).weights == (w0, w1), s


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_empty_syndrome_gap_is_distance(d):
    g = matching_graph(d)
    res = mwpm_decode(g, 0)
    assert res.logical_class == 0 and res.gap == d
    assert g.logical_weight == d


def test_d2_single_defect_has_zero_gap():
    g = matching_graph(2)
    for s in (1, 2):
        assert mwpm_decode(g, s).gap == 0
        assert mwpm_decode(g, s).weights == (1, 1)


def test_distances_symmetric_and_metric():
    g = matching_graph(4)
    dist = g.dist
    B = g.boundary
    n = g.num_checks
    for u in range(n + 1):
        for v in range(n + 1):
            if u == B or v == B:
                continue
            assert np.array_equal(dist[u, v], dist[v, u])
            for w in range(n):
                for a in range(2):
                    for b in range(2):
                        assert dist[u, v, a ^ b] <= dist[u, w, a] + dist[w, v, b]


@pytest.mark.parametrize("d", [3, 4, 5])
def test_low_weight_errors_corrected(d):
    g = matching_graph(d)
    rng = np.random.default_rng(d)
    n = d * d
    for _ in range(300):
        w = int(rng.integers(0, (d + 1) // 2))
        e = np.zeros(n, dtype=int)
        e[rng.choice(n, size=w, replace=False)] = 1
        s = int(sum(int(v) << a for a, v in enumerate(g.checks @ e % 2)))
        res = mwpm_decode(g, s)
        if 2 * w < d:
            assert res.gap > 0
            assert res.logical_class == int(g.parity_mask @ e % 2)


def test_overflow_flag():
    g = matching_graph(5)
    full = (1 << g.num_checks) - 1
    res = mwpm_decode(g, full, cap=4)
    assert res.overflow


def test_single_group_gives_eps_i():
    exp = GapExperiment(3, 0.01, 1000, 0, 0.0, [GapGroup(3, 1000, 37)])
    assert exp.eps_csynd == pytest.approx(exp.eps, rel=1e-12)
    assert exp.ratio == pytest.approx(1.0)


def test_group_rates_above_half_are_folded():
    a = GapExperiment(2, 0.01, 200, 0, 0.0, [GapGroup(0, 100, 80), GapGroup(2, 100, 1)])
    b = GapExperiment(2, 0.01, 200, 0, 0.0, [GapGroup(0, 100, 20), GapGroup(2, 100, 1)])
    assert a.eps_csynd == pytest.approx(b.eps_csynd, rel=1e-12)


def test_thread_and_rerun_determinism():
    a = run_gap_experiment(3, 0.02, 150_000, seed=4, threads=1)
    b = run_gap_experiment(3, 0.02, 150_000, seed=4, threads=3)
    assert a.summary() == b.summary()
    assert a.rows() == b.rows()


def test_group_merging():
    exp = run_gap_experiment(3, 0.02, 50_000, seed=1, min_group_shots=10_000)
    assert all(g.shots >= 10_000 for g in exp.groups) or len(exp.groups) == 1
    assert exp.merged
    assert sum(g.shots for g in exp.groups) == exp.shots


@pytest.mark.parametrize("d,eta", [(2, 0.01), (3, 0.01), (3, 0.003)])
def test_mwpm_not_better_than_ml(d, eta):
    code = catalog(f"surface{d}")
    i = parse_target("Z", 1)
    ml = average_error_rate(ml_normalize(enumerate_exact(code, depolarizing(eta), z_only=True), i), i)
    exp = run_gap_experiment(d, eta, 300_000, seed=5)
    assert exp.eps >= ml - 3 * exp.eps_se()


def test_ratio_within_observed_range():
    for d, eta in [(2, 0.02), (3, 0.02), (4, 0.02)]:
        exp = run_gap_experiment(d, eta, 200_000, seed=6)
        se = exp.ratio_se()
        assert 0.5 - 3 * se <= exp.ratio <= 1 + 3 * se
