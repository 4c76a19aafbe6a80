import numpy as np
import pytest

from syndaware.haar import (
    AssumptionError,
    AveragedQuantity,
    block_classification,
    fig5_sweep,
    fig6_sweep,
    haar_map,
    lemma1_average,
    pauli_channel_lambda,
    prop3_average,
    sample_haar,
    theta_sq_average,
    thm2_qualifies,
    thm2_ratio,
)


def test_purity_per_sample():
    rng = np.random.default_rng(0)
    for k in (1, 2, 3):
        st = sample_haar(k, rng)
        assert st.purity_sum == pytest.approx(2**k - 1, abs=1e-12)


def test_deterministic_and_thread_independent():
    a = haar_map(lambda s: s.theta[0], 2, n=50, seed=5, threads=1)
    b = haar_map(lambda s: s.theta[0], 2, n=50, seed=5, threads=4)
    assert a == b


def test_two_seeds_statistically_independent():
    a = theta_sq_average(1, n=400, seed=1)
    b = theta_sq_average(1, n=400, seed=2)
    assert a.mean != b.mean
    assert abs(a.mean - b.mean) / np.hypot(a.se, b.se) < 5


def test_theta_sq_average_small_n():
    for k in (1, 2):
        avg = theta_sq_average(k, n=400, seed=3)
        assert avg.agrees(1 / (2**k + 1))


def test_lemma1_small_n():
    avg = lemma1_average(1, n=400, seed=4)
    assert avg.agrees(0.125)


def test_lemma1_zero_channel():
    lam = pauli_channel_lambda(2, 0, 0, 0)
    assert np.all(lam == 1)
    rows = fig5_sweep([1, 2], [(0.0, 0.0, 0.0), (0.0, 0.0, 0.2)], n=20, seed=1)
    assert all(r["mean"] == pytest.approx(0.0, abs=1e-12) for r in rows)


def test_lemma1_requires_anticommuting_q():
    with pytest.raises(AssumptionError):
        lemma1_average(1, Q=3, n=5)


def test_fig5_half_bitflip_matches_lemma1():
    rows = fig5_sweep([1], [(0.5, 0.0, 0.0)], n=300, seed=9)
    direct = lemma1_average(1, n=300, seed=9)
    assert rows[0]["mean"] == pytest.approx(direct.mean, rel=1e-12)


def test_prop3_small_n():
    avg = prop3_average(1, n=400, seed=6)
    assert avg.mean.shape == (2, 2)
    for j in range(2):
        assert abs(avg.mean[j, j] - 0.5) < 5 * avg.se[j, j]
    assert abs(avg.mean[0, 1]) < 5 * avg.se[0, 1]


def test_thm2_qualification():
    assert thm2_qualifies(block_classification("rep2", 1))[0]
    assert thm2_qualifies(block_classification("surface2", 2))[0]
    ok, why = thm2_qualifies(block_classification("steane", 1))
    assert not ok and "odd" in why
    with pytest.raises(AssumptionError):
        thm2_ratio("513", 1, n=5)


def test_thm2_rep2_small_n():
    avg = thm2_ratio("rep2", 1, n=300, seed=8)
    assert avg.agrees(0.25)


def test_fig6_513_exactly_one():
    rows = fig6_sweep(["513"], [1, 2], n=20, seed=1)
    assert all(r["mean"] == pytest.approx(1.0, abs=1e-12) for r in rows)


def test_averaged_quantity_guards():
    q = AveragedQuantity.from_samples([1.0, 1.0, 1.0])
    assert q.se == 0.0 and q.z(1.0) == 0.0
    noisy = AveragedQuantity(0.1, 0.05, 10)
    assert not noisy.agrees(0.1)  # relative SE of 50 % is rejected


def test_pauli_channel_lambda_validation():
    with pytest.raises(ValueError):
        pauli_channel_lambda(1, 0.6, 0.6, 0.0)
