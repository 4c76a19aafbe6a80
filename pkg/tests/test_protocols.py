import numpy as np
import pytest

from syndaware.channels import average_error_rate, error_rates, ml_normalize
from syndaware.codes import catalog, parse_target
from syndaware.noise import bitflip, depolarizing, enumerate_exact
from syndaware.protocols import (
    ShotRecords,
    estimate_agnostic,
    estimate_csynd,
    estimate_quantum_twostep,
    joint_distribution,
    run_classical,
    run_quantum,
    sample_counts,
    sample_shots,
    shuffle_counts,
)
from syndaware.qfisher import bloch_from_state

Z1 = parse_target("Z", 1)


def rep2_table(eta=0.1):
    return ml_normalize(enumerate_exact(catalog("rep2"), bitflip(eta)), Z1)


def test_theta_zero_mean_zero():
    shots = sample_shots(rep2_table(), Z1, 0.0, 200_000, np.random.default_rng(0))
    assert abs(shots.outcomes.mean()) < 5 / np.sqrt(200_000)


def test_noiseless_mean_theta():
    t = ml_normalize(enumerate_exact(catalog("rep2"), bitflip(0.0)), Z1)
    shots = sample_shots(t, Z1, 0.4, 100_000, np.random.default_rng(1))
    se = np.sqrt((1 - 0.16) / 100_000)
    assert abs(shots.outcomes.mean() - 0.4) < 5 * se
    assert estimate_agnostic(shots, 0.0) == pytest.approx(shots.outcomes.mean())


def test_syndrome_frequencies_multinomial():
    t = ml_normalize(enumerate_exact(catalog("steane"), depolarizing(0.05)), Z1)
    n = 100_000
    shots = sample_shots(t, Z1, 0.3, n, np.random.default_rng(2))
    freq = np.bincount(shots.syndromes, minlength=len(t.p)) / n
    se = np.sqrt(t.p * (1 - t.p) / n)
    assert np.all(np.abs(freq - t.p) <= 5 * se + 1e-12)


def test_agnostic_rejects_half():
    with pytest.raises(ValueError):
        estimate_agnostic(np.array([[1, 1]]), 0.5)


def test_csynd_equal_rates_equals_agnostic():
    t = rep2_table()
    shots = sample_shots(t, Z1, 0.3, 10_000, np.random.default_rng(3))
    eps = np.full(len(t.p), 0.08)
    n1 = int(np.sqrt(len(shots)))
    tail = ShotRecords(shots.syndromes[n1:], shots.outcomes[n1:], shots.num_syndromes)
    assert estimate_csynd(shots, eps) == pytest.approx(estimate_agnostic(tail, 0.08), rel=1e-12)


def test_csynd_ignores_half_rate_syndromes():
    t = rep2_table()
    shots = sample_shots(t, Z1, 0.3, 1000, np.random.default_rng(4))
    eps = error_rates(t, Z1)
    assert np.isfinite(estimate_csynd(shots, eps))


def test_shuffle_preserves_margins():
    rng = np.random.default_rng(5)
    counts = np.array([[10, 30], [5, 0], [7, 8]])
    sh = shuffle_counts(counts, rng)
    assert np.array_equal(sh.sum(axis=1), counts.sum(axis=1))
    assert sh[:, 1].sum() == counts[:, 1].sum()


def test_shot_records_shuffle():
    shots = sample_shots(rep2_table(), Z1, 0.3, 500, np.random.default_rng(6))
    sh = shots.shuffled(np.random.default_rng(7))
    assert np.array_equal(np.sort(sh.syndromes), np.sort(shots.syndromes))
    assert np.array_equal(sh.counts().sum(axis=0), shots.counts().sum(axis=0))


def test_counts_match_joint():
    joint = joint_distribution(rep2_table(), Z1, 0.3)
    c = sample_counts(joint, 1000, np.random.default_rng(8))
    assert c.shape == joint.shape and c.sum() == 1000


@pytest.mark.parametrize("protocol", ["agnostic", "csynd", "shuffled"])
def test_classical_protocols_unbiased_and_efficient(protocol):
    res = run_classical(rep2_table(), Z1, 0.3, 20_000, 400, seed=11, protocol=protocol)
    assert res.bias_ok
    assert 0.8 < res.ratio < 1.25


def test_quantum_p_zero_is_agnostic():
    theta = bloch_from_state(np.array([0.6, 0.8j])).theta
    res = run_quantum(theta, 0.0, 1, Z1, 2000, 400, seed=3)
    assert res.crb == pytest.approx((1 - theta[2] ** 2) / 2000)
    assert 0.8 < res.ratio < 1.25


def test_quantum_oracle_init_small():
    rng = np.random.default_rng(4)
    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    theta = bloch_from_state(psi / np.linalg.norm(psi)).theta
    res = run_quantum(theta, 0.3, 1, Z1, 5000, 400, seed=5)
    assert res.bias_ok and 0.8 < res.ratio < 1.25


def test_quantum_rejects_commuting_q():
    with pytest.raises(ValueError):
        estimate_quantum_twostep(np.array([0, 0, 1.0]), 0.2, 3, 3, 10, np.random.default_rng(0))


def test_run_classical_rejects_unknown_protocol():
    with pytest.raises(ValueError):
        run_classical(rep2_table(), Z1, 0.3, 100, 2, seed=0, protocol="bogus")


def test_eps_i_rep2():
    assert average_error_rate(rep2_table(0.1), Z1) == pytest.approx(0.1)


def test_project_physical():
    from syndaware.protocols import project_physical
    from syndaware.qfisher import density_matrix

    inside = np.array([0.1, -0.2, 0.3])
    assert np.allclose(project_physical(inside), inside, atol=1e-13)
    outside = np.array([0.9, 0.9, 0.0])
    proj = project_physical(outside)
    assert np.linalg.eigvalsh(density_matrix(proj)).min() >= -1e-12
    assert np.linalg.norm(proj) <= 1 + 1e-12


@pytest.mark.parametrize("k", [1, 2])
def test_quantum_rough_init_pure_state(k):
    from syndaware.haar import sample_haar, sample_rngs

    theta = sample_haar(k, sample_rngs(17, 1)[0]).theta
    res = run_quantum(theta, 0.2, parse_target("X", k), parse_target("Z", k), 100_000, 400, seed=2,
                      mode="rough_init")
    assert res.bias_ok and 0.8 < res.ratio < 1.25
