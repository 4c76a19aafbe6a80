import numpy as np
import pytest

from syndaware.channels import ml_normalize
from syndaware.codes import catalog, parse_target
from syndaware.noise import (
    EnumerationError,
    EtaSeries,
    SyndromeTable,
    bitflip,
    depolarizing,
    enumerate_exact,
    enumerate_leading,
    enumerate_truncated,
    pauli_channel,
    poly_leading,
    syndrome_sector_oracle,
)

from oracles import brute_force_table


def _as_dict(table):
    out = {}
    for r, s in enumerate(table.syndromes):
        for c in range(table.num_classes):
            if table.masses[r, c] != 0:
                out[(int(s), c)] = float(table.masses[r, c])
    return out


def _assert_tables_match(table, oracle, tol=1e-13):
    got = _as_dict(table)
    keys = set(got) | set(oracle)
    for key in keys:
        assert abs(got.get(key, 0.0) - oracle.get(key, 0.0)) <= tol, key


@pytest.mark.parametrize("name", ["rep2", "rep3", "surface2", "513", "steane"])
@pytest.mark.parametrize("noise", [depolarizing(0.07), bitflip(0.05), pauli_channel(0.01, 0.02, 0.05)])
def test_exact_matches_literal_loop(name, noise):
    code = catalog(name)
    _assert_tables_match(enumerate_exact(code, noise), brute_force_table(code, noise.probs))


@pytest.mark.parametrize("name", ["steane", "surface2", "surface3"])
def test_z_only_matches_literal_loop(name):
    code = catalog(name)
    noise = depolarizing(0.06)
    pm = noise.bitflip_marginal().probs
    _assert_tables_match(enumerate_exact(code, noise, z_only=True), brute_force_table(code, pm, z_only=True))


def test_block_product_table_matches_literal_loop():
    from syndaware.codes import block_product

    code = block_product(catalog("rep2"), 2)
    noise = bitflip(0.1)
    _assert_tables_match(enumerate_exact(code, noise), brute_force_table(code, noise.probs))


def test_rep2_hand_table():
    eta = 0.13
    t = enumerate_exact(catalog("rep2"), bitflip(eta))
    assert t.row(0)[0] == pytest.approx((1 - eta) ** 2, abs=1e-15)
    assert t.row(0)[1] == pytest.approx(eta**2, abs=1e-15)
    assert t.row(1)[0] == pytest.approx(eta * (1 - eta), abs=1e-15)
    assert t.row(1)[1] == pytest.approx(eta * (1 - eta), abs=1e-15)


def test_zero_noise_single_bucket():
    t = enumerate_exact(catalog("513"), depolarizing(0.0))
    assert list(t.syndromes) == [0]
    assert t.row(0)[0] == 1.0 and t.masses.sum() == 1.0


@pytest.mark.parametrize("name", ["513", "steane", "surface3", "surface4", "carbon"])
def test_normalisation(name):
    t = enumerate_exact(catalog(name), depolarizing(0.05))
    assert abs(t.masses.sum() - 1.0) < 1e-12


def test_truncated_full_weight_is_exact():
    code = catalog("513")
    noise = depolarizing(0.04)
    a = enumerate_exact(code, noise)
    b = enumerate_truncated(code, noise, code.n)
    assert np.array_equal(a.syndromes, b.syndromes)
    assert np.allclose(a.masses, b.masses, rtol=0, atol=1e-16)
    assert b.excluded_mass == pytest.approx(0.0, abs=1e-15)


def test_truncated_weight_zero():
    eta = 0.03
    code = catalog("steane")
    t = enumerate_truncated(code, depolarizing(eta), 0)
    assert list(t.syndromes) == [0]
    assert t.excluded_mass == pytest.approx(1 - (1 - eta) ** 7, rel=1e-12)


def test_truncated_surface3_logical_rate():
    from syndaware.channels import average_error_rate

    code = catalog("surface3")
    i = parse_target("Z", 1)
    noise = depolarizing(1e-3)
    exact = average_error_rate(ml_normalize(enumerate_exact(code, noise), i), i)
    trunc = average_error_rate(ml_normalize(enumerate_truncated(code, noise, 4), i), i)
    assert abs(exact - trunc) < 1e-10


def test_z_only_needs_z_generators():
    with pytest.raises(EnumerationError):
        enumerate_exact(catalog("513"), depolarizing(0.01), z_only=True)


def test_exact_too_large_raises():
    with pytest.raises(EnumerationError):
        enumerate_exact(catalog("surface5"), depolarizing(0.01))


def test_rep3_leading_hand_example():
    code = catalog("rep3")
    i = parse_target("Z", 1)
    t = ml_normalize(enumerate_leading(code, bitflip(0.1), w_max=2), i)
    row = t.row(1)  # syndrome (1, 0)
    assert row[0, 1] == pytest.approx(1.0) and row[0, 0] == 0.0
    assert row[1, 2] == pytest.approx(1.0) and row[1, 1] == 0.0


def test_leading_identity_syndrome_order_zero():
    t = enumerate_leading(catalog("steane"), depolarizing(0.1))
    order, coeff = poly_leading(t.p, 1e-12)
    r = t.index_of(0)
    assert order[r] == 0 and coeff[r] == pytest.approx(1.0)


def test_leading_depolarizing_single_error_coefficient():
    code = catalog("513")
    t = enumerate_leading(code, depolarizing(0.1), w_max=1)
    first = t.masses[t.syndromes != 0, :, 1]
    nonzero = first[first != 0]
    # each weight-1 error has its own syndrome on the perfect code
    assert np.allclose(nonzero, 1 / 3)
    assert len(nonzero) == 15


@pytest.mark.parametrize("name", ["513", "steane", "surface2"])
def test_leading_evaluates_to_exact_at_full_order(name):
    code = catalog(name)
    eta = 0.02
    lead = enumerate_leading(code, depolarizing(eta), w_max=code.n)
    num = lead.evaluate(eta)
    ex = enumerate_exact(code, depolarizing(eta))
    _assert_tables_match(num, _as_dict(ex), tol=1e-14)


@pytest.mark.parametrize("name,noise", [("rep3", bitflip(0.1)), ("513", depolarizing(0.05)),
                                        ("rep2", bitflip(0.0))])
def test_dense_sector_oracle(name, noise):
    res = syndrome_sector_oracle(catalog(name), noise, seed=3)
    assert res["ok"], res


def test_json_round_trip():
    t = enumerate_exact(catalog("steane"), depolarizing(0.02))
    back = SyndromeTable.from_json(t.to_json())
    assert np.array_equal(back.syndromes, t.syndromes)
    assert np.array_equal(back.masses, t.masses)
    assert back.noise == t.noise


def test_eta_series_basics():
    s = EtaSeries.make(0, [0.0, 0.0, 2.0, 1.0])
    assert s.order == 2 and s.leading == 2.0
    assert EtaSeries.make(0, [0.0, 0.0]).is_zero()


def test_noise_validation():
    with pytest.raises(ValueError):
        depolarizing(0.8)
    with pytest.raises(ValueError):
        bitflip(-0.1)
