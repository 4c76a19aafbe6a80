import itertools

import numpy as np
import pytest

from syndaware.codes import (
    CodeError,
    anticommute_matrix,
    block_product,
    canonical_recovery,
    catalog,
    format_code_text,
    label_index,
    label_pauli,
    logical_class,
    parse_code_text,
    parse_target,
    promote_logical,
    resolve_code,
    syndrome,
    syndrome_bits,
)
from syndaware.pauli import PauliOp, commutes, parse, prod

from oracles import anticommutes_dense, label_string, min_weight_logical

CATALOG = ["rep2", "rep3", "surface2", "surface3", "surface4", "513", "steane", "carbon", "carbon_promoted"]


@pytest.mark.parametrize("name,params", [
    ("rep2", (2, 1, 2)), ("rep3", (3, 1, 3)), ("surface2", (4, 1, 2)), ("surface3", (9, 1, 3)),
    ("surface4", (16, 1, 4)), ("surface5", (25, 1, 5)), ("513", (5, 1, 3)), ("steane", (7, 1, 3)),
    ("rotated_surface:3", (9, 1, 3)), ("carbon", (12, 2, 4)), ("carbon_promoted", (12, 1, 4)),
])
def test_catalog_parameters(name, params):
    c = catalog(name)
    assert (c.n, c.k, c.d) == params


@pytest.mark.parametrize("name", ["rep3", "surface2", "surface3", "513", "steane"])
def test_distance_against_brute_force_search(name):
    c = catalog(name)
    assert min_weight_logical(c, c.distance_paulis) == c.d


def test_identity_has_zero_syndrome():
    c = catalog("steane")
    assert syndrome(c, PauliOp.identity(7)) == 0


def test_rep3_syndrome_of_xii():
    c = catalog("rep3")
    assert syndrome_bits(c, parse("XII")) == (1, 0)


@pytest.mark.parametrize("name", CATALOG)
def test_stabilizer_elements_have_zero_syndrome(name):
    c = catalog(name)
    rng = np.random.default_rng(1)
    for _ in range(20):
        sel = rng.integers(0, 2, size=c.m)
        e = PauliOp.identity(c.n)
        for a in np.nonzero(sel)[0]:
            e = prod(e, c.generators[a])
        assert syndrome(c, e) == 0
        assert logical_class(c, e).is_identity()


def test_canonical_recovery_inverts_syndrome_513():
    c = catalog("513")
    for s in range(2**c.m):
        assert syndrome(c, canonical_recovery(c, s)) == s
    assert canonical_recovery(c, 0).is_identity()
    for a in range(c.m):
        assert canonical_recovery(c, 1 << a) == c.destabilizers[a]


@pytest.mark.parametrize("name", CATALOG)
def test_destabilizers_commute_with_logicals(name):
    c = catalog(name)
    for a, d_a in enumerate(c.destabilizers):
        assert syndrome(c, d_a) == 1 << a
        for lop in c.logical_x + c.logical_z:
            assert commutes(d_a, lop)


def test_logical_x_class():
    c = catalog("carbon")
    assert str(logical_class(c, c.logical_x[1])) == "IX"
    rep = catalog("rep3")
    assert str(logical_class(rep, parse("XXX"))) == "X"


def test_label_index_convention():
    assert label_index(parse("X")) == 1
    assert label_index(parse("Y")) == 2
    assert label_index(parse("Z")) == 3
    assert label_index(parse("ZI")) == 12
    assert label_index(parse("IZ")) == 3
    for k in (1, 2):
        for j in range(4**k):
            assert str(label_pauli(j, k)) == label_string(j, k)
            assert label_index(label_pauli(j, k)) == j


def test_parse_target():
    assert parse_target("Z", 2) == 12
    assert parse_target("X", 1) == 1
    assert parse_target(5, 2) == 5
    with pytest.raises(ValueError):
        parse_target("I", 1)
    with pytest.raises(ValueError):
        parse_target("XYZ", 2)


def test_anticommute_matrix_against_dense():
    k = 2
    a = anticommute_matrix(k)
    for i, j in itertools.product(range(4**k), repeat=2):
        assert bool(a[i, j]) == anticommutes_dense(label_string(i, k), label_string(j, k))


def test_block_product_rep2_squared():
    c = block_product(catalog("rep2"), 2)
    assert (c.n, c.k, c.d) == (4, 2, 2)
    assert block_product(catalog("rep2"), 1) is catalog("rep2")


def test_block_product_distance_by_search():
    c = block_product(catalog("surface2"), 2)
    assert min_weight_logical(c, "XYZ", max_weight=2) == 2


def test_resolve_code_block_syntax():
    c = resolve_code("513^2")
    assert (c.n, c.k) == (10, 2)


def test_promote_carbon():
    c = promote_logical(catalog("carbon"), 0)
    assert (c.n, c.k, c.d) == (12, 1, 4)


def test_promote_block_code():
    c = promote_logical(block_product(catalog("surface2"), 2), 1)
    assert (c.n, c.k, c.d) == (8, 1, 2)
    with pytest.raises(CodeError):
        promote_logical(c, 0)


def test_non_commuting_generators_named():
    bad = "n = 2\nd = 1\n[stabilizers]\nXI\nZI\n[logical_x]\n[logical_z]\n"
    with pytest.raises(CodeError, match="generators 0 .* and 1 .* anticommute"):
        parse_code_text(bad)


def test_code_text_round_trip():
    c = catalog("steane")
    again = parse_code_text(format_code_text(c))
    assert again.generators == c.generators and again.logical_z == c.logical_z


def test_unknown_catalog_name():
    with pytest.raises(KeyError):
        catalog("nonexistent")


def test_wrong_declared_distance_rejected():
    text = "d = 3\n[stabilizers]\nZZ\n[logical_x]\nXX\n[logical_z]\nZI\n"
    with pytest.raises(CodeError):
        parse_code_text(text)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_rotated_surface_layout(d):
    c = catalog(f"surface{d}")
    zs = c.z_type_generators()
    xs = c.x_type_generators()
    assert len(zs) + len(xs) == d * d - 1
    assert len(zs) == d * d // 2
    assert c.is_css()
