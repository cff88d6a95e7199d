import itertools

import pytest
from hypothesis import given, strategies as st

from ssatdual.abgroup import ALL, SLocalGroup, Z, Zloc, Zmod, is_isomorphic, trivial
from ssatdual.catalog import (
    BASE_CATALOG,
    Kind,
    KPair,
    SSAlgebra,
    SupernaturalNumber,
    Unevaluated,
    absorbs_uhf,
    assumptions_for,
    is_purely_infinite,
    is_stably_finite,
    k_theory_ssa,
    parse_algebra,
    tensor_ssa,
    units_positive,
)
from ssatdual.errors import UnsupportedCoefficientError, UnsupportedError, ValidationError

UNITAL = [a for a in BASE_CATALOG if a.kind is not Kind.RAZAK_JACELON] + [
    SSAlgebra.uhf_alg({3}),
    SSAlgebra.uhf_alg({2, 3}),
    SSAlgebra.uhf_oinf({2}),
    SSAlgebra.uhf_oinf({5}),
]


def test_parse_and_print():
    assert parse_algebra("UHF:6") == parse_algebra("UHF:2,3")
    assert str(parse_algebra("UHF:4")) == "UHF:2"
    assert str(parse_algebra("UHF:2*Oinf")) == "UHF:2*Oinf"
    assert parse_algebra("O2").kind is Kind.CUNTZ2
    assert parse_algebra("O3") == SSAlgebra.cuntz_n(3)
    assert parse_algebra("UHF:ALL").support is ALL
    for bad in ("UHF:1", "O", "foo", "UHF:"):
        with pytest.raises(ValidationError):
            parse_algebra(bad)
    for a in UNITAL:
        assert parse_algebra(str(a)) == a


def test_supernatural_numbers():
    assert str(SupernaturalNumber.of(12)) == "2,3"
    assert (SupernaturalNumber.of(2) * SupernaturalNumber.of(3)).support == frozenset({2, 3})
    with pytest.raises(ValidationError):
        SupernaturalNumber(frozenset())


@pytest.mark.parametrize("A", UNITAL, ids=str)
def test_tensor_idempotent_and_units(A):
    assert tensor_ssa(A, A) == A
    assert tensor_ssa(A, SSAlgebra.complex()) == A
    assert tensor_ssa(A, SSAlgebra.jiang_su()) == (SSAlgebra.jiang_su() if A.kind is Kind.COMPLEX else A)
    assert tensor_ssa(A, SSAlgebra.cuntz2()) == SSAlgebra.cuntz2()


@given(st.sampled_from(UNITAL), st.sampled_from(UNITAL), st.sampled_from(UNITAL))
def test_tensor_commutative_associative(A, B, C):
    assert tensor_ssa(A, B) == tensor_ssa(B, A)
    assert tensor_ssa(tensor_ssa(A, B), C) == tensor_ssa(A, tensor_ssa(B, C))


def test_tensor_table_entries():
    U2, U3 = SSAlgebra.uhf_alg({2}), SSAlgebra.uhf_alg({3})
    assert tensor_ssa(U2, U3) == SSAlgebra.uhf_alg({2, 3})
    assert tensor_ssa(U2, SSAlgebra.cuntz_inf()) == SSAlgebra.uhf_oinf({2})
    W = SSAlgebra.razak_jacelon()
    assert tensor_ssa(W, SSAlgebra.jiang_su()) == W
    with pytest.raises(UnsupportedError):
        tensor_ssa(W, U2)
    with pytest.raises(UnsupportedError):
        tensor_ssa(SSAlgebra.cuntz_n(3), U2)


def test_k_theory_table():
    assert k_theory_ssa(SSAlgebra.uhf_alg({2})).isomorphic(KPair(Zloc({2}), trivial()))
    assert k_theory_ssa(SSAlgebra.cuntz2()).isomorphic(KPair(trivial(), trivial()))
    assert k_theory_ssa(SSAlgebra.cuntz_inf()).isomorphic(KPair(Z(), trivial()))
    assert k_theory_ssa(SSAlgebra.jiang_su()).isomorphic(KPair(Z(), trivial()))
    assert k_theory_ssa(SSAlgebra.cuntz_n(4)).isomorphic(KPair(Zmod(3), trivial()))
    assert isinstance(k_theory_ssa(SSAlgebra.mapping_torus_af(1, 3)), Unevaluated)


def test_unit_groups():
    assert units_positive(SSAlgebra.complex()).group.is_trivial()
    assert is_isomorphic(units_positive(SSAlgebra.uhf_alg({2, 3})).group, SLocalGroup(2))
    oinf = units_positive(SSAlgebra.cuntz_inf())
    assert oinf.group.is_trivial() and oinf.assumption
    with pytest.raises(UnsupportedCoefficientError):
        units_positive(SSAlgebra.uhf_alg(ALL)).as_coefficients()
    assert assumptions_for(SSAlgebra.cuntz_inf())
    assert assumptions_for(SSAlgebra.uhf_alg({2})) == []


def test_predicates():
    assert is_purely_infinite(SSAlgebra.cuntz2()) and is_purely_infinite(SSAlgebra.uhf_oinf({2}))
    assert is_stably_finite(SSAlgebra.jiang_su()) and not is_stably_finite(SSAlgebra.cuntz_inf())
    assert absorbs_uhf(SSAlgebra.uhf_alg({2})) and absorbs_uhf(SSAlgebra.cuntz2())
    assert not absorbs_uhf(SSAlgebra.jiang_su()) and not absorbs_uhf(SSAlgebra.cuntz_inf())
    for a, b in itertools.product(UNITAL, repeat=2):
        if absorbs_uhf(a):
            assert absorbs_uhf(tensor_ssa(a, b))
