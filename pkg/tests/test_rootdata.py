import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wce.numfield import coerce
from wce.rootdata import (RootDataError, ambient_vector, build_root_datum, cartan_matrix, check_root_datum,
                          coxeter_data, epsilon, parse_type, root_vector, sigma_power)
from wce.selfcheck import check_epsilon

TYPES = [("A", 1), ("A", 2), ("A", 3), ("A", 4), ("D", 4), ("D", 5), ("D", 6), ("E", 6), ("E", 7), ("E", 8)]

# Coxeter numbers and exponents (Bourbaki tables)
EXPECTED = {
    ("A", 1): (2, (1,)),
    ("A", 3): (4, (1, 2, 3)),
    ("D", 4): (6, (1, 3, 3, 5)),
    ("D", 5): (8, (1, 3, 4, 5, 7)),
    ("E", 6): (12, (1, 4, 5, 7, 8, 11)),
    ("E", 7): (18, (1, 5, 7, 9, 11, 13, 17)),
    ("E", 8): (30, (1, 7, 11, 13, 17, 19, 23, 29)),
}
ROOT_COUNTS = {("A", 2): 6, ("D", 4): 24, ("E", 6): 72}


@pytest.mark.parametrize("fam,rank", list(EXPECTED))
def test_coxeter_number_and_exponents(fam, rank):
    assert coxeter_data(fam, rank) == EXPECTED[(fam, rank)]
    d = build_root_datum(fam, rank)
    assert (d.h, d.exponents) == EXPECTED[(fam, rank)]


@pytest.mark.parametrize("fam,rank", TYPES)
def test_root_datum_invariants(fam, rank):
    d = build_root_datum(fam, rank)
    assert check_root_datum(d) == []
    assert [list(r) for r in sigma_power(d, d.h)] == [[int(i == j) for j in range(rank)] for i in range(rank)]


@pytest.mark.parametrize("fam,rank", list(ROOT_COUNTS))
def test_root_count(fam, rank):
    d = build_root_datum(fam, rank)
    assert len(d.roots) == ROOT_COUNTS[(fam, rank)]
    assert all(d.pair(a, a) == 2 for a in d.roots)


def test_cartan_symmetric_positive():
    for fam, rank in TYPES:
        A = cartan_matrix(fam, rank)
        assert all(A[i][j] == A[j][i] for i in range(rank) for j in range(rank))
        assert all(A[i][i] == 2 for i in range(rank))


@pytest.mark.parametrize("fam,rank", [("A", 1), ("A", 2), ("A", 3), ("D", 4)])
def test_cocycle_laws_all_roots(fam, rank):
    ok, detail = check_epsilon(build_root_datum(fam, rank))
    assert ok, detail


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_cocycle_laws_sampled_e6(data):
    d = build_root_datum("E", 6)
    roots = d.roots
    a, b, c = (data.draw(st.sampled_from(roots)) for _ in range(3))
    assert epsilon(d, a + b, c) == epsilon(d, a, c) * epsilon(d, b, c)
    assert epsilon(d, a, b + c) == epsilon(d, a, b) * epsilon(d, a, c)
    # commutator law follows from eps(a,a) = (-1)^{|a|^2 (|a|^2+1)/2} and bimultiplicativity
    assert epsilon(d, a, b) * epsilon(d, b, a) == (-1) ** int(d.pair(a, b))


def test_d4_ambient_cocycle_is_upper_triangular():
    d = build_root_datum("D", 4)
    for i in range(4):
        for j in range(4):
            ei = ambient_vector(*[int(k == i) for k in range(4)])
            ej = ambient_vector(*[int(k == j) for k in range(4)])
            assert epsilon(d, ei, ej) == (-1 if i <= j else 1)


def test_eigenbasis_pairing_d4():
    d = build_root_datum("D", 4)
    for i in range(1, 5):
        for j in range(1, 5):
            assert d.pair(d.phi(i), d.phi(j)) == int(i + j == 5)


def test_to_eigen_roundtrip_pairing():
    d = build_root_datum("A", 3)
    a = root_vector(1, 1, 0)
    b = root_vector(0, 1, 1)
    ea, eb = d.to_eigen(a), d.to_eigen(b)
    l = d.rank
    s = sum((ea[k] * eb[l - 1 - k] for k in range(l)), coerce(0, d.conductor))
    assert s == d.pair(a, b)


def test_parse_and_errors():
    assert parse_type("d4") == ("D", 4)
    with pytest.raises(RootDataError):
        parse_type("F4")
    with pytest.raises(RootDataError):
        build_root_datum("E", 9)
    with pytest.raises(RootDataError):
        build_root_datum("D", 4, conductor=10)
    with pytest.raises(RootDataError):
        root_vector(1, 0) + ambient_vector(1, 0)
