import cmath
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wce import _kernels_py, kernels
from wce.numfield import (CycScalar, FieldError, coerce, complex_conjugate, dot, field, field_arith,
                          sqrt_of_integer, to_float, zeta)

N = 24
rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)
elements = st.lists(rationals, min_size=8, max_size=8).map(lambda c: CycScalar(c, N))


def close(a, z):
    return abs(complex(a) - z) < 1e-9


@given(elements, elements, elements)
@settings(max_examples=60, deadline=None)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == field(N).zero


@given(elements)
@settings(max_examples=60, deadline=None)
def test_inverse(a):
    if a.is_zero():
        with pytest.raises((ZeroDivisionError, FieldError)):
            a.inverse()
    else:
        assert a * a.inverse() == field(N).one


@given(elements, elements)
@settings(max_examples=40, deadline=None)
def test_embedding_is_a_homomorphism(a, b):
    assert close(a * b, complex(a) * complex(b))
    assert close(a + b, complex(a) + complex(b))


@given(elements)
@settings(max_examples=40, deadline=None)
def test_serialize_roundtrip(a):
    assert CycScalar.deserialize(a.serialize()) == a


def test_canonical_zero_and_one():
    assert field(N).zero.serialize() == CycScalar([0], N).serialize()
    assert field(N).one == CycScalar.from_rational(1, N)
    assert zeta(N, N) == field(N).one


def test_zeta_powers():
    z = zeta(N)
    assert z ** 24 == 1
    assert z ** 12 == -1
    assert close(z, cmath.exp(2j * cmath.pi / 24))


@pytest.mark.parametrize("n", [2, 3, 6, -3, -1, 12])
def test_square_roots(n):
    s = sqrt_of_integer(n, N)
    assert s * s == n


def test_sqrt_minus_three_constant():
    # w2 of D4 uses sqrt(-3); it must lie in Q(zeta_24) and square to -3
    s = sqrt_of_integer(-3, N)
    assert s * s == -3
    assert close(s, 1j * 3 ** 0.5) or close(s, -1j * 3 ** 0.5)


def test_promote_restrict_conjugate():
    z = zeta(12)
    big = z.promote(24)
    assert big == zeta(24, 2)
    assert big.restrict(12) == z
    assert complex_conjugate(z) * z == 1
    assert close(z.galois(5), cmath.exp(2j * cmath.pi * 5 / 12))


def test_field_arith_and_rationals():
    a = coerce(Fraction(3, 4))
    b = coerce(Fraction(-2, 3))
    assert field_arith(a, b, "add") == Fraction(1, 12)
    assert field_arith(a, b, "mul") == Fraction(-1, 2)
    assert field_arith(a, b, "div") == Fraction(-9, 8)
    assert a.to_rational() == Fraction(3, 4)
    with pytest.raises(ValueError):
        field_arith(a, b, "pow")


def test_to_float():
    assert abs(to_float(sqrt_of_integer(2, N)) - 2 ** 0.5) < 1e-12


@given(st.lists(st.tuples(elements, elements), max_size=6))
@settings(max_examples=40, deadline=None)
def test_dot_matches_sum_of_products(pairs):
    expected = field(N).zero
    for x, y in pairs:
        expected = expected + x * y
    assert dot(pairs, N) == expected


def test_backends_agree():
    fld = field(N)
    rng = random.Random(7)
    for _ in range(200):
        a = tuple(rng.randint(-10**9, 10**9) for _ in range(fld.degree))
        b = tuple(rng.randint(-10**9, 10**9) for _ in range(fld.degree))
        da, db = rng.randint(1, 99), rng.randint(1, 99)
        assert kernels.mul(a, da, b, db, fld.degree, fld.tail) == _kernels_py.mul(a, da, b, db, fld.degree, fld.tail)
        assert kernels.add(a, da, b, db) == _kernels_py.add(a, da, b, db)
        assert kernels.sub(a, da, b, db) == _kernels_py.sub(a, da, b, db)
        pairs = [((a, da), (b, db)), ((b, db), (a, 1))]
        assert kernels.dot(pairs, fld.degree, fld.tail) == _kernels_py.dot(pairs, fld.degree, fld.tail)


def test_compiled_backend_selected_when_built():
    try:
        import wce._kernels  # noqa: F401
    except ImportError:
        pytest.skip("compiled kernels not built")
    import os

    if not os.environ.get("WCE_PURE_PYTHON"):
        assert kernels.COMPILED
