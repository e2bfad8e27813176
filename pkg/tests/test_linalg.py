from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from wce.linalg import nullspace, rank, solve_linear
from wce.numfield import coerce, sqrt_of_integer

small = st.integers(min_value=-4, max_value=4)


@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=4))
@settings(max_examples=80, deadline=None)
def test_nullspace_vectors_are_killed(mat):
    rows = [{c: Fraction(v) for c, v in enumerate(r) if v} for r in mat]
    basis = nullspace(rows, 4)
    assert len(basis) + rank(rows) == 4
    for vec in basis:
        for r in rows:
            assert sum(r.get(c, 0) * x for c, x in vec.items()) == 0


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3),
       st.lists(small, min_size=3, max_size=3))
@settings(max_examples=80, deadline=None)
def test_solve_linear(A, x):
    b = [sum(a * y for a, y in zip(row, x)) for row in A]
    sol = solve_linear([[Fraction(a) for a in row] for row in A], [Fraction(v) for v in b])
    assert sol is not None
    assert [sum(a * y for a, y in zip(row, sol)) for row in A] == b


def test_inconsistent_system():
    assert solve_linear([[Fraction(1), Fraction(1)], [Fraction(2), Fraction(2)]], [Fraction(1), Fraction(3)]) is None


def test_cyclotomic_entries():
    s = sqrt_of_integer(2)
    A = [[s, coerce(1)], [coerce(1), s]]
    x = solve_linear(A, [coerce(1), coerce(0)])
    assert s * x[0] + x[1] == 1 and x[0] + s * x[1] == 0
