from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wce.fock import (FockElement, GeneratorError, LatticeState, generator_normal_form_violations,
                      heisenberg_act, invariant_generators, invariant_to_fock, reflect_polynomial, screening, u,
                      verified_generators, verify_in_W, vertex_mode, w_generators)
from wce.rootdata import LatticeVector, build_root_datum


def vacuum(d):
    return LatticeState(FockElement.constant(1, d.conductor), LatticeVector((0,) * d.rank, "root"))


def test_a1_alpha_state_and_screening():
    d = build_root_datum("A", 1)
    alpha = d.simple_root(1)
    a_state = heisenberg_act(d, alpha, -1, vacuum(d))
    # alpha_1 alpha_{-1} |0> = (alpha|alpha) |0> = 2
    assert heisenberg_act(d, alpha, 1, a_state).fock == 2
    # e^alpha_(0) alpha_{-1}|0> = -(alpha|alpha) e^alpha
    out = vertex_mode(d, alpha, 0, a_state)
    assert out.fock == -2 and out.charge == alpha
    assert screening(d, 1, a_state.fock) == -2
    # e^alpha_(-2)|0> = alpha_{-1} e^alpha
    assert vertex_mode(d, alpha, -2, vacuum(d)).fock == a_state.fock
    # the Virasoro-type element (alpha t^-1)^2 lies in the kernel
    assert not screening(d, 1, a_state.fock * a_state.fock)


def test_heisenberg_zero_mode_reads_charge():
    d = build_root_datum("A", 2)
    a1, a2 = d.simple_root(1), d.simple_root(2)
    st_ = LatticeState(FockElement.constant(1, d.conductor), a2)
    assert heisenberg_act(d, a1, 0, st_).fock == -1


def test_d4_builtin_report(d4_report):
    d, gens, report = d4_report
    assert [e["verified"] for e in report[:3]] == [True, True, True]
    # the transcribed degree-6 generator misses terms; it is replaced and the residual kept
    w4 = report[3]
    assert not w4["verified"] and w4["replaced_by"] == "kernel_solve"
    assert all(w4["residual_terms"][i] > 0 for i in range(1, 5))
    assert [g.degrees() for g in gens] == [[2], [4], [4], [6]]
    for g in gens:
        assert verify_in_W(d, g)[0]


def test_d4_builtin_w4_differs_only_in_double_derivative_terms(d4_report):
    d, gens, _ = d4_report
    raw = w_generators(d, "builtin")[3]
    built = w_generators(d, "mode_construction")[3]
    diff = built - raw
    # the missing monomials all have the shape u[a,1] u[b,1] u[c,2] u[e,2]
    assert len(diff) == 34
    assert all(sorted(n for _, n in m) == [1, 1, 2, 2] for m in diff.terms)
    # the kernel-solve replacement differs from the mode construction by an element of W
    assert verify_in_W(d, gens[3] - built)[0]


@pytest.mark.parametrize("fam,rank", [("A", 1), ("A", 2), ("A", 3)])
def test_kernel_solve_small(fam, rank):
    d = build_root_datum(fam, rank)
    gens = w_generators(d, "kernel_solve")
    for i, g in enumerate(gens, start=1):
        assert verify_in_W(d, g)[0]
        assert g.degrees() == [d.exponents[i - 1] + 1]
        assert generator_normal_form_violations(d, i, g) == []


def test_kernel_solve_a1_is_square():
    d = build_root_datum("A", 1)
    (w,) = w_generators(d, "kernel_solve")
    assert w == u(1, 1) * u(1, 1) / 2


def test_mode_construction_d4_verifies():
    d = build_root_datum("D", 4)
    gens = w_generators(d, "mode_construction")
    assert all(verify_in_W(d, g)[0] for g in gens)


def test_verified_generators_kernel_d4_match(d4):
    d, gens, _ = d4
    ks, report = verified_generators(d, "kernel_solve")
    assert all(e["verified"] for e in report)
    assert ks[3] == gens[3]


@pytest.mark.parametrize("fam,rank", [("A", 2), ("A", 3), ("D", 4)])
def test_invariants_weyl_invariant(fam, rank):
    d = build_root_datum(fam, rank)
    for p in invariant_generators(d):
        for j in range(1, rank + 1):
            assert reflect_polynomial(d, p, j) == p


def test_invariant_to_fock_is_t1_part_of_generator(a2):
    d, gens, _ = a2
    for i, (p, w) in enumerate(zip(invariant_generators(d), gens), start=1):
        mult = d.h if i == d.rank else 1
        assert w.t1_part() * mult == invariant_to_fock(d, p)


def test_errors():
    with pytest.raises(GeneratorError):
        w_generators(build_root_datum("E", 6), "builtin")
    with pytest.raises(GeneratorError):
        w_generators(build_root_datum("A", 2), "mode_construction")


symbols = st.tuples(st.integers(1, 3), st.integers(1, 3))
polys = st.dictionaries(st.lists(symbols, max_size=3).map(lambda m: tuple(sorted(m))),
                        st.fractions(min_value=-5, max_value=5, max_denominator=6), max_size=4) \
    .map(lambda t: FockElement(t, 24))


@given(polys, polys, polys)
@settings(max_examples=50, deadline=None)
def test_fock_ring_and_leibniz(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b).derivative(1, 1) == a.derivative(1, 1) * b + a * b.derivative(1, 1)


@given(polys)
@settings(max_examples=50, deadline=None)
def test_fock_json_roundtrip(a):
    assert FockElement.from_json(a.to_json(), 24) == a


def test_degree_helpers():
    w = u(1, 1) * u(2, 2) + u(1, 3)
    assert w.degrees() == [3]
    assert w.is_homogeneous()
    assert w.t1_part() == 0
    assert w.coeff([(2, 2), (1, 1)]) == Fraction(1)
