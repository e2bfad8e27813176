import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wce import tausolver as ts
from wce.fock import FockElement
from wce.numfield import coerce, field, sqrt_of_integer
from wce.rootdata import build_root_datum
from wce.twist import OperatorBank

# Intersection numbers <tau_d1 ... tau_dn> of psi classes; log tau carries them divided by |Aut|.
WITTEN_KONTSEVICH = {
    (0, 0, 0): Fraction(1),
    (1,): Fraction(1, 24),
    (0, 0, 0, 1): Fraction(1),
    (1, 1): Fraction(1, 24),
    (0, 2): Fraction(1, 24),
    (4,): Fraction(1, 1152),
    (1, 1, 1): Fraction(1, 12),
    (0, 1, 2): Fraction(1, 12),
    (2, 3): Fraction(29, 5760),
    (0, 0, 0, 0, 2): Fraction(1),
}


def automorphisms(ds):
    out = 1
    for d in set(ds):
        for k in range(1, ds.count(d) + 1):
            out *= k
    return out


def a1_mono(ds):
    return tuple(sorted((1, d) for d in ds))


@pytest.fixture(scope="module")
def a1_tau(a1):
    d, gens, bank = a1
    return ts.solve_tau(d, gens, truncation=13, bank=bank)


def test_normalization(a1_tau):
    assert a1_tau[()] == 1


def test_a1_intersection_numbers(a1, a1_tau):
    d, _, _ = a1
    F = ts.log_series(d, a1_tau)
    for ds, value in WITTEN_KONTSEVICH.items():
        assert F[a1_mono(ds)] == value / automorphisms(ds), ds


def test_a1_virasoro_oracle_agrees(a1_tau):
    oracle = ts.virasoro_solve(13)
    mine = {tuple(p for _, p in m): c.to_rational() for m, c in a1_tau.coeffs.items()}
    assert {k: v for k, v in oracle.items() if v} == mine


def test_a1_log_examples(a1, a1_tau):
    d, _, _ = a1
    F = ts.log_series(d, a1_tau)
    assert F[((1, 0),) * 3] == Fraction(1, 6)
    assert F[((1, 1),)] == Fraction(1, 24)


def test_virasoro_operator_closed_form():
    L0 = ts.VirasoroOperator(0, 4)
    assert (Fraction(1, 16), (), ()) in L0.terms
    L1 = ts.VirasoroOperator(1, 4)
    # (2p+2m+1)!!/(2^{m+1}(2p-1)!!) at p = 0, m = 1 is 3/4; quadratic part (1!!1!!)/2^2 * 1/2
    assert (Fraction(3, 4), (0,), (1,)) in L1.terms
    assert (Fraction(1, 8), (), (0, 0)) in L1.terms
    Lm1 = ts.VirasoroOperator(-1, 3)
    assert (Fraction(1, 2), (0, 0), ()) in Lm1.terms


def test_virasoro_compare(a1):
    d, _, bank = a1
    rep = ts.virasoro_compare(d, bank, 5, 9)
    assert rep["ok"], rep["mismatches"][:3]
    assert set(rep["gamma"].values()) == {1} and set(rep["rho"].values()) == {1}


def test_tau_annihilated_by_virasoro(a1_tau):
    assert ts.virasoro_annihilates(a1_tau, 5) == []


def test_a1_consistency_and_alternative_pivots(a1):
    d, gens, bank = a1
    tau = ts.solve_tau(d, gens, truncation=9, bank=bank)
    ok, bad = ts.consistency_check(d, bank, tau, [(1, m) for m in range(5)])
    assert ok, bad[:2]
    assert ts.alternative_pivot_check(d, bank, tau)[0]


def test_a1_perturbation_every_coefficient(a1):
    d, gens, bank = a1
    tau = ts.solve_tau(d, gens, truncation=9, bank=bank)
    for M in ts.monomials_up_to(d, 9):
        hit = ts.perturbation_check(d, bank, tau, M)
        assert hit is not None, M
        if M:
            # the violated constraint is the pivot of the perturbed monomial
            assert (hit[0], hit[1]) == ts.pivot_of(d, M)


def test_goal_directed_matches_frontier(a1):
    d, gens, bank = a1
    full = ts.solve_tau(d, gens, truncation=11, bank=bank)
    goal = ((1, 0), (1, 1), (1, 2))
    part = ts.solve_tau(d, gens, mode="goal_directed", targets=[goal], bank=bank)
    assert part[goal] == full[goal]
    assert all(full[m] == c for m, c in part.coeffs.items())


def test_d4_goal(d4):
    d, gens, bank = d4
    solver = ts.TauSolver(d, bank=bank)
    goal = ((1, 0), (1, 0), (4, 0))
    tau = ts.solve_tau(d, mode="goal_directed", targets=[goal], solver=solver)
    assert ts.log_coefficients(tau.__getitem__, [goal])[goal] == Fraction(1, 2)


@pytest.fixture(scope="module")
def d4_tau(d4):
    d, gens, bank = d4
    return ts.solve_tau(d, gens, truncation=18, bank=bank)


def test_d4_consistency_frontier(d4, d4_tau):
    d, _, bank = d4
    pairs = [(i, m) for i in range(1, 5) for m in range(3)]
    assert ts.consistency_check(d, bank, d4_tau, pairs)[0]
    assert ts.alternative_pivot_check(d, bank, d4_tau)[0]


def test_d4_perturbation(d4, d4_tau):
    d, _, bank = d4
    for M in ts.monomials_up_to(d, 18):
        assert ts.perturbation_check(d, bank, d4_tau, M) is not None, M


def test_d4_genus_tags(d4, d4_tau):
    d, _, _ = d4
    F = ts.log_series(d, d4_tau)
    assert set(F.genus.values()) <= {0, 1}
    assert F[((1, 0), (1, 0), (4, 0))] == Fraction(1, 2)


def test_genus_examples():
    a1 = build_root_datum("A", 1)
    d4 = build_root_datum("D", 4)
    assert ts.genus_of(a1, ((1, 0),) * 3) == 0
    assert ts.genus_of(a1, ((1, 1),)) == 1
    assert ts.genus_of(d4, ((4, 0),) * 7) == 0
    assert ts.genus_of(d4, ((1, 1),)) == 1
    with pytest.raises(ts.GenusError):
        ts.genus_of(d4, ((1, 0),))
    with pytest.raises(ts.GenusError):
        ts.genus_of(d4, ())


def test_small_phase_space_support():
    d4 = build_root_datum("D", 4)
    monos = ts.genus_zero_primary_monomials(d4)
    assert max(ts.degree_num(d4, m) for m in monos) == 35
    assert len(monos) == len(set(monos))


# -- formal log / exp ----------------------------------------------------------------------------

A1 = build_root_datum("A", 1)
coef = st.fractions(min_value=-3, max_value=3, max_denominator=5)


@st.composite
def series(draw, trunc=7):
    monos = [m for m in ts.monomials_up_to(A1, trunc) if m]
    coeffs = {(): field(24).one}
    for m in monos:
        c = draw(coef)
        if c:
            coeffs[m] = coerce(c)
    return ts.TauSeries(coeffs, 2, trunc, "A", 1, (1,), 24)


@given(series())
@settings(max_examples=40, deadline=None)
def test_exp_log_roundtrip(tau):
    monos = ts.monomials_up_to(A1, tau.truncation)
    F = ts.log_coefficients(tau.__getitem__, monos)
    Fs = ts.TauSeries({m: c for m, c in F.items() if c}, 2, tau.truncation, "A", 1, (1,), 24)
    back = ts.exp_series(A1, Fs)
    assert {m: c for m, c in back.coeffs.items() if c} == tau.coeffs


def test_log_of_one_plus_monomial():
    M = ((1, 0),)
    c = Fraction(3, 5)
    tau = ts.TauSeries({(): coerce(1), M: coerce(c)}, 2, 3, "A", 1, (1,), 24)
    F = ts.log_coefficients(tau.__getitem__, [M * 3])
    assert F[M] == c
    # M^2 in tau is 0, so F[M^2] = -c^2/2 and F[M^3] = c^3/3 after multiplicity bookkeeping
    assert F[M * 2] == -c ** 2 / 2
    assert F[M * 3] == c ** 3 / 3
    assert ts.log_coefficients(lambda m: coerce(int(not m)), [M * 2]) == {M: 0, M * 2: 0}


def test_series_json_roundtrip(a1, a1_tau):
    d, _, _ = a1
    text = json.dumps(a1_tau.to_json())
    back = ts.TauSeries.from_json(json.loads(text))
    assert back.coeffs == a1_tau.coeffs and back.header() == a1_tau.header()
    F = ts.log_series(d, a1_tau)
    F2 = ts.LogSeries.from_json(json.loads(json.dumps(F.to_json())))
    assert F2.coeffs == F.coeffs and F2.genus == F.genus
    assert json.dumps(a1_tau.to_json()) == text  # deterministic ordering


@given(st.lists(st.tuples(st.integers(1, 4), st.integers(0, 5)), max_size=5))
def test_monomial_parse_roundtrip(factors):
    mono = tuple(sorted(factors))
    assert ts.parse_monomial(ts.format_t_monomial(mono)) == mono


def test_parse_errors():
    with pytest.raises(ValueError):
        ts.parse_monomial("(1,0)^2 x")


# -- potentials ----------------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def d4_potential(d4):
    d, gens, bank = d4
    return ts.frobenius_potential(d, ts.TauSolver(d, bank=bank))


def test_d4_potential_exact(d4_potential):
    assert ts.compare_potentials(d4_potential, ts.d4_reference_potential()) == []
    s2 = sqrt_of_integer(2)
    assert d4_potential[(0, 3, 0, 1)] * 18 * s2 == 1


def test_d4_forms(d4_potential):
    dub = ts.dubrovin_form(d4_potential)
    assert dub == {(2, 0, 0, 1): Fraction(1, 2), (1, 1, 1, 0): 1, (0, 3, 0, 1): 1, (0, 0, 3, 1): 1,
                   (0, 1, 1, 3): 6, (0, 0, 0, 7): Fraction(54, 35)}
    assert ts.compare_potentials(ts.fjrw_form(d4_potential), ts.fjrw_reference()) == []


def test_wdvv(d4_potential):
    assert ts.wdvv_check(d4_potential)
    assert ts.is_quasi_homogeneous(d4_potential, (3, 2, 2, 1))
    broken = dict(d4_potential)
    broken[(0, 0, 0, 7)] = coerce(Fraction(1, 272159))
    assert not ts.wdvv_check(broken)
    assert ts.wdvv_check({(3,): coerce(Fraction(1, 6))})
    with pytest.raises(ValueError):
        ts.wdvv_check({(0, 4): coerce(1)})


def test_a2_potential(a2):
    d, gens, bank = a2
    pot = ts.frobenius_potential(d, ts.TauSolver(d, bank=bank))
    assert pot[(2, 1)] == Fraction(1, 2)
    assert ts.wdvv_check(pot)
    assert ts.is_quasi_homogeneous(pot, [d.h + 1 - m for m in d.exponents])


# -- fatal errors ----------------------------------------------------------------------------------------

def test_wrong_normalization_is_fatal(a1):
    d, gens, _ = a1
    bank = OperatorBank(d, [gens[0] * 2])
    with pytest.raises(ts.SolverError):
        ts.solve_tau(d, truncation=3, bank=bank)


class _LoopingBank:
    """A fake operator whose every term reads the monomial being solved at higher degree."""

    def terms_with_creation(self, i, m_num, C):
        if C == ((1, 1),):
            return ((coerce(1), ((1, 0), (1, 5))),)
        return ()


def test_upward_dependency_is_fatal():
    d = build_root_datum("A", 1)
    with pytest.raises(ts.SolverError):
        ts.TauSolver(d, bank=_LoopingBank()).coeff(((1, 0),))


def test_empty_generators_rejected():
    d = build_root_datum("A", 1)
    with pytest.raises(ts.SolverError):
        ts.solve_tau(d, truncation=3, bank=OperatorBank(d, [FockElement({}, 24)]))
