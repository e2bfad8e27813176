"""Acceptance suite: one PASS/FAIL line per criterion.

Every comparison is exact (tolerance 0 in the cyclotomic field); the only
non-exact quantity is wall-clock time, pinned below.  Run directly with
``python3 tests/test_acceptance.py`` or through pytest (the lines are
printed in the terminal summary).
"""
import time
from fractions import Fraction

from wce import tausolver as ts
from wce.fock import verified_generators, verify_in_W
from wce.rootdata import build_root_datum
from wce.selfcheck import (check_consistency, check_coxeter, check_epsilon, check_integer_modes, check_operators,
                           check_propagator, check_uniqueness)
from wce.twist import OperatorBank, w_operator

TOLERANCE = 0  # exact arithmetic everywhere
POTENTIAL_RUNTIME_BUDGET_S = 1800.0  # goal-directed D4 potential
A1_WINDOW = 9  # degree 9/2
A1_MMAX = 5
D4_TRUNCATION = 18  # degree 3
D4_OPERATOR_WINDOW = 12
D4_OPERATOR_MMAX = 2

RESULTS = {}


def record(n, name, ok, detail=""):
    line = f"ACCEPTANCE {n} {name}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
    RESULTS[n] = line
    print(line)
    return ok


_state = {}


def _d4():
    if "d4" not in _state:
        d = build_root_datum("D", 4)
        gens, report = verified_generators(d, "builtin")
        _state["d4"] = (d, gens, report, OperatorBank(d, gens))
    return _state["d4"]


def _a1():
    if "a1" not in _state:
        d = build_root_datum("A", 1)
        gens, _ = verified_generators(d, "builtin")
        _state["a1"] = (d, gens, OperatorBank(d, gens))
    return _state["a1"]


def _d4_potential():
    if "pot" not in _state:
        d, _, _, bank = _d4()
        t0 = time.perf_counter()
        pot = ts.frobenius_potential(d, ts.TauSolver(d, bank=bank))
        _state["pot"] = (pot, time.perf_counter() - t0)
    return _state["pot"]


def _d4_tau():
    if "d4tau" not in _state:
        d, _, _, bank = _d4()
        _state["d4tau"] = ts.solve_tau(d, truncation=D4_TRUNCATION, bank=bank)
    return _state["d4tau"]


def _a1_tau(trunc=A1_WINDOW):
    key = ("a1tau", trunc)
    if key not in _state:
        d, _, bank = _a1()
        _state[key] = ts.solve_tau(d, truncation=trunc, bank=bank)
    return _state[key]


def test_criterion_1_d4_potential():
    pot, seconds = _d4_potential()
    diffs = ts.compare_potentials(pot, ts.d4_reference_potential())
    ok = not diffs and seconds < POTENTIAL_RUNTIME_BUDGET_S
    record(1, "D4 potential reproduction", ok,
           f"{len(pot)} monomials, {len(diffs)} differences, solve {seconds:.1f}s goal-directed")
    assert ok, diffs


def test_criterion_2_coordinate_forms():
    pot, _ = _d4_potential()
    dub = ts.dubrovin_form(pot)
    dub_ref = {(2, 0, 0, 1): Fraction(1, 2), (1, 1, 1, 0): Fraction(1), (0, 3, 0, 1): Fraction(1),
               (0, 0, 3, 1): Fraction(1), (0, 1, 1, 3): Fraction(6), (0, 0, 0, 7): Fraction(54, 35)}
    d1 = ts.compare_potentials(dub, dub_ref)
    d2 = ts.compare_potentials(ts.fjrw_form(pot), ts.fjrw_reference())
    ok = not d1 and not d2
    record(2, "Dubrovin and FJRW forms", ok, f"{len(d1)} + {len(d2)} differences")
    assert ok, (d1, d2)


def test_criterion_3_a1_oracle():
    d, gens, bank = _a1()
    rep = ts.virasoro_compare(d, bank, A1_MMAX, A1_WINDOW)
    op1 = w_operator(d, gens, 1, 1, A1_WINDOW, bank)
    const = [t.coeff for t in op1.terms if not t.creations and not t.annihilations]
    tau = _a1_tau()
    annihilated = ts.virasoro_annihilates(tau, A1_MMAX, rep["gamma"]) == []
    oracle = ts.virasoro_solve(A1_WINDOW)
    same_tau = {k: v for k, v in oracle.items() if v} == {tuple(p for _, p in m): c.to_rational()
                                                          for m, c in tau.coeffs.items()}
    F = ts.log_series(d, tau)
    logs = F[((1, 0),) * 3] == Fraction(1, 6) and F[((1, 1),)] == Fraction(1, 24)
    ok = rep["ok"] and const == [Fraction(1, 16)] and annihilated and same_tau and logs
    record(3, "A1 oracle equivalence", ok,
           f"calibration ok={rep['ok']}, W_1,1 constant {[str(c) for c in const]}, L_m annihilate tau={annihilated}, "
           f"oracle tau equal={same_tau}")
    assert ok


def test_criterion_4_generators():
    d, gens, report, _ = _d4()
    final_ok = all(verify_in_W(d, g)[0] for g in gens)
    degrees = [g.degrees() for g in gens]
    replaced = [e["index"] for e in report if e.get("replaced_by")]
    for e in report:
        if e.get("replaced_by"):
            assert e["residual_terms"], "a replaced generator must report its residuals"
    ok = final_ok and degrees == [[2], [4], [4], [6]]
    detail = "builtin generators all verify" if not replaced else \
        f"builtin w_{replaced} fail screening (residuals reported); replaced by kernel_solve, final set verified"
    record(4, "Generator verification", ok, detail)
    assert ok


def test_criterion_5_structural():
    a1, _, a1_bank = _a1()
    d4, _, _, d4_bank = _d4()
    checks = []
    for name in (("A", 1), ("A", 2), ("A", 3), ("D", 4)):
        dd = build_root_datum(*name)
        checks.append((f"{dd.name} cocycle", check_epsilon(dd)))
        checks.append((f"{dd.name} coxeter", check_coxeter(dd)))
        checks.append((f"{dd.name} propagator", check_propagator(dd, 10)))
    checks.append(("A1 integer modes", check_integer_modes(a1, a1_bank, A1_WINDOW, A1_MMAX)))
    checks.append(("A1 operators", check_operators(a1, a1_bank, A1_WINDOW, A1_MMAX)))
    checks.append(("D4 integer modes", check_integer_modes(d4, d4_bank, D4_OPERATOR_WINDOW, D4_OPERATOR_MMAX)))
    checks.append(("D4 operators", check_operators(d4, d4_bank, D4_OPERATOR_WINDOW, D4_OPERATOR_MMAX)))
    failed = [f"{n}: {det}" for n, (ok, det) in checks if not ok]
    record(5, "Structural invariant suites", not failed, f"{len(checks)} suites" + (f"; {failed}" if failed else ""))
    assert not failed


def test_criterion_6_uniqueness():
    a1, _, a1_bank = _a1()
    d4, _, _, d4_bank = _d4()
    r1 = check_uniqueness(a1, a1_bank, _a1_tau())
    r2 = check_uniqueness(d4, d4_bank, _d4_tau())
    ok = r1[0] and r2[0]
    record(6, "Uniqueness under perturbation", ok, f"A1: {r1[1]}; D4: {r2[1]}")
    assert ok


def test_criterion_7_consistency():
    a1, _, a1_bank = _a1()
    d4, _, _, d4_bank = _d4()
    r1 = check_consistency(a1, a1_bank, _a1_tau())
    r2 = check_consistency(d4, d4_bank, _d4_tau())
    ok = r1[0] and r2[0]
    record(7, "Consistency and overdetermination", ok, f"A1: {r1[1]}; D4: {r2[1]}")
    assert ok


def test_criterion_8_genus_and_wdvv():
    a1, _, _ = _a1()
    d4, _, _, _ = _d4()
    problems = []
    for datum, tau in ((a1, _a1_tau(13)), (d4, _d4_tau())):
        try:
            F = ts.log_series(datum, tau)
            if any(g < 0 for g in F.genus.values()):
                problems.append(f"{datum.name}: negative genus")
        except ts.GenusError as exc:
            problems.append(str(exc))
    pot, _ = _d4_potential()
    if not (ts.wdvv_check(pot) and ts.is_quasi_homogeneous(pot, (3, 2, 2, 1))):
        problems.append("D4 WDVV/quasi-homogeneity")
    a2 = build_root_datum("A", 2)
    g2, _ = verified_generators(a2, "kernel_solve")
    pot2 = ts.frobenius_potential(a2, ts.TauSolver(a2, g2))
    if not (ts.wdvv_check(pot2) and ts.is_quasi_homogeneous(pot2, (3, 2))):
        problems.append("A2 WDVV/quasi-homogeneity")
    record(8, "Genus and WDVV properties", not problems, "; ".join(problems))
    assert not problems


if __name__ == "__main__":
    for fn in (test_criterion_1_d4_potential, test_criterion_2_coordinate_forms, test_criterion_3_a1_oracle,
               test_criterion_4_generators, test_criterion_5_structural, test_criterion_6_uniqueness,
               test_criterion_7_consistency, test_criterion_8_genus_and_wdvv):
        try:
            fn()
        except AssertionError:
            pass
