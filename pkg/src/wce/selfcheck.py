"""Invariant suites shared by ``wce selfcheck`` and the test-suite."""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from wce import tausolver as ts
from wce.rootdata import build_root_datum, check_root_datum, epsilon
from wce.twist import (OperatorBank, _propagator_rational, degree_num, fractional_residue, gbinom,
                       leading_coefficient, w_operator)


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"[{status}] {self.name} ({self.seconds:.2f}s){extra}"


# -- individual suites ---------------------------------------------------------------------

def check_coxeter(datum):
    problems = check_root_datum(datum)
    return not problems, "; ".join(problems)


def check_epsilon(datum, limit=None):
    """Bimultiplicativity and eps(a, a) = (-1)^{|a|^2(|a|^2+1)/2} on roots."""
    roots = list(datum.roots)
    if limit:
        roots = roots[:limit]
    for a in roots:
        n = datum.pair(a, a)
        if epsilon(datum, a, a) != (-1) ** (n * (n + 1) // 2):
            return False, f"diagonal law fails at {a.coords}"
    for a, b, c in product(roots, repeat=3):
        e_ac = epsilon(datum, a, c)
        if epsilon(datum, a + b, c) != e_ac * epsilon(datum, b, c):
            return False, f"not multiplicative in the first slot at {a.coords}, {b.coords}, {c.coords}"
        if epsilon(datum, c, a + b) != epsilon(datum, c, a) * epsilon(datum, c, b):
            return False, f"not multiplicative in the second slot at {a.coords}, {b.coords}, {c.coords}"
    return True, f"{len(roots)} roots"


def propagator_series(a: Fraction, kmax: int):
    """Coefficients of s^(-2..kmax) in (1+s)^(-a) (1 + a s) / s^2, i.e. the propagator at lambda = 1."""
    base = [gbinom(-a, n) for n in range(kmax + 3)]
    num = [base[n] + (a * base[n - 1] if n else 0) for n in range(kmax + 3)]
    return {n - 2: c for n, c in enumerate(num)}


def check_propagator(datum, kmax=10):
    for i in range(1, datum.rank + 1):
        a = Fraction(datum.exponents[i - 1], datum.h)
        series = propagator_series(a, kmax)
        if series[-2] != 1:
            return False, f"i={i}: leading s^-2 coefficient {series[-2]}"
        if series[-1] != 0:
            return False, f"i={i}: s^-1 coefficient {series[-1]}"
        for k in range(kmax + 1):
            if series[k] != _propagator_rational(a, k):
                return False, f"i={i}, k={k}: {series[k]} != {_propagator_rational(a, k)}"
    return True, f"k <= {kmax}"


def check_integer_modes(datum, bank, window, mmax):
    h = datum.h
    for i in range(1, datum.rank + 1):
        for m_num in range(0, mmax * h + 1):
            if m_num % h == 0:
                continue
            res = fractional_residue(datum, None, i, m_num, window, bank)
            if res:
                return False, f"w_{i}: {len(res)} terms at lambda^(-{m_num}/{h}-1)"
    return True, ""


def check_operators(datum, bank, window, mmax):
    """Homogeneity, depth bound and leading coefficient of W_{i,m}."""
    h = datum.h
    for i in range(1, datum.rank + 1):
        mi = datum.exponents[i - 1]
        for m in range(mmax + 1):
            op = w_operator(datum, None, i, m, window, bank)
            for t in op.terms:
                if t.degree_num(datum) != (mi - m) * h:
                    return False, f"W_{i},{m}: term of degree {t.degree_num(datum)}/{h}"
                if t.depth() > mi:
                    return False, f"W_{i},{m}: depth {t.depth()} > {mi}"
            c = leading_coefficient(datum, i, m)
            ref = Fraction(h) ** mi
            for k in range(m + 1):
                ref *= Fraction(mi, h) + k
            if c != ref or not c:
                return False, f"c_{i},{m} = {c}, expected {ref}"
            lead = [t for t in op.terms if t.creations == ((1, 1),) * mi and t.annihilations == ((i, m),)]
            if degree_num(datum, ((i, m),)) <= window and (not lead or lead[0].coeff != c):
                return False, f"W_{i},{m}: leading term does not carry c_{i},{m}"
    return True, f"m <= {mmax}, window {window}/{h}"


def check_consistency(datum, bank, tau):
    pairs = []
    for i in range(1, datum.rank + 1):
        m = 0
        while m * datum.h + datum.exponents[i - 1] <= tau.truncation:
            pairs.append((i, m))
            m += 1
    ok, bad = ts.consistency_check(datum, bank, tau, pairs)
    if not ok:
        return False, f"{len(bad)} nonzero residuals, first {bad[0]}"
    ok, bad = ts.alternative_pivot_check(datum, bank, tau)
    if not ok:
        return False, f"alternative pivot residual {bad[0]}"
    return True, f"{len(pairs)} constraints"


def check_uniqueness(datum, bank, tau):
    monos = ts.monomials_up_to(datum, tau.truncation)
    for M in monos:
        if ts.perturbation_check(datum, bank, tau, M) is None:
            return False, f"perturbing {ts.format_t_monomial(M)} is not detected"
    return True, f"{len(monos)} coefficients"


def check_genus(datum, tau):
    F = ts.log_series(datum, tau)
    back = ts.exp_series(datum, F)
    if {m: c for m, c in back.coeffs.items() if c} != tau.coeffs:
        return False, "exp(log tau) != tau"
    return True, f"{len(F.coeffs)} monomials, genera {sorted(set(F.genus.values()))}"


# -- driver --------------------------------------------------------------------------------------

def default_sizes(datum, quick):
    """(operator window, m range, tau truncation) for a datum, numerators over h."""
    h = datum.h
    if datum.h == 2:
        return 9, 5, 9
    if quick:
        return h + 2, 1, 2 * h
    return 2 * h, 2, 3 * h


def run_suites(datum, gens, quick=False, sizes=None):
    window, mmax, trunc = sizes or default_sizes(datum, quick)
    bank = OperatorBank(datum, gens)
    results = []

    def run(name, fn, *args):
        t0 = time.perf_counter()
        try:
            ok, detail = fn(*args)
        except Exception as exc:  # a crashing suite is a failed suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, ok, detail, time.perf_counter() - t0))
        return ok

    run("coxeter element and eigenbasis", check_coxeter, datum)
    run("cocycle laws on roots", check_epsilon, datum, 8 if quick else None)
    run("propagator expansion", check_propagator, datum)
    run("integer lambda powers", check_integer_modes, datum, bank, window, mmax)
    run("operator homogeneity, depth, leading coefficient", check_operators, datum, bank, window, mmax)
    t0 = time.perf_counter()
    try:
        tau = ts.solve_tau(datum, truncation=trunc, bank=bank)
    except Exception as exc:
        results.append(CheckResult("tau recursion", False, f"{type(exc).__name__}: {exc}",
                                   time.perf_counter() - t0))
        return results
    results.append(CheckResult("tau recursion", True, f"truncation {trunc}/{datum.h}", time.perf_counter() - t0))
    run("consistency of all constraints", check_consistency, datum, bank, tau)
    run("uniqueness under perturbation", check_uniqueness, datum, bank, tau)
    run("genus integrality and exp(log)", check_genus, datum, tau)
    return results


def selfcheck(family, rank, gens_provider, quick=False):
    datum = build_root_datum(family, rank)
    gens, _ = gens_provider(datum)
    return run_suites(datum, gens, quick)


__all__ = ["CheckResult", "run_suites", "selfcheck", "propagator_series", "check_epsilon", "check_propagator",
           "check_integer_modes", "check_operators", "check_consistency", "check_uniqueness", "check_genus",
           "check_coxeter", "default_sizes", "math"]
