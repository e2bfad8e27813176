"""Solve the W-constraints for tau by graded recursion.

Monomials in the variables t^{i,p} are sorted tuples of (i, p) pairs with
repetition; deg t^{i,p} = p + m_i/h and degrees are integer numerators over h.

For a monomial M the solver picks a pivot factor t^{i,p} of M (largest
degree, then largest i, then largest p) and reads off the coefficient of
M / t^{i,p} in W_{i,p} tau = 0.  After the dilaton shift q^{1,1} = t^{1,1} - 1
the only contribution of degree deg M is

    (-1)^{m_i} c_{i,p} * mult_{(i,p)}(M) * tau[M],

every other contribution reads tau at strictly lower degree.
"""
from __future__ import annotations

import json
import math
import sys
from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product

from wce.linalg import solve_linear
from wce.numfield import CycScalar, coerce, field, sqrt_of_integer
from wce.numfield import dot as cyc_dot
from wce.twist import OperatorBank, degree_num, leading_coefficient


class SolverError(RuntimeError):
    pass


class GenusError(ValueError):
    pass


# -- monomial utilities ----------------------------------------------------------------------

def mono_add(a, b):
    return tuple(sorted(a + b))


def mono_sub(a, b):
    """a - b for multisets (b must be contained in a)."""
    rest = list(a)
    for x in b:
        rest.remove(x)
    return tuple(rest)


def submultisets(mono):
    """Every distinct sub-multiset of ``mono`` (including empty and itself)."""
    items = sorted(Counter(mono).items())
    for counts in product(*[range(k + 1) for _, k in items]):
        out = []
        for (v, _), c in zip(items, counts):
            out += [v] * c
        yield tuple(out)


def falling_factor(full, part):
    """prod_v full_v! / part_v! (derivative factor of d^{full-part} on t^full)."""
    cf = Counter(full)
    cp = Counter(part)
    out = 1
    for v, k in cf.items():
        out *= math.factorial(k) // math.factorial(cp.get(v, 0))
    return out


def variables_up_to(datum, dmax):
    h = datum.h
    out = []
    for i, m in enumerate(datum.exponents, start=1):
        p = 0
        while p * h + m <= dmax:
            out.append((i, p))
            p += 1
    return sorted(out, key=lambda v: (v[1] * h + datum.exponents[v[0] - 1], v))


def monomials_up_to(datum, dmax):
    """All monomials of degree numerator <= dmax, sorted by (degree, monomial)."""
    vars_ = variables_up_to(datum, dmax)
    weights = [degree_num(datum, [v]) for v in vars_]
    out = []

    def rec(start, cur, deg):
        out.append((deg, tuple(sorted(cur))))
        for k in range(start, len(vars_)):
            w = weights[k]
            if deg + w <= dmax:
                cur.append(vars_[k])
                rec(k, cur, deg + w)
                cur.pop()

    rec(0, [], 0)
    out.sort()
    return [m for _, m in out]


def format_t_monomial(mono) -> str:
    if not mono:
        return "1"
    return " ".join(f"({i},{p})" + (f"^{k}" if k > 1 else "") for (i, p), k in sorted(Counter(mono).items()))


def parse_monomial(text: str):
    """Parse '(i,p)^k (j,q) ...' into a monomial."""
    import re

    out = []
    text = text.strip()
    if text in ("", "1"):
        return ()
    pos = 0
    pat = re.compile(r"\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*(?:\^\s*(\d+))?\s*")
    while pos < len(text):
        m = pat.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse monomial near {text[pos:]!r}")
        i, p, k = int(m.group(1)), int(m.group(2)), int(m.group(3) or 1)
        out += [(i, p)] * k
        pos = m.end()
    return tuple(sorted(out))


# -- series containers ---------------------------------------------------------------------------

@dataclass
class TauSeries:
    coeffs: dict
    h: int
    truncation: int
    family: str = ""
    rank: int = 0
    exponents: tuple = ()
    conductor: int = 24

    def __getitem__(self, mono):
        return self.coeffs.get(tuple(sorted(mono)), field(self.conductor).zero)

    def header(self):
        return {"family": self.family, "rank": self.rank, "h": self.h, "exponents": list(self.exponents),
                "conductor": self.conductor, "truncation": self.truncation}

    def to_json(self, genus=None):
        entries = []
        for mono in sorted(self.coeffs, key=lambda m: (_deg_h(self, m), m)):
            c = self.coeffs[mono]
            e = {"monomial": [[i, p, k] for (i, p), k in sorted(Counter(mono).items())], "value": c.serialize()}
            if genus is not None:
                e["genus"] = genus[mono]
            entries.append(e)
        return {"header": self.header(), "entries": entries}

    @classmethod
    def from_json(cls, data):
        hd = data["header"]
        coeffs = {}
        for e in data["entries"]:
            mono = []
            for i, p, k in e["monomial"]:
                mono += [(i, p)] * k
            coeffs[tuple(sorted(mono))] = CycScalar.deserialize(e["value"])
        return cls(coeffs, hd["h"], hd["truncation"], hd["family"], hd["rank"], tuple(hd["exponents"]),
                   hd["conductor"])


@dataclass
class LogSeries(TauSeries):
    genus: dict = dc_field(default_factory=dict)

    def to_json(self):
        return TauSeries.to_json(self, self.genus)

    @classmethod
    def from_json(cls, data):
        base = TauSeries.from_json(data)
        genus = {}
        for e in data["entries"]:
            mono = []
            for i, p, k in e["monomial"]:
                mono += [(i, p)] * k
            genus[tuple(sorted(mono))] = e["genus"]
        return cls(base.coeffs, base.h, base.truncation, base.family, base.rank, base.exponents,
                   base.conductor, genus)


def _deg_h(series, mono):
    return sum(p * series.h + series.exponents[i - 1] for i, p in mono)


# -- the solver --------------------------------------------------------------------------------------

def pivot_of(datum, mono):
    h = datum.h
    ex = datum.exponents
    return max(set(mono), key=lambda v: (v[1] * h + ex[v[0] - 1], v[0], v[1]))


class TauSolver:
    """Graded recursion for the coefficients of tau.

    ``coeff`` is demand driven and memoized (goal-directed mode); ``frontier``
    fills every monomial up to a degree bound.
    """

    def __init__(self, datum, gens=None, bank: OperatorBank | None = None):
        if bank is None:
            bank = OperatorBank(datum, gens)
        self.datum = datum
        self.bank = bank
        self.N = datum.conductor
        self.zero = field(self.N).zero
        self.known = {(): field(self.N).one}
        self.pivot_checks = 0

    def degree(self, mono):
        return degree_num(self.datum, mono)

    def coeff(self, mono):
        mono = tuple(sorted(mono))
        hit = self.known.get(mono)
        if hit is not None:
            return hit
        val = self._solve(mono)
        self.known[mono] = val
        return val

    def _solve(self, M):
        datum = self.datum
        h = datum.h
        D = self.degree(M)
        i, p = pivot_of(datum, M)
        mi = datum.exponents[i - 1]
        T = mono_sub(M, [(i, p)])
        m_num = p * h
        pairs = []
        pivot = None
        for C2 in submultisets(T):
            c0 = C2.count((1, 1))
            R = mono_sub(T, C2)
            for j in range(0, mi + 1):
                C = mono_add(C2, ((1, 1),) * j)
                terms = self.bank.terms_with_creation(i, m_num, C)
                if not terms:
                    continue
                sb = math.comb(c0 + j, j) * (-1) ** j
                for coef, A in terms:
                    full = mono_add(R, A)
                    if full == M:
                        if j != mi or C != ((1, 1),) * mi or A != ((i, p),):
                            raise SolverError(f"monomial {format_t_monomial(M)} depends on itself through "
                                              f"a non-pivot term of W_({i},{p})")
                        pivot = coef * sb * falling_factor(full, R)
                        continue
                    if self.degree(full) >= D:
                        raise SolverError(f"coefficient of {format_t_monomial(M)} (degree {D}/{h}) depends on "
                                          f"{format_t_monomial(full)} of degree {self.degree(full)}/{h}")
                    val = self.coeff(full)
                    if val:
                        pairs.append((coef * (sb * falling_factor(full, R)), val))
        if pivot is None or not pivot:
            raise SolverError(f"no pivot term for {format_t_monomial(M)} in W_({i},{p})")
        expected = (-1) ** mi * leading_coefficient(datum, i, p) * M.count((i, p))
        if pivot != expected:
            raise SolverError(f"pivot coefficient {pivot} differs from {expected}")
        self.pivot_checks += 1
        return -cyc_dot(pairs, self.N) / pivot

    def frontier(self, dmax):
        for mono in monomials_up_to(self.datum, dmax):
            self.coeff(mono)
        return self.series(dmax)

    def series(self, dmax):
        d = self.datum
        coeffs = {m: c for m, c in self.known.items() if c and self.degree(m) <= dmax}
        return TauSeries(coeffs, d.h, dmax, d.family, d.rank, d.exponents, d.conductor)


def solve_tau(datum, gens=None, truncation=0, mode="frontier", targets=(), bank=None, solver=None):
    """tau up to degree numerator ``truncation`` (frontier) or on the targets' cones (goal_directed)."""
    solver = solver or TauSolver(datum, gens, bank)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        if mode == "frontier":
            return solver.frontier(truncation)
        if mode == "goal_directed":
            for t in targets:
                solver.coeff(t)
            top = max([solver.degree(t) for t in targets] + [truncation])
            return solver.series(top)
        raise ValueError(f"unknown mode {mode!r}")
    finally:
        sys.setrecursionlimit(old)


# -- applying constraints -------------------------------------------------------------------------------

def constraint_coefficient(datum, bank, coeff_of, i, m, T):
    """Coefficient of the monomial T in W_{i,m} tau, with tau read through coeff_of."""
    h = datum.h
    mi = datum.exponents[i - 1]
    pairs = []
    for C2 in submultisets(T):
        c0 = C2.count((1, 1))
        R = mono_sub(T, C2)
        for j in range(0, mi + 2):
            C = mono_add(C2, ((1, 1),) * j)
            terms = bank.terms_with_creation(i, m * h, C)
            if not terms:
                continue
            sb = math.comb(c0 + j, j) * (-1) ** j
            for coef, A in terms:
                full = mono_add(R, A)
                val = coeff_of(full)
                if val:
                    pairs.append((coef * (sb * falling_factor(full, R)), val))
    return cyc_dot(pairs, datum.conductor)


def residual_targets(datum, i, m, truncation):
    """Monomials T whose coefficient in W_{i,m} tau only reads tau up to ``truncation``."""
    bound = truncation - (m * datum.h + datum.exponents[i - 1])
    if bound < 0:
        return []
    return monomials_up_to(datum, bound)


def consistency_check(datum, bank, tau: TauSeries, pairs):
    """Largest residual over the listed (i, m); returns (all_zero, [(i, m, T, value) nonzero])."""
    bad = []
    get = tau.__getitem__
    for i, m in pairs:
        for T in residual_targets(datum, i, m, tau.truncation):
            r = constraint_coefficient(datum, bank, get, i, m, T)
            if r:
                bad.append((i, m, T, r))
    return not bad, bad


def perturbation_check(datum, bank, tau: TauSeries, mono):
    """Add 1 to tau[mono]; return the first violated (i, m, T, residual) or None."""
    mono = tuple(sorted(mono))
    one = field(datum.conductor).one

    def get(x):
        v = tau[x]
        return v + one if x == mono else v

    if mono:
        i, p = pivot_of(datum, mono)
        T = mono_sub(mono, [(i, p)])
        r = constraint_coefficient(datum, bank, get, i, p, T)
        if r:
            return (i, p, T, r)
    for i in range(1, datum.rank + 1):
        m = 0
        while m * datum.h + datum.exponents[i - 1] <= tau.truncation:
            for T in residual_targets(datum, i, m, tau.truncation):
                r = constraint_coefficient(datum, bank, get, i, m, T)
                if r:
                    return (i, m, T, r)
            m += 1
    return None


def alternative_pivot_check(datum, bank, tau: TauSeries):
    """For every monomial, every factor t^{i,p} (not only the chosen pivot) gives residual 0."""
    bad = []
    get = tau.__getitem__
    for M in monomials_up_to(datum, tau.truncation):
        for (i, p) in set(M):
            T = mono_sub(M, [(i, p)])
            r = constraint_coefficient(datum, bank, get, i, p, T)
            if r:
                bad.append((i, p, T, r))
    return not bad, bad


# -- logarithm and genus --------------------------------------------------------------------------------

def _log_coefficient(tau_get, F, M):
    """F[M] from tau via  |M| tau[M] = sum_{A <= M, A != 0} |A| F[A] tau[M - A]."""
    n = len(M)
    total = tau_get(M) * n
    for A in submultisets(M):
        if A and A != M:
            fa = F[A]
            if fa:
                t = tau_get(mono_sub(M, A))
                if t:
                    total = total - fa * t * len(A)
    return total / n


def log_coefficients(tau_get, monos):
    """F on the given monomials and all their divisors."""
    F = {}
    todo = set()
    for M in monos:
        todo.update(submultisets(M))
    todo.discard(())
    for M in sorted(todo, key=len):
        F[M] = _log_coefficient(tau_get, F, M)
    return F


def genus_of(datum, mono) -> int:
    """g = 1 + sum_j (p_j + (m_{i_j} - 1)/h - 1) / (3 - c), c = 1 - 2/h."""
    if not mono:
        raise GenusError("genus of the empty monomial is undefined")
    h = datum.h
    num = sum(p * h + datum.exponents[i - 1] - 1 - h for i, p in mono)
    g = 1 + Fraction(num, 2 * (h + 1))
    if g.denominator != 1 or g < 0:
        raise GenusError(f"monomial {format_t_monomial(mono)} has genus {g}")
    return int(g)


def log_series(datum, tau: TauSeries) -> LogSeries:
    if tau[()] != 1:
        raise SolverError("tau must be normalized with tau(0) = 1")
    monos = monomials_up_to(datum, tau.truncation)
    F = log_coefficients(tau.__getitem__, monos)
    coeffs = {m: c for m, c in F.items() if c}
    genus = {m: genus_of(datum, m) for m in coeffs}
    return LogSeries(coeffs, tau.h, tau.truncation, tau.family, tau.rank, tau.exponents, tau.conductor, genus)


def exp_series(datum, F: TauSeries) -> TauSeries:
    """Formal exponential, inverse of log_series."""
    one = field(datum.conductor).one
    tau = {(): one}
    for M in monomials_up_to(datum, F.truncation):
        if not M:
            continue
        n = len(M)
        total = field(datum.conductor).zero
        for A in submultisets(M):
            if A:
                fa = F[A]
                if fa:
                    t = tau.get(mono_sub(M, A))
                    if t:
                        total = total + fa * t * len(A)
        if total:
            tau[M] = total / n
    return TauSeries(tau, F.h, F.truncation, F.family, F.rank, F.exponents, F.conductor)


# -- small phase space ---------------------------------------------------------------------------------------

def genus_zero_primary_monomials(datum):
    """Monomials in t^{i,0} of genus 0: sum_j (h + 1 - m_{i_j}) = 2(h + 1)."""
    l = datum.rank
    h = datum.h
    w = [h + 1 - m for m in datum.exponents]
    target = 2 * (h + 1)
    out = []

    def rec(k, cur, s):
        if s == target:
            out.append(tuple(sorted(cur)))
            return
        for j in range(k, l):
            if s + w[j] <= target:
                cur.append((j + 1, 0))
                rec(j, cur, s + w[j])
                cur.pop()

    rec(0, [], 0)
    return sorted(out, key=lambda m: (degree_num(datum, m), m))


def mono_to_exponents(mono, l):
    e = [0] * l
    for i, _ in mono:
        e[i - 1] += 1
    return tuple(e)


def frobenius_potential(datum, solver: TauSolver):
    """Genus-0 primary potential {exponent tuple in v^1..v^l: coefficient}."""
    monos = genus_zero_primary_monomials(datum)
    for m in monos:
        solver.coeff(m)
    F = log_coefficients(solver.coeff, monos)
    return {mono_to_exponents(m, datum.rank): F[m] for m in monos if F[m]}


# -- potential forms -----------------------------------------------------------------------------------------

def d4_reference_potential(N=24):
    s2 = sqrt_of_integer(2, N)
    one = field(N).one
    return {
        (2, 0, 0, 1): one / 2,
        (1, 1, 1, 0): one,
        (0, 3, 0, 1): one / (18 * s2),
        (0, 0, 3, 1): one / (18 * s2),
        (0, 1, 1, 3): one / 108,
        (0, 0, 0, 7): one / 272160,
    }


def dubrovin_form(pot, N=24):
    """F(v) -> c F(v^1/c, v^2, v^3, c v^4) with c^2 = 18 sqrt(2) (D4 only).

    Each monomial picks up c^(1 - e_1 + e_4); only even powers occur.
    """
    c2 = 18 * sqrt_of_integer(2, N)
    out = {}
    for e, v in pot.items():
        k = 1 - e[0] + e[3]
        if k % 2:
            raise ValueError(f"odd power of c for monomial {e}")
        out[e] = v * c2 ** (k // 2) if k >= 0 else v / c2 ** (-k // 2)
    return out


def fjrw_form(pot, N=24):
    """Substitute v^1 = t_1, v^2 = -(t_X - sqrt3 t_Y)/sqrt2, v^3 = -(t_X + sqrt3 t_Y)/sqrt2, v^4 = t_X2; F/6.

    Variables of the result are ordered (t_1, t_X, t_Y, t_X2).
    """
    s2 = sqrt_of_integer(2, N)
    s3 = sqrt_of_integer(3, N)
    one = field(N).one
    lin = [
        {(1, 0, 0, 0): one},
        {(0, 1, 0, 0): -one / s2, (0, 0, 1, 0): s3 / s2},
        {(0, 1, 0, 0): -one / s2, (0, 0, 1, 0): -s3 / s2},
        {(0, 0, 0, 1): one},
    ]
    out = {}
    for e, c in pot.items():
        term = {(0, 0, 0, 0): c / 6}
        for k, ek in enumerate(e):
            for _ in range(ek):
                term = _vpoly_mul(term, lin[k])
        out = _vpoly_add(out, term)
    return out


def fjrw_reference(N=24):
    one = field(N).one
    return {
        (1, 2, 0, 0): one / 12,
        (1, 0, 2, 0): -one / 4,
        (2, 0, 0, 1): one / 12,
        (0, 3, 0, 1): -one / 216,
        (0, 1, 2, 1): -one / 24,
        (0, 2, 0, 3): one / 1296,
        (0, 0, 2, 3): -one / 432,
        (0, 0, 0, 7): one / 1632960,
    }


def _vpoly_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            v = out.get(e, 0) + ca * cb
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


def _vpoly_add(a, b):
    out = dict(a)
    for e, c in b.items():
        v = out.get(e, 0) + c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def _vpoly_diff(p, k):
    out = {}
    for e, c in p.items():
        if e[k]:
            e2 = list(e)
            e2[k] -= 1
            out[tuple(e2)] = c * e[k]
    return out


def compare_potentials(got, ref):
    """Monomials where the two potentials differ: [(exponents, got, ref)]."""
    diffs = []
    for e in sorted(set(got) | set(ref)):
        a, b = got.get(e, 0), ref.get(e, 0)
        if a != b:
            diffs.append((e, a, b))
    return diffs


def is_quasi_homogeneous(pot, weights):
    degs = {sum(w * x for w, x in zip(weights, e)) for e in pot}
    return len(degs) <= 1


def wdvv_check(pot, nvars=None, N=24):
    """Associativity of the algebra defined by the third derivatives of ``pot``.

    The metric eta_ab = d^3F/dv^1 dv^a dv^b must be constant and nondegenerate.
    """
    if not pot:
        raise ValueError("empty potential")
    n = nvars or len(next(iter(pot)))
    zero_e = (0,) * n
    third = {}
    for a in range(n):
        da = _vpoly_diff(pot, a)
        for b in range(a, n):
            dab = _vpoly_diff(da, b)
            for c in range(b, n):
                third[(a, b, c)] = _vpoly_diff(dab, c)

    def F3(a, b, c):
        return third[tuple(sorted((a, b, c)))]

    eta = [[None] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            p = F3(0, a, b)
            if any(e != zero_e for e in p):
                raise ValueError("metric d^3F/dv^1 dv^a dv^b is not constant")
            eta[a][b] = coerce(p.get(zero_e, 0), N)
    inv_cols = []
    for k in range(n):
        rhs = [coerce(int(r == k), N) for r in range(n)]
        x = solve_linear(eta, rhs)
        if x is None:
            raise ValueError("degenerate metric")
        inv_cols.append(x)
    eta_inv = [[inv_cols[c][r] for c in range(n)] for r in range(n)]
    # structure constants c_ab^d = eta^{de} F_abe
    cst = {}
    for a in range(n):
        for b in range(n):
            for d in range(n):
                acc = {}
                for e in range(n):
                    if eta_inv[d][e]:
                        acc = _vpoly_add(acc, {k: v * eta_inv[d][e] for k, v in F3(a, b, e).items()})
                cst[(a, b, d)] = acc
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    lhs, rhs = {}, {}
                    for e in range(n):
                        lhs = _vpoly_add(lhs, _vpoly_mul(cst[(a, b, e)], cst[(e, c, d)]))
                        rhs = _vpoly_add(rhs, _vpoly_mul(cst[(b, c, e)], cst[(a, e, d)]))
                    if lhs != rhs:
                        return False
    return True


def format_potential(pot, names=None) -> str:
    if not pot:
        return "0"
    n = len(next(iter(pot)))
    names = names or [f"v{k + 1}" for k in range(n)]
    parts = []
    for e in sorted(pot, key=lambda e: (sum(e), e)):
        mono = "*".join(f"{names[k]}" + (f"^{x}" if x > 1 else "") for k, x in enumerate(e) if x)
        parts.append(f"({pot[e]})*{mono}")
    return " + ".join(parts)


# -- the A1 oracle ---------------------------------------------------------------------------------------------

def double_factorial(n: int) -> int:
    """n!! with (-1)!! = 1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


class VirasoroOperator:
    """L_m of two-dimensional topological gravity, in variables t^p (m >= -1).

    Terms are (coefficient, creations, annihilations) with variables written
    as integers p; the dilaton shift is kept separate (``shift=True`` means the
    multiplication operators are t^p - delta_{p,1}).
    """

    def __init__(self, m: int, pmax: int):
        self.m = m
        self.terms = []
        if m == -1:
            self.terms.append((Fraction(1, 2), (0, 0), ()))
            for p in range(pmax):
                self.terms.append((Fraction(1), (p + 1,), (p,)))
            return
        two = Fraction(1, 2 ** (m + 1))
        for p in range(m):
            q = m - 1 - p
            c = Fraction(1, 2) * double_factorial(2 * p + 1) * double_factorial(2 * q + 1) * two
            self.terms.append((c, (), tuple(sorted((p, q)))))
        for p in range(pmax + 1):
            c = Fraction(double_factorial(2 * p + 2 * m + 1), double_factorial(2 * p - 1)) * two
            self.terms.append((c, (p,), (p + m,)))
        if m == 0:
            self.terms.append((Fraction(1, 16), (), ()))

    def unshifted(self):
        """Terms with the creations read as q^p = t^p - delta_{p,1}."""
        return list(self.terms)


def virasoro_solve(dmax_half: int):
    """tau of topological gravity from L_m alone, up to degree dmax_half/2 (deg t^p = p + 1/2).

    Independent of the W-operator machinery: the pivot of a monomial with
    largest variable t^k is L_{k-1}, whose leading part is -c d/dt^k coming
    from the dilaton term of t^1 d/dt^{k}.
    """
    def deg(mono):
        return sum(2 * p + 1 for p in mono)

    monos = []

    def rec(start, cur, d):
        monos.append(tuple(cur))
        p = start
        while d + 2 * p + 1 <= dmax_half:
            cur.append(p)
            rec(p, cur, d + 2 * p + 1)
            cur.pop()
            p += 1

    rec(0, [], 0)
    monos = sorted({tuple(sorted(m)) for m in monos}, key=lambda m: (deg(m), m))
    tau = {(): Fraction(1)}
    ops = {}
    for M in monos:
        if not M:
            continue
        k = max(M)
        m = k - 1
        if m not in ops:
            ops[m] = VirasoroOperator(m, dmax_half)
        T = mono_sub(M, [k])
        total = Fraction(0)
        pivot = None
        for c, cre, ann in ops[m].terms:
            # expand (t^1 - 1)^{#1 in cre}
            n1 = cre.count(1)
            for j in range(n1 + 1):
                C = tuple(sorted(mono_sub(cre, [1] * j)))
                if not _contains(T, C):
                    continue
                R = mono_sub(T, C)
                full = tuple(sorted(R + ann))
                fac = c * math.comb(n1, j) * (-1) ** j * falling_factor(full, R)
                if full == M:
                    pivot = (pivot or 0) + fac
                    continue
                if deg(full) >= deg(M):
                    raise SolverError("Virasoro recursion is not graded")
                total += fac * tau.get(full, 0)
        tau[M] = -total / pivot
    return tau


def _contains(big, small):
    cb = Counter(big)
    for v, k in Counter(small).items():
        if cb.get(v, 0) < k:
            return False
    return True


def virasoro_compare(datum, bank, mmax: int, window: int):
    """Calibrate the vertex-built W_{1,m} against L_{m-1}.

    Finds t^p = gamma_p q^{1,p} and scalars rho_m with rho_m W_{1,m} = L_{m-1}
    from single-derivative terms, then checks every term in the window.
    """
    if (datum.family, datum.rank) != ("A", 1):
        raise ValueError("Virasoro comparison needs A1")
    from wce.twist import w_operator

    h = datum.h
    ops = {m: w_operator(datum, None, 1, m, window, bank) for m in range(mmax + 1)}

    def wterms(m):
        return {(tuple(p for _, p in t.creations), tuple(p for _, p in t.annihilations)): t.coeff
                for t in ops[m].terms}

    def lterms(m, pmax):
        out = {}
        for c, cre, ann in VirasoroOperator(m - 1, pmax).terms:
            out[(tuple(cre), tuple(ann))] = out.get((tuple(cre), tuple(ann)), 0) + c
        return out

    pmax = window // h + 2
    # rho_0 from the quadratic string term, gamma from t^{p+1} d/dt^p with gamma_1 = 1
    w0 = wterms(0)
    quad = w0.get(((0, 0), ()))
    chain = {p: w0.get(((p + 1,), (p,))) for p in range(pmax)}
    # rho_0 gamma_0^2 quad = 1/2 ; rho_0 (gamma_{p+1}/gamma_p) chain_p = 1 ; gamma_1 = 1
    # => gamma_0 = rho_0 chain_0, rho_0^3 chain_0^2 quad = 1/2
    val = Fraction(1, 2) / (chain[0].to_rational() ** 2 * quad.to_rational())
    rho0 = _rational_cube_root(val)
    gamma = {0: rho0 * chain[0].to_rational(), 1: Fraction(1)}
    for p in range(1, pmax):
        if chain.get(p) is None:
            break
        gamma[p + 1] = gamma[p] / (rho0 * chain[p].to_rational())
    rho = {0: rho0}
    for m in range(1, mmax + 1):
        wm = wterms(m)
        key = ((0,), (m - 1,))
        if key not in wm:
            raise SolverError(f"W_1,{m} lacks the term q^0 d/dq^{m - 1}")
        L = lterms(m, pmax)
        rho[m] = L[key] / (wm[key].to_rational() * gamma[0] / gamma[m - 1])
    mismatches = []
    for m in range(mmax + 1):
        wm = wterms(m)
        L = lterms(m, pmax)
        for key in set(wm) | set(L):
            cre, ann = key
            if any(p not in gamma for p in cre + ann):
                continue
            if sum(2 * p + 1 for p in ann) > window:
                continue
            wv = wm.get(key, 0)
            scale = rho[m]
            for p in cre:
                scale = scale * gamma[p]
            for p in ann:
                scale = scale / gamma[p]
            lhs = wv * scale if wv else 0
            if lhs != L.get(key, 0):
                mismatches.append((m, key, lhs, L.get(key, 0)))
    return {"gamma": gamma, "rho": rho, "mismatches": sorted(mismatches, key=lambda x: (x[0], str(x[1]))),
            "ok": not mismatches}


def _rational_cube_root(x: Fraction) -> Fraction:
    def icbrt(n):
        s = -1 if n < 0 else 1
        n = abs(n)
        r = round(n ** (1 / 3))
        for c in (r - 1, r, r + 1):
            if c ** 3 == n:
                return s * c
        raise SolverError("calibration has no rational solution")

    return Fraction(icbrt(x.numerator), icbrt(x.denominator))


def virasoro_annihilates(tau: TauSeries, mmax: int, gamma=None):
    """Apply L_{-1..mmax} to an A1 tau (variables t^{1,p} = t^p); return nonzero residuals."""
    gamma = gamma or {}
    trunc = tau.truncation  # numerator over h = 2
    get = {}
    for mono, c in tau.coeffs.items():
        scale = Fraction(1)
        for _, p in mono:
            scale /= gamma.get(p, 1)
        get[tuple(sorted(p for _, p in mono))] = c.to_rational() * scale
    bad = []
    for m in range(-1, mmax + 1):
        op = VirasoroOperator(m, trunc)
        # targets T whose coefficient only reads tau up to trunc: deg T + 2m + 2 <= trunc
        bound = trunc - (2 * m + 2) - 1 if m >= 0 else trunc - 1
        for T in _a1_monomials(bound):
            total = Fraction(0)
            for c, cre, ann in op.terms:
                n1 = cre.count(1)
                for j in range(n1 + 1):
                    C = tuple(sorted(mono_sub(cre, [1] * j)))
                    if not _contains(T, C):
                        continue
                    R = mono_sub(T, C)
                    full = tuple(sorted(R + ann))
                    if sum(2 * p + 1 for p in full) > trunc:
                        continue
                    total += c * math.comb(n1, j) * (-1) ** j * falling_factor(full, R) * get.get(full, 0)
            if total:
                bad.append((m, T, total))
    return bad


def _a1_monomials(dmax_half):
    out = []

    def rec(start, cur, d):
        out.append(tuple(cur))
        p = start
        while d + 2 * p + 1 <= dmax_half:
            cur.append(p)
            rec(p, cur, d + 2 * p + 1)
            cur.pop()
            p += 1

    if dmax_half >= 0:
        rec(0, [], 0)
    return out


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)
