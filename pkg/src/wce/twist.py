"""The sigma-twisted module: fractional bosons, contractions and W-operators.

The twisted module is the polynomial ring in q^{j,p} (j = 1..l, p >= 0) with
deg q^{j,p} = p + m_j/h.  The field of phi^f has

* annihilation modes  p + m_f/h, acting as (m_f/h)_{p+1} d/dq^{f,p};
* creation modes     -(p + m_c/h), acting as q^{c,p} / (m_c/h)_p, where
  c = l + 1 - f (the field of phi^f equals the field of phi_c).

All degrees and lambda-exponents are stored as integer numerators over h.

W_{i,m} is the lambda^(-m-1) coefficient of Y^M(w_i, lambda).  Each Fock
monomial of w_i is expanded by Wick's theorem: every partial pairing of its
factors contributes a product of contraction coefficients times the
normal-ordered product of the remaining (differentiated) boson fields.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from wce.numfield import CycScalar, coerce, field


class OperatorError(RuntimeError):
    pass


# -- scalar building blocks ----------------------------------------------------------------

def gamma_ratio(x, p: int, direction: str) -> Fraction:
    """up: Gamma(x+p+1)/Gamma(x) = x(x+1)...(x+p); down: Gamma(x)/Gamma(x+p)."""
    x = Fraction(x)
    if direction == "up":
        out = Fraction(1)
        for k in range(p + 1):
            out *= x + k
        return out
    if direction == "down":
        out = Fraction(1)
        for k in range(p):
            out *= x + k
        return 1 / out
    raise ValueError("direction must be 'up' or 'down'")


def gbinom(x, r: int) -> Fraction:
    """Generalized binomial coefficient x(x-1)...(x-r+1)/r! for rational x."""
    if r < 0:
        return Fraction(0)
    x = Fraction(x)
    out = Fraction(1)
    for k in range(r):
        out = out * (x - k) / (k + 1)
    return out


def _eta(datum, i, j):
    return 1 if i + j == datum.rank + 1 else 0


@lru_cache(maxsize=None)
def _propagator_rational(a: Fraction, k: int) -> Fraction:
    """(-1)^k (1-a) Gamma(a+k+1) / (k! (k+2) Gamma(a))."""
    return (-1) ** k * (1 - a) * gamma_ratio(a, k, "up") / (math.factorial(k) * (k + 2))


def propagator_coeff(datum, i: int, j: int, k: int) -> CycScalar:
    """Coefficient of lambda^(-k-2) in P^{ij}_k(lambda)."""
    N = datum.conductor
    if not _eta(datum, i, j):
        return field(N).zero
    a = Fraction(datum.exponents[i - 1], datum.h)
    return coerce(_propagator_rational(a, k), N)


@lru_cache(maxsize=None)
def _contraction_rational(a: Fraction, K: int, L: int) -> Fraction:
    total = Fraction(0)
    for k in range(K, K + L + 1):
        total += (_propagator_rational(a, k) * math.comb(k, K) * (-1) ** (k - K)
                  * gbinom(-k - 2, L - k + K))
    return total


def contraction_coeff(datum, i: int, j: int, K: int, L: int) -> Fraction:
    """Regular part of <d^(K) Y(phi^i, mu) d^(L) Y(phi^j, lambda)> at mu = lambda.

    The result multiplies lambda^(-K-L-2); d^(k) = d^k/k!.  Writing the
    regular part as sum_k P_k(lambda) s^k with s = mu - lambda, the mu-derivative
    hits s^k and the lambda-derivative is split between P_k and s^(k-K).
    """
    if not _eta(datum, i, j):
        return Fraction(0)
    a = Fraction(datum.exponents[i - 1], datum.h)
    return _contraction_rational(a, K, L)


# -- operator terms -------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorTerm:
    coeff: CycScalar
    creations: tuple     # sorted ((j, p), ...) : multiplication by q^{j,p}
    annihilations: tuple  # sorted ((j, p), ...) : d/dq^{j,p}

    def degree_num(self, datum) -> int:
        return degree_num(datum, self.creations) - degree_num(datum, self.annihilations)

    def depth(self) -> int:
        """Number of q^{1,1} factors, i.e. the power of (t^{1,1} - 1) after the dilaton shift."""
        return self.creations.count((1, 1))

    def to_json(self):
        return {"coeff": self.coeff.serialize(),
                "creations": [list(x) for x in self.creations],
                "annihilations": [list(x) for x in self.annihilations]}

    @classmethod
    def from_json(cls, d):
        return cls(CycScalar.deserialize(d["coeff"]),
                   tuple(tuple(x) for x in d["creations"]),
                   tuple(tuple(x) for x in d["annihilations"]))


def degree_num(datum, variables) -> int:
    h = datum.h
    ex = datum.exponents
    return sum(p * h + ex[j - 1] for j, p in variables)


@dataclass(frozen=True)
class TwistedOperator:
    i: int
    m: int
    terms: tuple
    window: tuple  # (lo, hi) bounds on annihilation degree numerators
    c_leading: CycScalar

    def to_json(self):
        return {"i": self.i, "m": self.m, "window": list(self.window),
                "c_leading": self.c_leading.serialize(), "terms": [t.to_json() for t in self.terms]}

    @classmethod
    def from_json(cls, d):
        return cls(d["i"], d["m"], tuple(OperatorTerm.from_json(t) for t in d["terms"]),
                   tuple(d["window"]), CycScalar.deserialize(d["c_leading"]))


def leading_coefficient(datum, i: int, m: int) -> Fraction:
    """c_{i,m} = h^{m_i} Gamma(m_i/h + m + 1) / Gamma(m_i/h)."""
    mi = datum.exponents[i - 1]
    return Fraction(datum.h) ** mi * gamma_ratio(Fraction(mi, datum.h), m, "up")


# -- Wick expansion -------------------------------------------------------------------------------

def _matchings(factors, l):
    """Partial matchings of positions whose colours pair under eta."""
    n = len(factors)

    def rec(start, used):
        while start < n and start in used:
            start += 1
        if start >= n:
            yield ()
            return
        # leave `start` unpaired
        for rest in rec(start + 1, used | {start}):
            yield rest
        f = factors[start][0]
        for s in range(start + 1, n):
            if s not in used and factors[s][0] + f == l + 1:
                for rest in rec(start + 1, used | {start, s}):
                    yield ((start, s),) + rest

    # deduplicate: "unpaired" is recorded implicitly by absence
    seen = set()
    for m in rec(0, frozenset()):
        key = tuple(sorted(m))
        if key not in seen:
            seen.add(key)
            yield key


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class _Skeleton:
    """A (monomial, pairing) pair: contraction factor and unpaired factors."""

    __slots__ = ("coeff", "factor", "lam", "unpaired", "colours")

    def __init__(self, coeff, factor, lam, unpaired):
        self.coeff = coeff          # CycScalar coefficient of the Fock monomial
        self.factor = factor        # rational product of contraction coefficients
        self.lam = lam              # lambda-exponent numerator from the contractions
        self.unpaired = unpaired    # tuple of (f, k) for each unpaired factor
        self.colours = sorted(f for f, _ in unpaired)


def _skeletons(datum, w):
    h = datum.h
    l = datum.rank
    out = []
    for mono, coeff in w.items():
        factors = list(mono)
        for match in _matchings(factors, l):
            fac = Fraction(1)
            lam = 0
            paired = set()
            for r, s in match:
                fr, nr = factors[r]
                fs, ns = factors[s]
                K, L = nr - 1, ns - 1
                fac *= contraction_coeff(datum, fr, fs, K, L)
                lam -= (K + L + 2) * h
                paired.update((r, s))
            if not fac:
                continue
            unpaired = tuple((factors[r][0], factors[r][1] - 1) for r in range(len(factors)) if r not in paired)
            out.append(_Skeleton(coeff, fac, lam, unpaired))
    return out


def _creation_factor(datum, c, p, k) -> Fraction:
    """Coefficient of a creation q^{c,p} in d^(k) of the boson field (with its lambda power)."""
    a = Fraction(datum.exponents[c - 1], datum.h)
    return gbinom(p + a - 1, k) * gamma_ratio(a, p, "down")


def _annihilation_factor(datum, f, p, k) -> Fraction:
    a = Fraction(datum.exponents[f - 1], datum.h)
    return gamma_ratio(a, p, "up") * gbinom(-(p + a) - 1, k)


def _fock_degree(mono):
    return sum(n for _, n in mono)


class OperatorBank:
    """W-operators of a generator set, materialized on demand.

    ``terms_with_creation(i, m, C)`` returns every (coefficient, annihilations)
    of W_{i,m} whose creation multiset is exactly ``C``; results are memoized.
    """

    def __init__(self, datum, gens):
        self.datum = datum
        self.gens = gens
        self.N = datum.conductor
        self._skel = [None] * len(gens)
        self._memo = {}
        self._fdeg = [max((_fock_degree(m) for m in w.terms), default=0) for w in gens]

    def skeletons(self, i):
        if self._skel[i - 1] is None:
            self._skel[i - 1] = _skeletons(self.datum, self.gens[i - 1].terms)
        return self._skel[i - 1]

    def terms_with_creation(self, i: int, m_num: int, C: tuple):
        """Terms of the lambda^(-m-1) coefficient (m = m_num/h) with creations C."""
        key = (i, m_num, C)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        datum = self.datum
        h = datum.h
        l = datum.rank
        ex = datum.exponents
        need = sorted(l + 1 - c for c, _ in C)
        acc = {}
        for sk in self.skeletons(i):
            U = sk.unpaired
            if len(U) < len(C) or not _submultiset(need, sk.colours):
                continue
            # lambda exponent target -(m+1) = lam_contr + sum over fields
            target = -(m_num + h) - sk.lam
            for roles in _assign_creations(U, C, l):
                # roles: tuple aligned with U; (c, p) for creators, None for annihilators
                lam = 0
                fac = sk.factor
                ann_pos = []
                for (f, k), role in zip(U, roles):
                    if role is None:
                        ann_pos.append((f, k))
                        lam -= ex[f - 1] + h + k * h
                    else:
                        c, p = role
                        lam += p * h + ex[c - 1] - h - k * h
                        fac *= _creation_factor(datum, c, p, k)
                        if not fac:
                            break
                if not fac:
                    continue
                # annihilators contribute -(p h) each beyond the base already counted
                rest = lam - target
                if rest < 0 or rest % h:
                    continue
                P = rest // h
                for ps in _compositions(P, len(ann_pos)):
                    f2 = fac
                    A = []
                    for (f, k), p in zip(ann_pos, ps):
                        f2 *= _annihilation_factor(datum, f, p, k)
                        A.append((f, p))
                    if f2:
                        A = tuple(sorted(A))
                        acc[A] = acc.get(A, 0) + f2 * sk.coeff
        out = tuple((c, A) for A, c in sorted(acc.items()) if c)
        self._memo[key] = out
        return out

    def operator(self, i: int, m_num: int, ann_hi: int):
        """All terms of the lambda^(-m-1) coefficient with annihilation degree <= ann_hi."""
        datum = self.datum
        h = datum.h
        l = datum.rank
        ex = datum.exponents
        acc = {}
        for sk in self.skeletons(i):
            U = sk.unpaired
            n = len(U)
            target = -(m_num + h) - sk.lam
            for mask in range(1 << n):
                cre = [U[r] for r in range(n) if mask >> r & 1]
                ann = [U[r] for r in range(n) if not mask >> r & 1]
                base_ann = sum(ex[f - 1] for f, _ in ann)
                # lambda bookkeeping without the free p's
                lam0 = sum(ex[l - f] - h - k * h for f, k in cre) - sum(ex[f - 1] + h + k * h for f, k in ann)
                # lam0 + h*(sum p_cre) - h*(sum p_ann) == target
                diff = target - lam0
                if diff % h:
                    continue
                dp = diff // h  # sum p_cre - sum p_ann
                max_ann = (ann_hi - base_ann) // h if ann else 0
                if ann and ann_hi < base_ann:
                    continue
                for Pa in range(0, max_ann + 1):
                    Pc = dp + Pa
                    if Pc < 0 or (not cre and Pc != 0):
                        continue
                    for pcs in _compositions(Pc, len(cre)):
                        fac = sk.factor
                        C = []
                        for (f, k), p in zip(cre, pcs):
                            c = l + 1 - f
                            fac *= _creation_factor(datum, c, p, k)
                            C.append((c, p))
                        if not fac:
                            continue
                        for pas in _compositions(Pa, len(ann)):
                            f2 = fac
                            A = []
                            for (f, k), p in zip(ann, pas):
                                f2 *= _annihilation_factor(datum, f, p, k)
                                A.append((f, p))
                            if f2:
                                key = (tuple(sorted(C)), tuple(sorted(A)))
                                acc[key] = acc.get(key, 0) + f2 * sk.coeff
        terms = [OperatorTerm(coerce(c, self.N), C, A) for (C, A), c in acc.items() if c]
        terms.sort(key=lambda t: (degree_num(datum, t.annihilations), t.creations, t.annihilations))
        return terms


def _submultiset(small, big):
    """Both sorted lists."""
    j = 0
    for x in small:
        while j < len(big) and big[j] < x:
            j += 1
        if j >= len(big) or big[j] != x:
            return False
        j += 1
    return True


def _assign_creations(U, C, l):
    """Distinct ways to place the creation multiset C on positions of U."""
    labels = {}
    for cp in C:
        labels[cp] = labels.get(cp, 0) + 1
    keys = sorted(labels)
    n = len(U)

    def rec(pos, left):
        if pos == n:
            if not any(left.values()):
                yield ()
            return
        need = sum(left.values())
        if need > n - pos:
            return
        f = U[pos][0]
        # annihilator
        if need < n - pos:
            for rest in rec(pos + 1, left):
                yield (None,) + rest
        for cp in keys:
            if left[cp] and cp[0] == l + 1 - f:
                left[cp] -= 1
                for rest in rec(pos + 1, left):
                    yield (cp,) + rest
                left[cp] += 1

    yield from rec(0, dict(labels))


# -- public operations ---------------------------------------------------------------------------

def wick_expand(datum, mono, window: int):
    """Wick expansion of one Fock monomial.

    Returns (lambda-exponent numerator, OperatorTerm) pairs for every term whose
    creation and annihilation degrees are both at most ``window`` (numerators
    over h).  The monomial is a sequence of (j, n) symbols (phi^j t^-n).
    """
    from wce.fock import FockElement

    N = datum.conductor
    h = datum.h
    l = datum.rank
    w = FockElement({tuple(sorted(mono)): 1}, N)
    out = {}
    for sk in _skeletons(datum, w.terms):
        U = sk.unpaired
        n = len(U)
        for mask in range(1 << n):
            cre = [U[r] for r in range(n) if mask >> r & 1]
            ann = [U[r] for r in range(n) if not mask >> r & 1]
            cre_base = sum(datum.exponents[l - f] for f, _ in cre)
            ann_base = sum(datum.exponents[f - 1] for f, _ in ann)
            if cre_base > window or ann_base > window:
                continue
            for Pc in range((window - cre_base) // h + 1 if cre else 1):
                for pcs in _compositions(Pc, len(cre)):
                    for Pa in range((window - ann_base) // h + 1 if ann else 1):
                        for pas in _compositions(Pa, len(ann)):
                            fac = sk.factor
                            lam = sk.lam
                            C, A = [], []
                            for (f, k), p in zip(cre, pcs):
                                c = l + 1 - f
                                fac *= _creation_factor(datum, c, p, k)
                                lam += p * h + datum.exponents[c - 1] - h - k * h
                                C.append((c, p))
                            for (f, k), p in zip(ann, pas):
                                fac *= _annihilation_factor(datum, f, p, k)
                                lam -= p * h + datum.exponents[f - 1] + h + k * h
                                A.append((f, p))
                            if fac:
                                key = (lam, tuple(sorted(C)), tuple(sorted(A)))
                                out[key] = out.get(key, 0) + fac * sk.coeff
    res = [(lam, OperatorTerm(coerce(c, N), C, A)) for (lam, C, A), c in out.items() if c]
    res.sort(key=lambda x: (x[0], x[1].creations, x[1].annihilations))
    return res


def w_operator(datum, gens, i: int, m: int, window: int, bank: OperatorBank | None = None) -> TwistedOperator:
    """W_{i,m} restricted to annihilation degree numerators in [0, window]."""
    if m < 0:
        raise OperatorError("m must be nonnegative")
    bank = bank or OperatorBank(datum, gens)
    h = datum.h
    terms = bank.operator(i, m * h, window)
    mi = datum.exponents[i - 1]
    lead_C = ((1, 1),) * mi
    lead_A = ((i, m),)
    lead = [t for t in terms if t.creations == lead_C and t.annihilations == lead_A]
    expected = leading_coefficient(datum, i, m)
    if degree_num(datum, lead_A) <= window:
        if not lead or not lead[0].coeff:
            raise OperatorError(f"W_{i},{m}: leading term q^(1,1)^{mi} d/dq^({i},{m}) is missing")
        c = lead[0].coeff
        if c != expected:
            raise OperatorError(f"W_{i},{m}: leading coefficient {c} differs from {expected}")
    else:
        c = coerce(expected, datum.conductor)
    return TwistedOperator(i, m, tuple(terms), (0, window), coerce(c, datum.conductor))


def fractional_residue(datum, gens, i: int, m_num: int, window: int, bank=None):
    """Terms of the lambda^(-m-1) coefficient for m = m_num/h (should vanish unless h | m_num)."""
    bank = bank or OperatorBank(datum, gens)
    return bank.operator(i, m_num, window)


def dilaton_pieces(datum, op: TwistedOperator):
    """Group the terms by the power d of (t^{1,1} - 1): {d: [terms with the q^{1,1}s removed]}."""
    out = {}
    for t in op.terms:
        d = t.depth()
        rest = tuple(x for x in t.creations if x != (1, 1))
        out.setdefault(d, []).append(OperatorTerm(t.coeff, rest, t.annihilations))
    return out


def operator_cache_lines(datum, strategy: str, op: TwistedOperator):
    """Deterministic text form: header, then one line per term."""
    lines = [f"# datum={datum.name} conductor={datum.conductor} strategy={strategy} "
             f"i={op.i} m={op.m} window={op.window[0]}..{op.window[1]} "
             f"contraction=regular-part-of-two-field-propagator"]
    for t in op.terms:
        cre = " ".join(f"({j},{p})" for j, p in t.creations) or "-"
        ann = " ".join(f"({j},{p})" for j, p in t.annihilations) or "-"
        lines.append(f"{t.coeff.serialize()} | {cre} | {ann}")
    return lines
