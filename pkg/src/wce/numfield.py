"""Exact arithmetic in the cyclotomic fields Q(zeta_N).

An element is stored in the power basis 1, x, ..., x**(phi(N)-1) of
Q[x]/(Phi_N(x)) as a tuple of integer numerators over one positive common
denominator.  Because the representation is reduced modulo Phi_N (not
x**N - 1), two elements are equal exactly when their stored data are equal.

Rationals are plain :class:`fractions.Fraction` objects; :class:`CycScalar`
accepts ints and Fractions wherever it accepts another CycScalar.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational as _RationalABC

from wce import kernels

Rational = Fraction

DEFAULT_CONDUCTOR = 24


class FieldError(ArithmeticError):
    """Raised for division by zero or an element outside the working field."""


def _poly_divmod_int(num, den):
    """Exact division of integer polynomials (low-to-high), den monic."""
    num = list(num)
    q = [0] * max(len(num) - len(den) + 1, 1)
    for k in range(len(num) - len(den), -1, -1):
        c = num[k + len(den) - 1]
        q[k] = c
        if c:
            for i, dcoef in enumerate(den):
                num[k + i] -= c * dcoef
    return q


def cyclotomic_polynomial(n: int) -> list[int]:
    """Coefficients of Phi_n, lowest degree first."""
    poly = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_divmod_int(poly, cyclotomic_polynomial(d))
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return poly


def euler_phi(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


class CyclotomicField:
    """Reduction data for Q(zeta_N); obtain instances through :func:`field`."""

    def __init__(self, N: int):
        if N < 1:
            raise ValueError("conductor must be positive")
        self.N = N
        self.phi = cyclotomic_polynomial(N)
        self.degree = len(self.phi) - 1
        d = self.degree
        # x^d = -sum_{i<d} phi_i x^i
        self.tail = tuple((i, -c) for i, c in enumerate(self.phi[:d]) if c)
        powers = []
        cur = [1] + [0] * (d - 1)
        for _ in range(N):
            powers.append(tuple(cur))
            nxt = [0] + cur[:-1]
            top = cur[-1]
            if top:
                for i, t in self.tail:
                    nxt[i] += t * top
            cur = nxt
        self.powers = tuple(powers)
        self.zero = CycScalar._raw(self, (0,) * d, 1)
        self.one = CycScalar._raw(self, (1,) + (0,) * (d - 1), 1)

    def __repr__(self):
        return f"CyclotomicField({self.N})"

    def __reduce__(self):
        return (field, (self.N,))

    def __call__(self, value) -> "CycScalar":
        return coerce(value, self.N)


@lru_cache(maxsize=None)
def field(N: int) -> CyclotomicField:
    return CyclotomicField(N)


class CycScalar:
    """Immutable element of Q(zeta_N)."""

    __slots__ = ("field", "num", "den", "_hash")

    @classmethod
    def _raw(cls, fld, num, den):
        self = object.__new__(cls)
        self.field = fld
        self.num = num
        self.den = den
        self._hash = None
        return self

    def __init__(self, coeffs, N: int = DEFAULT_CONDUCTOR):
        fld = field(N)
        coeffs = [Fraction(c) for c in coeffs]
        if len(coeffs) > fld.degree:
            raise ValueError("too many coefficients for the power basis")
        coeffs += [Fraction(0)] * (fld.degree - len(coeffs))
        den = math.lcm(*[c.denominator for c in coeffs]) if coeffs else 1
        num = [c.numerator * (den // c.denominator) for c in coeffs]
        self.field = fld
        self.num, self.den = kernels.normalize(num, den)
        self._hash = None

    # construction helpers -------------------------------------------------
    @classmethod
    def from_rational(cls, q, N: int = DEFAULT_CONDUCTOR) -> "CycScalar":
        q = Fraction(q)
        fld = field(N)
        num = (q.numerator,) + (0,) * (fld.degree - 1)
        return cls._raw(fld, num, q.denominator)

    # basic properties -----------------------------------------------------
    @property
    def conductor(self) -> int:
        return self.field.N

    @property
    def coeffs(self) -> tuple:
        return tuple(Fraction(c, self.den) for c in self.num)

    def is_zero(self) -> bool:
        return not any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise FieldError(f"{self} is not rational")
        return Fraction(self.num[0], self.den)

    def __bool__(self):
        return any(self.num)

    # coercion -------------------------------------------------------------
    def _other(self, other):
        if isinstance(other, CycScalar):
            if other.field is self.field:
                return self, other
            n = math.lcm(self.field.N, other.field.N)
            return self.promote(n), other.promote(n)
        if isinstance(other, (int, _RationalABC)):
            return self, CycScalar.from_rational(other, self.field.N)
        return None, None

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        num, den = kernels.add(a.num, a.den, b.num, b.den)
        return CycScalar._raw(a.field, num, den)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        num, den = kernels.sub(a.num, a.den, b.num, b.den)
        return CycScalar._raw(a.field, num, den)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return CycScalar._raw(self.field, tuple(-c for c in self.num), self.den)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, int):
            num, den = kernels.scale(self.num, self.den, other, 1)
            return CycScalar._raw(self.field, num, den)
        if isinstance(other, Fraction):
            num, den = kernels.scale(self.num, self.den, other.numerator, other.denominator)
            return CycScalar._raw(self.field, num, den)
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        fld = a.field
        num, den = kernels.mul(a.num, a.den, b.num, b.den, fld.degree, fld.tail)
        return CycScalar._raw(fld, num, den)

    __rmul__ = __mul__

    def inverse(self) -> "CycScalar":
        if self.is_zero():
            raise FieldError("division by zero in Q(zeta_%d)" % self.field.N)
        if self.is_rational():
            q = Fraction(self.den, self.num[0])
            return CycScalar.from_rational(q, self.field.N)
        inv = _poly_inverse_mod(self.coeffs, self.field.phi)
        return CycScalar(inv, self.field.N)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise FieldError("division by zero")
            q = Fraction(other)
            num, den = kernels.scale(self.num, self.den, q.denominator * (1 if q > 0 else -1), abs(q.numerator))
            return CycScalar._raw(self.field, num, den)
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.field.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # comparison -----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, CycScalar) and other.field is self.field:
            return self.num == other.num and self.den == other.den
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return a.num == b.num and a.den == b.den

    def __hash__(self):
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(Fraction(self.num[0], self.den))
            else:
                self._hash = hash((self.field.N, self.num, self.den))
        return self._hash

    # field maps -----------------------------------------------------------
    def promote(self, M: int) -> "CycScalar":
        """Image in Q(zeta_M) under zeta_N -> zeta_M**(M/N); requires N | M."""
        N = self.field.N
        if M == N:
            return self
        if M % N:
            raise FieldError(f"Q(zeta_{N}) is not a subfield of Q(zeta_{M})")
        big = field(M)
        step = M // N
        acc = [0] * big.degree
        for k, c in enumerate(self.num):
            if c:
                for i, v in enumerate(big.powers[(k * step) % M]):
                    acc[i] += c * v
        num, den = kernels.normalize(acc, self.den)
        return CycScalar._raw(big, num, den)

    def restrict(self, N: int) -> "CycScalar":
        """Inverse of :meth:`promote`; raises if the element is not in Q(zeta_N)."""
        M = self.field.N
        if M % N:
            raise FieldError(f"Q(zeta_{N}) is not a subfield of Q(zeta_{M})")
        small = field(N)
        images = [CycScalar._raw(small, small.powers[k], 1).promote(M).coeffs for k in range(small.degree)]
        from wce.linalg import solve_linear

        cols = [[images[k][i] for k in range(small.degree)] for i in range(field(M).degree)]
        sol = solve_linear(cols, list(self.coeffs))
        if sol is None:
            raise FieldError(f"{self} does not lie in Q(zeta_{N})")
        return CycScalar(sol, N)

    def conjugate(self) -> "CycScalar":
        fld = self.field
        acc = [0] * fld.degree
        for k, c in enumerate(self.num):
            if c:
                for i, v in enumerate(fld.powers[(-k) % fld.N]):
                    acc[i] += c * v
        num, den = kernels.normalize(acc, self.den)
        return CycScalar._raw(fld, num, den)

    def galois(self, a: int) -> "CycScalar":
        """Image under zeta -> zeta**a (gcd(a, N) == 1)."""
        fld = self.field
        if math.gcd(a, fld.N) != 1:
            raise ValueError("Galois exponent must be a unit mod N")
        acc = [0] * fld.degree
        for k, c in enumerate(self.num):
            if c:
                for i, v in enumerate(fld.powers[(a * k) % fld.N]):
                    acc[i] += c * v
        num, den = kernels.normalize(acc, self.den)
        return CycScalar._raw(fld, num, den)

    def __complex__(self):
        N = self.field.N
        return sum(c * cmath.exp(2j * math.pi * k / N) for k, c in enumerate(self.num) if c) / self.den + 0j

    # text -----------------------------------------------------------------
    def serialize(self) -> str:
        parts = []
        for k, c in enumerate(self.num):
            if c:
                q = Fraction(c, self.den)
                parts.append(f"{k}:{q.numerator}/{q.denominator}")
        return f"{self.field.N};" + ",".join(parts)

    @classmethod
    def deserialize(cls, text: str) -> "CycScalar":
        head, _, body = text.partition(";")
        N = int(head)
        fld = field(N)
        coeffs = [Fraction(0)] * fld.degree
        if body:
            for item in body.split(","):
                k, _, q = item.partition(":")
                coeffs[int(k)] = Fraction(q)
        return cls(coeffs, N)

    def __repr__(self):
        if self.is_rational():
            return f"CycScalar({Fraction(self.num[0], self.den)}, N={self.field.N})"
        return f"CycScalar({self.serialize()!r})"

    def __str__(self):
        if self.is_rational():
            return str(Fraction(self.num[0], self.den))
        terms = []
        for k, c in enumerate(self.num):
            if c:
                q = Fraction(c, self.den)
                terms.append(f"{q}" if k == 0 else f"({q})*z{self.field.N}^{k}")
        return " + ".join(terms)


def _poly_inverse_mod(a, m):
    """Inverse of polynomial a modulo m over Q (extended Euclid)."""

    def trim(p):
        p = list(p)
        while p and p[-1] == 0:
            p.pop()
        return p

    def pdivmod(u, v):
        u = list(u)
        q = [Fraction(0)] * max(len(u) - len(v) + 1, 1)
        lead = v[-1]
        for k in range(len(u) - len(v), -1, -1):
            c = u[k + len(v) - 1] / lead
            q[k] = c
            if c:
                for i, vc in enumerate(v):
                    u[k + i] -= c * vc
        return trim(q), trim(u[: len(v) - 1])

    def psub(u, v):
        n = max(len(u), len(v))
        u = list(u) + [Fraction(0)] * (n - len(u))
        v = list(v) + [Fraction(0)] * (n - len(v))
        return trim([x - y for x, y in zip(u, v)])

    def pmul(u, v):
        if not u or not v:
            return []
        out = [Fraction(0)] * (len(u) + len(v) - 1)
        for i, x in enumerate(u):
            if x:
                for j, y in enumerate(v):
                    out[i + j] += x * y
        return trim(out)

    r0_m = trim([Fraction(c) for c in m])
    r0, r1 = r0_m, trim([Fraction(c) for c in a])
    s0, s1 = [], [Fraction(1)]
    while len(r1) > 1:
        q, r = pdivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, psub(s0, pmul(q, s1))
    if not r1:
        raise FieldError("element is not invertible")
    c = r1[0]
    if len(s1) >= len(m):
        _, s1 = pdivmod(s1, r0_m)
    return [x / c for x in s1]


def coerce(value, N: int = DEFAULT_CONDUCTOR) -> CycScalar:
    if isinstance(value, CycScalar):
        return value.promote(N) if value.field.N != N else value
    return CycScalar.from_rational(value, N)


# -- public operations ----------------------------------------------------

def field_arith(a, b, op: str) -> CycScalar:
    """Apply ``op`` in {'add', 'sub', 'mul', 'div'}; conductors are unified by lcm."""
    a = a if isinstance(a, CycScalar) else coerce(a)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def dot(pairs, N: int = DEFAULT_CONDUCTOR) -> CycScalar:
    """sum(x * y) over (x, y) pairs of CycScalar in Q(zeta_N), one normalization at the end."""
    fld = field(N)
    raw = [((x.num, x.den), (y.num, y.den)) for x, y in pairs]
    if not raw:
        return fld.zero
    num, den = kernels.dot(raw, fld.degree, fld.tail)
    return CycScalar._raw(fld, num, den)


def zeta(N: int, k: int = 1) -> CycScalar:
    """zeta_N**k in Q(zeta_N)."""
    fld = field(N)
    return CycScalar._raw(fld, fld.powers[k % N], 1)


def _squarefree_split(n: int):
    f, r = 1, abs(n)
    p = 2
    while p * p <= r:
        while r % (p * p) == 0:
            r //= p * p
            f *= p
        p += 1
    return f, r


def _legendre(a: int, p: int) -> int:
    t = pow(a, (p - 1) // 2, p)
    return -1 if t == p - 1 else t


def _prime_factors(n: int):
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def sqrt_conductor(n: int) -> int:
    """Smallest N with sqrt(n) in Q(zeta_N)."""
    if n == 0:
        return 1
    _, r = _squarefree_split(n)
    s = r if n > 0 else -r
    if s == 1:
        return 1
    return abs(s) if s % 4 == 1 else 4 * abs(s)


def sqrt_of_integer(n: int, N: int = DEFAULT_CONDUCTOR) -> CycScalar:
    """A square root of n in Q(zeta_N).

    Among the two roots, the one with positive real part is returned (positive
    imaginary part when the root is purely imaginary) under zeta_N -> exp(2 pi i/N).
    """
    if n == 0:
        return field(N).zero
    need = sqrt_conductor(n)
    if N % need:
        raise FieldError(f"sqrt({n}) is not in Q(zeta_{N}); minimal conductor is {need}")
    f, r = _squarefree_split(n)
    M = max(need, 1)
    root = field(M).one
    target = 1
    for p in _prime_factors(r):
        if p == 2:
            continue
        g = field(p).zero
        for a in range(1, p):
            g = g + zeta(p, a) * _legendre(a, p)
        root = root * g.promote(M)
        target *= p if p % 4 == 1 else -p
    want = (r if n > 0 else -r)
    rest = want // target  # one of 1, -1, 2, -2
    if rest == -1:
        root = root * zeta(4, 1).promote(M)
    elif rest == 2:
        root = root * (zeta(8, 1) + zeta(8, 7)).promote(M)
    elif rest == -2:
        root = root * (zeta(8, 1) + zeta(8, 3)).promote(M)
    root = root.promote(N) * f
    z = complex(root)
    if z.real < -1e-9 or (abs(z.real) <= 1e-9 and z.imag < 0):
        root = -root
    return root


def complex_conjugate(a) -> CycScalar:
    return a.conjugate() if isinstance(a, CycScalar) else coerce(a)


def to_float(a) -> complex:
    if isinstance(a, CycScalar):
        return complex(a)
    return complex(float(Fraction(a)))
