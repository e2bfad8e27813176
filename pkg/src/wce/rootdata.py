"""ADE root systems: Cartan matrix, Coxeter element, exponents, eigenbasis, cocycle.

Vectors of the Cartan subalgebra are written in one of three coordinate
systems, recorded by a basis tag on :class:`LatticeVector`:

``"root"``
    coordinates along the simple roots alpha_1..alpha_l (pairing = Cartan matrix);
``"ambient"``
    standard orthonormal coordinates of Z^(l+1) (type A) or Z^l (type D);
``"eigen"``
    coordinates along the eigenbasis phi^1..phi^l (pairing eta_ij = delta_{i+j,l+1}).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property, lru_cache

from wce.linalg import nullspace, solve_linear
from wce.numfield import CycScalar, FieldError, coerce, field, sqrt_of_integer, zeta

BASES = ("root", "ambient", "eigen")

EXPONENTS_E = {
    6: (12, (1, 4, 5, 7, 8, 11)),
    7: (18, (1, 5, 7, 9, 11, 13, 17)),
    8: (30, (1, 7, 11, 13, 17, 19, 23, 29)),
}


class RootDataError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeVector:
    coords: tuple
    basis: str = "root"

    def __post_init__(self):
        if self.basis not in BASES:
            raise RootDataError(f"unknown basis tag {self.basis!r}")
        if self.basis != "eigen":
            object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))
        else:
            object.__setattr__(self, "coords", tuple(self.coords))

    def __add__(self, other):
        self._same(other)
        return LatticeVector(tuple(a + b for a, b in zip(self.coords, other.coords)), self.basis)

    def __sub__(self, other):
        self._same(other)
        return LatticeVector(tuple(a - b for a, b in zip(self.coords, other.coords)), self.basis)

    def __neg__(self):
        return LatticeVector(tuple(-a for a in self.coords), self.basis)

    def __mul__(self, k):
        return LatticeVector(tuple(a * k for a in self.coords), self.basis)

    __rmul__ = __mul__

    def _same(self, other):
        if not isinstance(other, LatticeVector) or other.basis != self.basis:
            raise RootDataError("basis mismatch between lattice vectors")

    def is_integral(self) -> bool:
        return self.basis != "eigen" and all(c.denominator == 1 for c in self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)


def root_vector(*coords) -> LatticeVector:
    return LatticeVector(tuple(coords), "root")


def ambient_vector(*coords) -> LatticeVector:
    return LatticeVector(tuple(coords), "ambient")


# -- Cartan matrices ----------------------------------------------------------

def _ambient_simple_roots(family: str, rank: int):
    if family == "A":
        n = rank + 1
        return [[1 if k == i else -1 if k == i + 1 else 0 for k in range(n)] for i in range(rank)]
    if family == "D":
        rows = [[1 if k == i else -1 if k == i + 1 else 0 for k in range(rank)] for i in range(rank - 1)]
        rows.append([1 if k >= rank - 2 else 0 for k in range(rank)])
        return rows
    return None


def _cartan_E(rank: int):
    # Bourbaki labelling: chain 1-3-4-5-...-rank, node 2 attached to 4.
    edges = [(1, 3), (3, 4), (2, 4)] + [(k, k + 1) for k in range(4, rank)]
    A = [[2 if i == j else 0 for j in range(rank)] for i in range(rank)]
    for a, b in edges:
        A[a - 1][b - 1] = A[b - 1][a - 1] = -1
    return A


def cartan_matrix(family: str, rank: int):
    amb = _ambient_simple_roots(family, rank)
    if amb is not None:
        return [[sum(x * y for x, y in zip(r, s)) for s in amb] for r in amb]
    return _cartan_E(rank)


def _check_type(family: str, rank: int):
    ok = (family == "A" and rank >= 1) or (family == "D" and rank >= 4) or (family == "E" and rank in (6, 7, 8))
    if not ok:
        raise RootDataError(f"unsupported root system {family}{rank}")


def coxeter_data(family: str, rank: int):
    if family == "A":
        return rank + 1, tuple(range(1, rank + 1))
    if family == "D":
        return 2 * rank - 2, tuple(sorted(list(range(1, 2 * rank - 2, 2)) + [rank - 1]))
    return EXPONENTS_E[rank]


def parse_type(text: str):
    """'D4' -> ('D', 4)."""
    text = text.strip().upper()
    if len(text) < 2 or text[0] not in "ADE" or not text[1:].isdigit():
        raise RootDataError(f"cannot parse root system {text!r}")
    return text[0], int(text[1:])


# -- small exact matrix helpers -------------------------------------------------

def _matmul(X, Y):
    return [[sum(X[i][k] * Y[k][j] for k in range(len(Y))) for j in range(len(Y[0]))] for i in range(len(X))]


def _identity(n, one=1):
    return [[one if i == j else 0 for j in range(n)] for i in range(n)]


def _inverse(M):
    n = len(M)
    cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        x = solve_linear([[Fraction(v) for v in row] for row in M], e)
        if x is None:
            raise RootDataError("matrix is singular")
        cols.append(x)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _sqrt_rational(q: Fraction, N: int) -> CycScalar:
    q = Fraction(q)
    return sqrt_of_integer(q.numerator * q.denominator, N) / q.denominator


# -- the datum -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RootDatum:
    family: str
    rank: int
    conductor: int
    cartan: tuple = dc_field(repr=False)
    sigma: tuple = dc_field(repr=False)
    h: int = 0
    exponents: tuple = ()
    eigenbasis: tuple = dc_field(default=(), repr=False)  # eigenbasis[r][i]: root coord r of phi^(i+1)
    ambient: tuple | None = dc_field(default=None, repr=False)

    @property
    def name(self) -> str:
        return f"{self.family}{self.rank}"

    @property
    def ell(self) -> int:
        return self.rank

    @cached_property
    def eta(self):
        l = self.rank
        return tuple(tuple(int(i + j == l - 1) for j in range(l)) for i in range(l))

    @cached_property
    def zeta_h(self) -> CycScalar:
        return zeta(self.h, 1).promote(self.conductor)

    def dual_index(self, i: int) -> int:
        """1-based j with eta_{ij} = 1."""
        return self.rank + 1 - i

    def simple_root(self, i: int) -> LatticeVector:
        return LatticeVector(tuple(int(k == i - 1) for k in range(self.rank)), "root")

    @cached_property
    def _one_minus_sigma_inv(self):
        n = self.rank
        M = [[Fraction(int(i == j)) - self.sigma[i][j] for j in range(n)] for i in range(n)]
        return _inverse(M)

    # coordinates ------------------------------------------------------------
    def to_root(self, v: LatticeVector) -> LatticeVector:
        if v.basis == "root":
            return v
        if v.basis == "ambient":
            if self.ambient is None:
                raise RootDataError(f"{self.name} has no ambient lattice")
            A = [[Fraction(self.ambient[i][k]) for i in range(self.rank)] for k in range(len(self.ambient[0]))]
            x = solve_linear(A, list(v.coords))
            if x is None:
                raise RootDataError("ambient vector is not in the span of the roots")
            return LatticeVector(tuple(x), "root")
        raise RootDataError("eigen-basis vectors have no rational root coordinates")

    def to_eigen(self, v) -> tuple:
        """Coordinates (c_1..c_l) with v = sum c_j phi^j, as CycScalars."""
        N = self.conductor
        if isinstance(v, LatticeVector) and v.basis == "eigen":
            return tuple(coerce(c, N) for c in v.coords)
        if isinstance(v, LatticeVector) and v.basis == "ambient" and self.ambient is not None \
                and len(self.ambient[0]) == self.rank:
            # ambient space equals h (type D); pair directly with the eigenvectors
            return tuple(self._pair_ambient_phi(v, self.dual_index(j)) for j in range(1, self.rank + 1))
        rv = self.to_root(v)
        return tuple(self.pair(self.phi(self.dual_index(j)), rv) for j in range(1, self.rank + 1))

    def _pair_ambient_phi(self, v, i):
        amb = self.phi_ambient(i)
        return sum((a * c for a, c in zip(amb, v.coords)), field(self.conductor).zero)

    def phi(self, i: int) -> LatticeVector:
        """phi^i in root coordinates (1-based)."""
        return _RootField(tuple(row[i - 1] for row in self.eigenbasis))

    def phi_ambient(self, i: int) -> tuple:
        if self.ambient is None:
            raise RootDataError(f"{self.name} has no ambient lattice")
        col = [row[i - 1] for row in self.eigenbasis]
        dim = len(self.ambient[0])
        zero = field(self.conductor).zero
        return tuple(sum((col[r] * self.ambient[r][k] for r in range(self.rank)), zero) for k in range(dim))

    # pairing ------------------------------------------------------------------
    def pair(self, v, w):
        """Bilinear form; both arguments must carry the same basis tag."""
        if isinstance(v, _RootField) or isinstance(w, _RootField):
            a = v.coords if isinstance(v, _RootField) else self._root_coords(v)
            b = w.coords if isinstance(w, _RootField) else self._root_coords(w)
            return self._pair_root(a, b)
        if not isinstance(v, LatticeVector) or not isinstance(w, LatticeVector):
            raise RootDataError("pair expects lattice or field vectors")
        if v.basis != w.basis:
            raise RootDataError(f"basis mismatch: {v.basis} vs {w.basis}")
        if v.basis == "root":
            return self._pair_root(v.coords, w.coords)
        if v.basis == "ambient":
            return sum((a * b for a, b in zip(v.coords, w.coords)), Fraction(0))
        l = self.rank
        zero = field(self.conductor).zero
        return sum((coerce(v.coords[i], self.conductor) * w.coords[l - 1 - i] for i in range(l)), zero)

    def _root_coords(self, v):
        if v.basis != "root":
            raise RootDataError(f"basis mismatch: root vs {v.basis}")
        return v.coords

    def _pair_root(self, a, b):
        A = self.cartan
        total = 0
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y and A[i][j]:
                        total = total + x * A[i][j] * y
        if isinstance(total, int):
            return Fraction(total)
        return total

    # group data ---------------------------------------------------------------
    def apply_sigma(self, v: LatticeVector) -> LatticeVector:
        rv = self.to_root(v)
        return LatticeVector(tuple(sum(self.sigma[i][j] * rv.coords[j] for j in range(self.rank))
                                   for i in range(self.rank)), "root")

    def reflection(self, i: int):
        """Matrix of R_i in root coordinates."""
        n = self.rank
        A = self.cartan
        return tuple(tuple(Fraction(int(r == c)) - (A[i - 1][c] if r == i - 1 else 0) for c in range(n))
                     for r in range(n))

    @cached_property
    def roots(self):
        """All roots, in root coordinates (orbit of the simple roots under reflections)."""
        seen = set()
        frontier = [tuple(int(k == i) for k in range(self.rank)) for i in range(self.rank)]
        for r in frontier:
            seen.add(r)
        A = self.cartan
        while frontier:
            nxt = []
            for r in frontier:
                for i in range(self.rank):
                    c = sum(A[i][j] * r[j] for j in range(self.rank))
                    s = tuple(r[k] - (c if k == i else 0) for k in range(self.rank))
                    if s not in seen:
                        seen.add(s)
                        nxt.append(s)
            frontier = nxt
        return tuple(LatticeVector(r, "root") for r in sorted(seen))

    def epsilon_exponent(self, a: LatticeVector, b: LatticeVector) -> Fraction:
        ra, rb = self.to_root(a), self.to_root(b)
        X = self._one_minus_sigma_inv
        xa = [sum(X[i][j] * ra.coords[j] for j in range(self.rank)) for i in range(self.rank)]
        return self._pair_root(xa, rb.coords)


class _RootField:
    """A complexified vector in root coordinates (entries are CycScalars)."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        self.coords = tuple(coords)


def epsilon(datum: RootDatum, a: LatticeVector, b: LatticeVector) -> int:
    """The bimultiplicative sign cocycle.

    On the root lattice this is (-1)**(((1-sigma)^-1 a | b)).  On the type-D
    ambient lattice Z^l the upper-triangular sign is used instead:
    eps(e_i, e_j) = -1 for i <= j and +1 for i > j.
    """
    if a.basis == "ambient" and b.basis == "ambient" and datum.family == "D":
        if not (a.is_integral() and b.is_integral()):
            raise RootDataError("epsilon needs integral vectors")
        e = 0
        for i, x in enumerate(a.coords):
            if x:
                for j in range(i, len(b.coords)):
                    e += int(x) * int(b.coords[j])
        return -1 if e % 2 else 1
    if not (a.is_integral() and b.is_integral()):
        raise RootDataError("epsilon needs integral vectors")
    ex = datum.epsilon_exponent(a, b)
    if ex.denominator != 1:
        raise RootDataError(f"non-integral cocycle exponent {ex}; vector outside the supported lattice")
    return -1 if ex.numerator % 2 else 1


def pair(datum: RootDatum, v, w):
    return datum.pair(v, w)


# -- eigenbasis construction -----------------------------------------------------------

def _eigen_nullspace(sigma, eigval, N):
    n = len(sigma)
    rows = []
    for i in range(n):
        r = {}
        for j in range(n):
            v = coerce(sigma[i][j], N) - (eigval if i == j else 0)
            if v:
                r[j] = v
        rows.append(r)
    basis = nullspace(rows, n)
    return [[coerce(vec.get(j, 0), N) for j in range(n)] for vec in basis]


def _normalize_first(vec):
    for x in vec:
        if x:
            inv = 1 / x
            return [v * inv for v in vec]
    raise RootDataError("zero eigenvector")


def _pair_root_lists(A, a, b):
    total = 0
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y and A[i][j]:
                    total = total + x * A[i][j] * y
    return total


def _d4_explicit_eigenbasis(N):
    """phi^1..phi^4 in ambient coordinates as displayed for D4."""
    z6 = zeta(6, 1).promote(N)
    one = field(N).one
    s3 = sqrt_of_integer(3, N)
    s6 = sqrt_of_integer(6, N)
    sm3 = sqrt_of_integer(-3, N)
    phi1 = [z6 * z6 / s3, z6 / s3, one / s3, field(N).zero]
    phi2 = [-one / s6, one / s6, -one / s6, sm3 / s6]
    phi3 = [c.conjugate() for c in phi2]
    phi4 = [c.conjugate() for c in phi1]
    return [phi1, phi2, phi3, phi4]


def _build_eigenbasis(family, rank, cartan, sigma, h, exponents, ambient, N):
    """Columns phi^1..phi^l in root coordinates."""
    zh = zeta(h, 1).promote(N)
    l = rank
    cols = [None] * l
    A = cartan

    def from_ambient(vec):
        M = [[coerce(ambient[i][k], N) for i in range(l)] for k in range(len(ambient[0]))]
        x = solve_linear(M, vec)
        if x is None:
            raise RootDataError("eigenvector outside the root span")
        return [coerce(c, N) for c in x]

    if family == "D" and rank == 4:
        for i, v in enumerate(_d4_explicit_eigenbasis(N)):
            cols[i] = from_ambient(v)
        return cols

    if family == "A":
        n = rank + 1
        dft = {}
        for k in range(1, n):
            w = zeta(n, 1).promote(N)
            vec = [w ** (k * j) for j in range(n)]
            dft[k] = from_ambient(vec)
        # match each DFT vector to its exponent
        by_exp = {}
        for k, v in dft.items():
            sv = [sum((coerce(sigma[i][j], N) * v[j] for j in range(l)), field(N).zero) for i in range(l)]
            for m in exponents:
                lam = zh ** m
                if all(sv[i] == lam * v[i] for i in range(l)):
                    by_exp[m] = v
                    break
        vecs = {}
        for i, m in enumerate(exponents, start=1):
            vecs[i] = [by_exp[m]]
    else:
        vecs = {}
        i = 1
        done = set()
        for m in exponents:
            if m in done:
                continue
            done.add(m)
            sp = _eigen_nullspace(sigma, zh ** m, N)
            mult = exponents.count(m)
            if len(sp) != mult:
                raise RootDataError(f"eigenspace of zeta^{m} has dimension {len(sp)}, expected {mult}")
            for k in range(mult):
                vecs[i + k] = sp
            i += mult

    for i in range(1, l + 1):
        j = l + 1 - i
        if cols[i - 1] is not None:
            continue
        m = exponents[i - 1]
        if i == j:
            v = _normalize_first(vecs[i][0])
            norm = _pair_root_lists(A, v, v)
            s = _sqrt_rational(coerce(norm, N).to_rational(), N)
            cols[i - 1] = [x / s for x in v]
        elif exponents.count(m) == 2 and exponents[j - 1] == m:
            # degenerate real pair (eigenvalue -1): build an isotropic basis
            x, y = vecs[i]
            x = [coerce(c.to_rational(), N) for c in _normalize_first(x)]
            y = [coerce(c.to_rational(), N) for c in _normalize_first(y)]
            t = _pair_root_lists(A, x, y) / _pair_root_lists(A, x, x)
            y = [b - t * a for a, b in zip(x, y)]
            sa = _sqrt_rational(_pair_root_lists(A, x, x).to_rational(), N)
            sb = _sqrt_rational(_pair_root_lists(A, y, y).to_rational(), N)
            ii = zeta(4, 1).promote(N)
            s2 = sqrt_of_integer(2, N)
            lo, hi = min(i, j), max(i, j)
            cols[lo - 1] = [(a / sa + ii * b / sb) / s2 for a, b in zip(x, y)]
            cols[hi - 1] = [(a / sa - ii * b / sb) / s2 for a, b in zip(x, y)]
        elif i < j:
            v = _normalize_first(vecs[i][0])
            w = _normalize_first(vecs[j][0])
            c = _pair_root_lists(A, v, w)
            cols[i - 1] = v
            cols[j - 1] = [x / c for x in w]
    return cols


@lru_cache(maxsize=None)
def build_root_datum(family: str, rank: int, conductor: int | None = None) -> RootDatum:
    family = family.upper()
    _check_type(family, rank)
    h, exps = coxeter_data(family, rank)
    N = conductor or math.lcm(24, 2 * h)
    if N % h:
        raise RootDataError(f"conductor {N} does not contain zeta_{h}")
    A = cartan_matrix(family, rank)
    sigma = [[Fraction(int(i == j)) for j in range(rank)] for i in range(rank)]
    for i in range(1, rank + 1):
        Ri = [[Fraction(int(r == c)) - (A[i - 1][c] if r == i - 1 else 0) for c in range(rank)] for r in range(rank)]
        sigma = _matmul(sigma, Ri)
    amb = _ambient_simple_roots(family, rank)
    cols = _build_eigenbasis(family, rank, A, sigma, h, exps, amb, N)
    eig = tuple(tuple(cols[i][r] for i in range(rank)) for r in range(rank))
    datum = RootDatum(
        family=family,
        rank=rank,
        conductor=N,
        cartan=tuple(tuple(r) for r in A),
        sigma=tuple(tuple(r) for r in sigma),
        h=h,
        exponents=exps,
        eigenbasis=eig,
        ambient=None if amb is None else tuple(tuple(r) for r in amb),
    )
    return datum


def sigma_power(datum: RootDatum, k: int):
    n = datum.rank
    M = _identity(n, Fraction(1))
    for _ in range(k):
        M = _matmul(M, [list(r) for r in datum.sigma])
    return M


def check_root_datum(datum: RootDatum) -> list[str]:
    """Return the list of violated invariants (empty when all hold)."""
    problems = []
    n = datum.rank
    I = _identity(n, Fraction(1))
    M = _identity(n, Fraction(1))
    for k in range(1, datum.h + 1):
        M = _matmul(M, [list(r) for r in datum.sigma])
        if M == I and k < datum.h:
            problems.append(f"sigma^{k} = 1 with k < h")
    if M != I:
        problems.append("sigma^h != 1")
    for i, m in enumerate(datum.exponents, start=1):
        if m + datum.exponents[n - i] != datum.h:
            problems.append(f"m_{i} + m_{n + 1 - i} != h")
    N = datum.conductor
    zh = datum.zeta_h
    for i in range(1, n + 1):
        v = datum.phi(i).coords
        sv = [sum((coerce(datum.sigma[r][c], N) * v[c] for c in range(n)), field(N).zero) for r in range(n)]
        lam = zh ** datum.exponents[i - 1]
        if any(sv[r] != lam * v[r] for r in range(n)):
            problems.append(f"phi^{i} is not a zeta^{datum.exponents[i - 1]} eigenvector")
        for j in range(1, n + 1):
            p = datum.pair(datum.phi(i), datum.phi(j))
            if p != int(i + j == n + 1):
                problems.append(f"(phi^{i}|phi^{j}) = {p}")
    return problems
