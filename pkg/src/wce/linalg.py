"""Exact sparse Gaussian elimination over any field (Fraction or CycScalar).

Rows are ``dict`` objects mapping column index to a nonzero entry.
"""
from __future__ import annotations

from fractions import Fraction


def _axpy(row, factor, pivot_row):
    """row -= factor * pivot_row, dropping zeros."""
    for c, v in pivot_row.items():
        nv = row.get(c, 0) - factor * v
        if nv:
            row[c] = nv
        else:
            row.pop(c, None)


def echelon(rows, order=None):
    """Reduced row echelon form.

    ``order`` is the column priority (first = leftmost); by default columns are
    ordered by index.  Returns ``(pivots, basis)`` where ``basis[col]`` is the
    reduced row whose pivot (with entry 1) is ``col``.
    """
    rank_of = None if order is None else {c: k for k, c in enumerate(order)}
    key = (lambda c: c) if rank_of is None else (lambda c: rank_of[c])
    basis = {}
    for raw in rows:
        row = {c: v for c, v in raw.items() if v}
        for pc in sorted((c for c in row if c in basis), key=key):
            if pc in row:
                _axpy(row, row[pc], basis[pc])
        # leftover entries may hit pivots introduced by earlier subtractions
        while True:
            hits = [c for c in row if c in basis]
            if not hits:
                break
            pc = min(hits, key=key)
            _axpy(row, row[pc], basis[pc])
        if not row:
            continue
        pc = min(row, key=key)
        inv = 1 / row[pc]
        row = {c: v * inv for c, v in row.items()}
        for other in basis.values():
            if pc in other:
                _axpy(other, other[pc], row)
        basis[pc] = row
    pivots = sorted(basis, key=key)
    return pivots, basis


def nullspace(rows, ncols, order=None):
    """Basis of {x : row . x = 0 for every row}, one vector per free column.

    Vectors are dicts; the basis is the canonical one attached to the reduced
    echelon form (free variable set to 1, other free variables 0).
    """
    pivots, basis = echelon(rows, order)
    pivset = set(pivots)
    cols = range(ncols) if order is None else order
    out = []
    for f in cols:
        if f in pivset:
            continue
        vec = {f: Fraction(1)}
        for pc, row in basis.items():
            v = row.get(f)
            if v:
                vec[pc] = -v
        out.append(vec)
    return out


def solve_linear(A, b):
    """Solve the dense system A x = b; returns one solution (free vars 0) or None."""
    n = len(A[0]) if A else 0
    rows = []
    for r, rhs in zip(A, b):
        d = {c: v for c, v in enumerate(r) if v}
        if rhs:
            d[n] = rhs
        rows.append(d)
    order = list(range(n + 1))
    pivots, basis = echelon(rows, order)
    if n in basis:
        return None
    x = [Fraction(0)] * n
    for pc, row in basis.items():
        x[pc] = row.get(n, Fraction(0))
    return x


def rank(rows) -> int:
    return len(echelon(rows)[0])
