"""Pure-Python hot kernels.

These mirror the compiled ``_kernels`` extension function for function.  The
public modules never import this file directly; they go through
:mod:`wce.kernels`, which picks the compiled version when it is importable.

Cyclotomic elements are passed around as ``(num, den)`` where ``num`` is a
tuple of Python ints (power-basis numerators) and ``den`` a positive int.
``tail`` encodes the reduction rule ``x**d == sum(c * x**i for i, c in tail)``.
"""
from math import gcd


def normalize(num, den):
    g = gcd(den, *num)
    if den < 0:
        g = -g
    if g != 1:
        return tuple([c // g for c in num]), den // g
    return tuple(num), den


def mulmod(a, b, d, tail):
    """Product of two numerator vectors reduced modulo the cyclotomic polynomial."""
    nz_a = [(i, x) for i, x in enumerate(a) if x]
    nz_b = [(j, y) for j, y in enumerate(b) if y]
    if not nz_a or not nz_b:
        return [0] * d
    if len(nz_b) == 1 and nz_b[0][0] == 0:
        y = nz_b[0][1]
        return [x * y for x in a]
    if len(nz_a) == 1 and nz_a[0][0] == 0:
        x = nz_a[0][1]
        return [x * y for y in b]
    c = [0] * (2 * d - 1)
    for i, x in nz_a:
        for j, y in nz_b:
            c[i + j] += x * y
    for k in range(2 * d - 2, d - 1, -1):
        top = c[k]
        if top:
            base = k - d
            for i, t in tail:
                c[base + i] += t * top
    del c[d:]
    return c


def mul(a, aden, b, bden, d, tail):
    return normalize(mulmod(a, b, d, tail), aden * bden)


def add(a, aden, b, bden):
    if aden == bden:
        return normalize([x + y for x, y in zip(a, b)], aden)
    return normalize([x * bden + y * aden for x, y in zip(a, b)], aden * bden)


def sub(a, aden, b, bden):
    if aden == bden:
        return normalize([x - y for x, y in zip(a, b)], aden)
    return normalize([x * bden - y * aden for x, y in zip(a, b)], aden * bden)


def scale(a, aden, p, q):
    """Multiply by the rational p/q (q > 0)."""
    if p == 0:
        return (0,) * len(a), 1
    return normalize([x * p for x in a], aden * q)


def dot(pairs, d, tail):
    """Sum of products ``sum(x * y for x, y in pairs)`` on (num, den) values.

    The accumulation is carried over a common denominator and normalized once
    at the end, which is where the solver spends most of its time.
    """
    acc = [0] * d
    acc_den = 1
    for (a, aden), (b, bden) in pairs:
        prod = mulmod(a, b, d, tail)
        pden = aden * bden
        if pden == acc_den:
            for k in range(d):
                acc[k] += prod[k]
        else:
            g = gcd(pden, acc_den)
            fa = pden // g
            fp = acc_den // g
            acc = [x * fa + y * fp for x, y in zip(acc, prod)]
            acc_den = acc_den * fa
    return normalize(acc, acc_den)
