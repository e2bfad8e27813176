# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels; same signatures and results as ``_kernels_py``.

Coefficients stay Python ints (they grow without bound), so the gain comes
from typed loop indices and list access rather than machine arithmetic.
"""
from math import gcd


cpdef tuple normalize(num, den):
    cdef Py_ssize_t k, n
    cdef list lst = list(num)
    g = gcd(den, *lst)
    if den < 0:
        g = -g
    if g != 1:
        n = len(lst)
        for k in range(n):
            lst[k] = lst[k] // g
        return tuple(lst), den // g
    return tuple(lst), den


cpdef list mulmod(a, b, Py_ssize_t d, tail):
    cdef Py_ssize_t i, j, k, base, n_a, n_b, ti
    cdef list ia = [], xa = [], ib = [], yb = []
    cdef list c
    cdef list tidx = [t[0] for t in tail]
    cdef list tval = [t[1] for t in tail]
    cdef Py_ssize_t nt = len(tidx)
    for i in range(d):
        x = a[i]
        if x:
            ia.append(i)
            xa.append(x)
        y = b[i]
        if y:
            ib.append(i)
            yb.append(y)
    n_a = len(ia)
    n_b = len(ib)
    if n_a == 0 or n_b == 0:
        return [0] * d
    if n_b == 1 and ib[0] == 0:
        y = yb[0]
        return [x * y for x in a]
    if n_a == 1 and ia[0] == 0:
        x = xa[0]
        return [x * y for y in b]
    c = [0] * (2 * d - 1)
    for i in range(n_a):
        x = xa[i]
        base = ia[i]
        for j in range(n_b):
            c[base + ib[j]] += x * yb[j]
    for k in range(2 * d - 2, d - 1, -1):
        top = c[k]
        if top:
            base = k - d
            for ti in range(nt):
                c[base + <Py_ssize_t>tidx[ti]] += tval[ti] * top
    del c[d:]
    return c


cpdef tuple mul(a, aden, b, bden, Py_ssize_t d, tail):
    return normalize(mulmod(a, b, d, tail), aden * bden)


cpdef tuple add(a, aden, b, bden):
    if aden == bden:
        return normalize([x + y for x, y in zip(a, b)], aden)
    return normalize([x * bden + y * aden for x, y in zip(a, b)], aden * bden)


cpdef tuple sub(a, aden, b, bden):
    if aden == bden:
        return normalize([x - y for x, y in zip(a, b)], aden)
    return normalize([x * bden - y * aden for x, y in zip(a, b)], aden * bden)


cpdef tuple scale(a, aden, p, q):
    if p == 0:
        return (0,) * len(a), 1
    return normalize([x * p for x in a], aden * q)


cpdef tuple dot(pairs, Py_ssize_t d, tail):
    cdef Py_ssize_t k
    cdef list acc = [0] * d
    cdef list prod
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
            for k in range(d):
                acc[k] = acc[k] * fa + prod[k] * fp
            acc_den = acc_den * fa
    return normalize(acc, acc_den)
