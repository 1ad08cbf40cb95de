"""Dense integer polynomials modulo p**N (ascending coefficient lists)."""
from __future__ import annotations

from math import comb


def trim(a):
    a = list(a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def add(a, b, mod):
    n = max(len(a), len(b))
    return [((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % mod for i in range(n)]


def mul(a, b, mod):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return [c % mod for c in out]


def divmod_poly(a, b, mod):
    """Division by ``b`` whose leading coefficient is a unit modulo ``mod``."""
    b = trim(b)
    a = [x % mod for x in a]
    db = len(b) - 1
    inv = pow(b[-1], -1, mod)
    if len(a) - 1 < db:
        return [0], trim(a)
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] * inv % mod
        q[i - db] = c
        if c:
            for j in range(db + 1):
                a[i - db + j] = (a[i - db + j] - c * b[j]) % mod
    return trim(q), trim(a[:db] or [0])


def rem(a, b, mod):
    return divmod_poly(a, b, mod)[1]


def mulmod(a, b, f, mod):
    return rem(mul(a, b, mod), f, mod)


def powmod(a, e, f, mod):
    result = [1]
    base = rem(a, f, mod)
    while e:
        if e & 1:
            result = mulmod(result, base, f, mod)
        base = mulmod(base, base, f, mod)
        e >>= 1
    return result


def compose(f, g, mod):
    """``f(g(X))`` as an exact polynomial."""
    out = [0]
    for c in reversed(f):
        out = add(mul(out, g, mod), [c], mod)
    return trim(out)


def evaluate(f, x):
    acc = 0
    for c in reversed(f):
        acc = acc * x + c
    return acc


def shift_one(f, mod):
    """``f(1 + Y)``."""
    out = [0] * len(f)
    for i, c in enumerate(f):
        for j in range(i + 1):
            out[j] += c * comb(i, j)
    return [x % mod for x in out]


def cyclotomic_ppow(p: int, n: int):
    """Coefficients of the p**n-th cyclotomic polynomial."""
    out = [0] * ((p - 1) * p ** (n - 1) + 1)
    for i in range(p):
        out[i * p ** (n - 1)] = 1
    return out
