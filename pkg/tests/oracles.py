"""Independent exact-rational reference computations used by the tests."""
from fractions import Fraction
from math import comb


def ser_mul(a, b, M):
    out = [Fraction(0)] * (M + 1)
    for i, x in enumerate(a[: M + 1]):
        if x:
            for j, y in enumerate(b[: M + 1 - i]):
                out[i + j] += x * y
    return out


def ser_compose(f, g, M):
    """f(g) for truncated rational series, g(0) = 0."""
    out = [Fraction(0)] * (M + 1)
    power = [Fraction(1)] + [Fraction(0)] * M
    for c in f[: M + 1]:
        if c:
            out = [o + c * q for o, q in zip(out, power)]
        power = ser_mul(power, g, M)
    return out


def ser_revert(f, M):
    """Compositional inverse of f = X + ... ."""
    inv = [Fraction(0), Fraction(1)] + [Fraction(0)] * (M - 1)
    for k in range(2, M + 1):
        err = ser_compose(f, inv, M)
        inv[k] -= err[k]
    return inv


def log_limit(g, p, M, depth):
    """g^(depth)(X) / pi^depth, the approximation of the formal logarithm."""
    pi = Fraction(g[1])
    it = [Fraction(0), Fraction(1)] + [Fraction(0)] * (M - 1)
    gf = [Fraction(c) for c in g] + [Fraction(0)] * (M + 1 - len(g))
    for _ in range(depth):
        it = ser_compose(gf, it, M)
    return [c / pi**depth for c in it]


def log_one_plus(M):
    return [Fraction(0)] + [Fraction((-1) ** (j + 1), j) for j in range(1, M + 1)]


def law_from_log(lam, M):
    """lambda^{-1}(lambda(X) + lambda(Y)) as a dict {(i, j): coefficient}, total degree <= M."""
    inv = ser_revert(lam, M)
    # bivariate: represent series in X, Y as dict
    def bmul(a, b):
        out = {}
        for (i, j), x in a.items():
            for (k, l), y in b.items():
                if i + j + k + l <= M:
                    out[(i + k, j + l)] = out.get((i + k, j + l), 0) + x * y
        return out
    s = {}
    for i, c in enumerate(lam):
        if c:
            s[(i, 0)] = s.get((i, 0), 0) + c
            s[(0, i)] = s.get((0, i), 0) + c
    out = {}
    power = {(0, 0): Fraction(1)}
    for c in inv:
        if c:
            for key, v in power.items():
                out[key] = out.get(key, 0) + c * v
        power = bmul(power, s)
    return out


def frac_mod(x, p, N):
    """Residue of a p-integral fraction mod p^N."""
    mod = p**N
    return x.numerator * pow(x.denominator, -1, mod) % mod


def binomial_series(a, M):
    return [comb(a, i) if a >= 0 else 0 for i in range(M + 1)]
