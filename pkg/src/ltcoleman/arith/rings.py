"""Truncated unramified and cyclotomic coefficient rings.

Every ring here stores elements as integer numpy arrays reduced modulo
``p**N``.  :class:`Elt` wraps an array with a power-of-p exponent so that
bounded denominators (``1/p**n``, ``p**(k-3)`` for ``k = 2``) stay exact.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np
import sympy

from ..errors import NoSolution, ResourceLimit
from . import poly
from .context import INF, PadicScalar, PrecisionContext, fraction_mod, unit_part, vp
from .linalg import solve_mod

MAX_UNRAMIFIED_DEGREE = 243


def _red_matrix(modulus, length, mod, dtype):
    """Rows ``j`` hold the coordinates of ``X**j`` modulo a monic ``modulus``."""
    d = len(modulus) - 1
    R = np.zeros((length, d), dtype=object)
    cur = [1] + [0] * (d - 1)
    for j in range(length):
        R[j] = cur
        # multiply by X and reduce with the monic modulus
        top = cur[-1]
        nxt = [0] + cur[:-1]
        cur = [(nxt[i] - top * modulus[i]) % mod for i in range(d)]
    return R.astype(dtype)


def conv2(A, B, mod):
    """Exact 2-D polynomial product of integer arrays (Kronecker substitution)."""
    (a0, a1), (b0, b1) = A.shape, B.shape
    w = a1 + b1 - 1
    Ap = np.zeros((a0, w), dtype=A.dtype)
    Bp = np.zeros((b0, w), dtype=B.dtype)
    Ap[:, :a1] = A
    Bp[:, :b1] = B
    flat = np.convolve(Ap.ravel(), Bp.ravel())
    # the padded tail of the flat product is zero
    out = np.zeros(((a0 + b0 - 1) * w,), dtype=flat.dtype)
    n = min(len(flat), len(out))
    out[:n] = flat[:n]
    return out.reshape(a0 + b0 - 1, w)[:, : a1 + b1 - 1] % mod


class Ring:
    """Protocol for coefficient rings used by :class:`Elt`."""

    ctx: PrecisionContext
    shape: tuple

    def zero_rep(self):
        return np.zeros(self.shape, dtype=self.ctx.dtype)

    def one_rep(self):
        r = self.zero_rep()
        r.flat[0] = 1
        return r

    def zero(self) -> "Elt":
        return Elt(self, self.zero_rep())

    def one(self) -> "Elt":
        return Elt(self, self.one_rep())

    def scalar(self, x) -> "Elt":
        """Embed an integer, Fraction or PadicScalar."""
        if isinstance(x, PadicScalar):
            r = self.zero_rep()
            r.flat[0] = x.value % self.ctx.modulus
            return Elt(self, r, x.exponent)
        u, e = unit_part(x, self.ctx.p)
        r = self.zero_rep()
        if u != 0:
            r.flat[0] = fraction_mod(u, self.ctx.p, self.ctx.N)
        else:
            e = 0
        return Elt(self, r, e)

    def element(self, rep, exponent=0) -> "Elt":
        rep = np.asarray(rep, dtype=object).astype(self.ctx.dtype) % self.ctx.modulus
        return Elt(self, rep.reshape(self.shape), exponent)

    def mul_rep(self, a, b):
        raise NotImplementedError

    def frob_rep(self, a, k: int = 1):
        return a

    def valuation_rep(self, a):
        raise NotImplementedError


class Elt:
    """``rep * p**exp`` in a :class:`Ring`; immutable."""

    __slots__ = ("ring", "rep", "exp")

    def __init__(self, ring: Ring, rep, exp: int = 0):
        self.ring = ring
        self.rep = rep % ring.ctx.modulus
        self.exp = int(exp)

    @property
    def ctx(self):
        return self.ring.ctx

    def _coerce(self, other) -> "Elt":
        if isinstance(other, Elt):
            if other.ring is not self.ring:
                raise TypeError("elements of different rings")
            return other
        return self.ring.scalar(other)

    def _align(self, other):
        other = self._coerce(other)
        e = min(self.exp, other.exp)
        p = self.ctx.p
        mod = self.ctx.modulus
        a = self.rep if self.exp == e else self.rep * (p ** (self.exp - e) % mod)
        b = other.rep if other.exp == e else other.rep * (p ** (other.exp - e) % mod)
        return a, b, e

    def __add__(self, other):
        a, b, e = self._align(other)
        return Elt(self.ring, a + b, e)

    __radd__ = __add__

    def __neg__(self):
        return Elt(self.ring, -self.rep, self.exp)

    def __sub__(self, other):
        a, b, e = self._align(other)
        return Elt(self.ring, a - b, e)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Elt):
            return Elt(self.ring, self.ring.mul_rep(self.rep, self._coerce(other).rep), self.exp + other.exp)
        if isinstance(other, PadicScalar):
            return Elt(self.ring, self.rep * other.value, self.exp + other.exponent)
        u, e = unit_part(other, self.ctx.p)
        if u == 0:
            return self.ring.zero()
        return Elt(self.ring, self.rep * fraction_mod(u, self.ctx.p, self.ctx.N), self.exp + e)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def frob(self, k: int = 1) -> "Elt":
        return Elt(self.ring, self.ring.frob_rep(self.rep, k), self.exp)

    @property
    def valuation(self):
        """Valuation normalised so that ``v(p) = 1``; ``exp + N`` for a zero rep."""
        v = self.ring.valuation_rep(self.rep)
        return self.exp + (self.ctx.N if v == INF else v)

    def is_zero(self, prec: int | None = None) -> bool:
        prec = self.ctx.check_prec if prec is None else prec
        return self.valuation >= prec

    def equals(self, other, prec: int | None = None) -> bool:
        return (self - other).is_zero(prec)

    def shift(self, e: int) -> "Elt":
        """Multiply by ``p**e``."""
        return Elt(self.ring, self.rep, self.exp + e)

    def integral_rep(self):
        """Representative of an integral element (negative exponents must cancel)."""
        if self.exp >= 0:
            return self.rep * (self.ctx.p**self.exp % self.ctx.modulus) % self.ctx.modulus
        v = self.ring.valuation_rep(self.rep)
        if v != INF and v + self.exp < 0:
            raise NoSolution("element is not integral")
        # the top -exp digits become unknown
        return self.rep // self.ctx.p ** (-self.exp)

    def __repr__(self):
        return f"Elt({self.rep.tolist()} * p^{self.exp})"


class UnramifiedRing(Ring):
    """``Z/p**N [g]`` with ``g`` a Teichmüller root of unity of order dividing ``p**m - 1``.

    Frobenius is the ring map ``g -> g**p``; it is exact because the modulus is
    the minimal polynomial of a Teichmüller lift.
    """

    def __init__(self, ctx: PrecisionContext, m: int, modulus=None):
        if m < 1:
            raise ValueError("degree must be positive")
        if m > MAX_UNRAMIFIED_DEGREE:
            raise ResourceLimit(f"unramified degree {m} exceeds cap {MAX_UNRAMIFIED_DEGREE}")
        self.ctx = ctx
        self.m = m
        self.shape = (m,)
        mod = ctx.modulus
        self.modulus = list(modulus) if modulus is not None else _teichmuller_modulus(ctx.p, ctx.N, m)
        self._red = _red_matrix(self.modulus, 2 * m - 1, mod, ctx.dtype)
        F = np.zeros((m, m), dtype=object)
        for i in range(m):
            F[:, i] = _red_matrix(self.modulus, i * ctx.p + 1, mod, object)[i * ctx.p]
        self._frob = F.astype(ctx.dtype)
        self._frob_pows = {0: np.eye(m, dtype=ctx.dtype), 1: self._frob}

    def __repr__(self):
        return f"UnramifiedRing(p={self.ctx.p}, N={self.ctx.N}, m={self.m})"

    @property
    def red_matrix(self):
        return self._red

    def gen(self) -> Elt:
        r = self.zero_rep()
        if self.m == 1:
            r[0] = 1
        else:
            r[1] = 1
        return Elt(self, r)

    def mul_rep(self, a, b):
        mod = self.ctx.modulus
        if self.m == 1:
            return a * b % mod
        c = np.convolve(a, b) % mod
        return c @ self._red[: len(c)] % mod

    def reduce_rep(self, c):
        """Reduce an array whose last axis holds polynomial coefficients in ``g``."""
        mod = self.ctx.modulus
        c = c % mod
        return c @ self._red[: c.shape[-1]] % mod

    def frob_matrix(self, k: int):
        k %= self.m
        if k not in self._frob_pows:
            mod = self.ctx.modulus
            P = self._frob_pows[0]
            B = self._frob
            e = k
            while e:
                if e & 1:
                    P = P @ B % mod
                B = B @ B % mod
                e >>= 1
            self._frob_pows[k] = P
        return self._frob_pows[k]

    def frob_rep(self, a, k: int = 1):
        if self.m == 1 or k % self.m == 0:
            return a
        # a may carry leading batch axes; the ring axis is last
        return a @ self.frob_matrix(k).T % self.ctx.modulus

    def valuation_rep(self, a):
        return min((vp(int(x), self.ctx.p) for x in a.flat), default=INF)

    def inverse(self, x: Elt) -> Elt:
        v = self.valuation_rep(x.rep)
        if v == INF:
            raise ZeroDivisionError("inverse of zero")
        p, mod = self.ctx.p, self.ctx.modulus
        u = x.rep // p**v
        if self.m == 1:
            return Elt(self, np.array([pow(int(u[0]), -1, mod)], dtype=self.ctx.dtype), -x.exp - v)
        cols = []
        e = self.one_rep()
        for _ in range(self.m):
            cols.append(self.mul_rep(u, e))
            e = self.mul_rep(e, self.gen().rep)
        A = [[int(cols[j][i]) for j in range(self.m)] for i in range(self.m)]
        sol = solve_mod(A, [1] + [0] * (self.m - 1), p, self.ctx.N)
        return Elt(self, np.array(sol, dtype=object).astype(self.ctx.dtype), -x.exp - v)

    def frobenius_order_ok(self) -> bool:
        g = self.gen()
        return bool(np.array_equal(g.frob(self.m).rep, g.rep)) and (
            self.m == 1 or not np.array_equal(g.frob(1).rep, g.rep))

    def at_precision(self, N: int) -> "UnramifiedRing":
        return make_unramified(self.ctx.with_precision(N), self.m)

    def reduce_from(self, x: Elt) -> Elt:
        """Reduce an element of the same ring at higher precision."""
        return Elt(self, np.array([int(v) for v in x.rep.flat], dtype=object).astype(self.ctx.dtype), x.exp)


def _first_irreducible(p: int, m: int):
    X = sympy.Symbol("X")
    for tail in itertools.product(range(p), repeat=m):
        coeffs = list(reversed(tail)) + [1]  # ascending, monic
        if coeffs[0] == 0:
            continue
        P = sympy.Poly(list(reversed(coeffs)), X, modulus=p)
        if P.is_irreducible:
            return coeffs
    raise AssertionError("no irreducible polynomial found")


@lru_cache(maxsize=None)
def _teichmuller_modulus_cached(p: int, N: int, m: int):
    mod = p**N
    if m == 1:
        return (mod - 1, 1)  # X - 1
    f = _first_irreducible(p, m)
    q = p**m
    t = poly.powmod([0, 1], q ** (N - 1), f, mod)
    t = t + [0] * (m - len(t))
    pows = [[1] + [0] * (m - 1)]
    for _ in range(m):
        nxt = poly.mulmod(pows[-1], t, f, mod)
        pows.append(nxt + [0] * (m - len(nxt)))
    A = [[pows[j][i] for j in range(m)] for i in range(m)]
    a = solve_mod(A, pows[m], p, N)
    return tuple([(-x) % mod for x in a] + [1])


def _teichmuller_modulus(p, N, m):
    return list(_teichmuller_modulus_cached(p, N, m))


def make_unramified(ctx: PrecisionContext, m: int) -> UnramifiedRing:
    """Degree-``m`` unramified ring with verified Frobenius of order ``m``."""
    R = UnramifiedRing(ctx, m)
    if not R.frobenius_order_ok():
        raise AssertionError("Frobenius order check failed")
    return R


def solve_omega(R: UnramifiedRing, alpha) -> Elt:
    """Unit ``Omega`` with ``frob(Omega) = alpha * Omega`` and ``Omega = 1 mod p``.

    ``alpha`` must lie in ``1 + pZ_p``.  Writing ``Omega = 1 + p*y`` turns the
    equation into a Frobenius-twisted linear system that is solved digit by
    digit; a solution modulo ``p**N`` exists iff ``alpha**m = 1 mod p**N``.
    """
    ctx = R.ctx
    p, N, mod = ctx.p, ctx.N, ctx.modulus
    a = PadicScalar.from_rational(ctx, alpha) if not isinstance(alpha, PadicScalar) else alpha
    a_int = a.to_int()
    if a_int % p != 1:
        raise ValueError("alpha must be congruent to 1 mod p")
    if pow(a_int, R.m, mod) != 1:
        achieved = vp(pow(a_int, R.m, mod) - 1, p, N)
        raise NoSolution(
            f"no Omega in degree {R.m}: alpha^m = 1 only mod p^{achieved}; "
            f"need m divisible by the order of alpha mod p^{N}", achieved=achieved)
    # Omega = sum of digits; solve frob(w) - a*w = 0 by lifting w = 1 + p*(...)
    w = R.one()
    F = R.frob_matrix(1).astype(object)
    A_lin = (F - a_int * np.eye(R.m, dtype=object)) % mod
    for k in range(1, N):
        r = (w.frob() - w * a_int).rep.astype(object) % mod
        # r is divisible by p**k; correct w by p**k * c with (F - a) c = -r / p**k mod p
        rr = [(-int(x) // p**k) % p for x in r]
        c = _solve_frob_residue(A_lin, rr, p, R.m)
        w = w + R.element(np.array(c, dtype=object) * p**k)
    if not (w.frob() - w * a_int).is_zero(N):
        raise NoSolution("Omega iteration failed to converge", achieved=(w.frob() - w * a_int).valuation)
    return w


def _solve_frob_residue(A, rhs, p, m):
    """Solve ``(frob - 1) c = rhs`` over F_q (``A`` reduces to ``frob - 1`` mod p).

    ``frob - 1`` is singular mod p (kernel F_p) with image the trace-zero
    elements; a solution exists exactly when the residue has trace zero.
    """
    Ap = [[int(A[i][j]) % p for j in range(m)] for i in range(m)]
    aug = [row + [rhs[i] % p] for i, row in enumerate(Ap)]
    piv_cols = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, m) if aug[i][c] % p), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = pow(aug[r][c], -1, p)
        aug[r] = [x * inv % p for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [(x - f * y) % p for x, y in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, m):
        if aug[i][m] % p:
            raise NoSolution("Frobenius residue equation is inconsistent")
    sol = [0] * m
    for i, c in enumerate(piv_cols):
        sol[c] = aug[i][m]
    return sol


class CyclotomicRing(Ring):
    """``R[Y] / Phi_{p^n}(1 + Y)`` where ``Y`` stands for ``zeta_{p^n} - 1``."""

    def __init__(self, base: UnramifiedRing, n: int):
        if n < 1:
            raise ValueError("level must be >= 1")
        self.base = base
        self.ctx = base.ctx
        self.n = n
        p, mod = self.ctx.p, self.ctx.modulus
        self.d = (p - 1) * p ** (n - 1)
        self.shape = (self.d, base.m)
        self.modulus = poly.shift_one(poly.cyclotomic_ppow(p, n), mod)
        self._red = _red_matrix(self.modulus, 2 * self.d - 1, mod, self.ctx.dtype)
        self._galois = {}

    def __repr__(self):
        return f"CyclotomicRing(level={self.n}, base={self.base!r})"

    def mul_rep(self, a, b):
        mod = self.ctx.modulus
        c = conv2(a, b, mod)  # (2d-1, 2m-1)
        c = self._red[: c.shape[0]].T @ c % mod
        if self.base.m == 1:
            return c
        return self.base.reduce_rep(c)

    def frob_rep(self, a, k: int = 1):
        return self.base.frob_rep(a, k)

    def valuation_rep(self, a):
        best = INF
        for i in range(self.d):
            v = self.base.valuation_rep(a[i])
            if v != INF:
                best = min(best, Fraction(v) + Fraction(i, self.d))
        return best

    def root(self) -> Elt:
        """``zeta_{p^n} - 1``."""
        r = self.zero_rep()
        r[1, 0] = 1
        return Elt(self, r)

    def zeta(self, power: int = 1) -> Elt:
        return (self.root() + 1) ** (power % self.ctx.p**self.n)

    def from_base(self, c: Elt) -> Elt:
        r = self.zero_rep()
        r[0] = c.rep
        return Elt(self, r, c.exp)

    def from_int_poly(self, coeffs) -> Elt:
        """Element ``sum c_i Y**i`` for integer (or Z_p) coefficients, reduced."""
        mod = self.ctx.modulus
        c = np.zeros((max(len(coeffs), 1), self.base.m), dtype=object)
        for i, x in enumerate(coeffs):
            c[i, 0] = int(x) % mod
        c = (self._red_long(len(coeffs)).T @ c % mod).astype(self.ctx.dtype)
        return Elt(self, c)

    def _red_long(self, length):
        if length <= self._red.shape[0]:
            return self._red[:length].astype(object)
        return _red_matrix(self.modulus, length, self.ctx.modulus, object)

    def galois_matrix(self, a: int):
        """Matrix of ``Y -> (1+Y)**a - 1`` (``zeta -> zeta**a``) on coordinates."""
        p, mod = self.ctx.p, self.ctx.modulus
        a %= p**self.n
        if a % p == 0:
            raise ValueError("Galois exponent must be a unit")
        if a not in self._galois:
            img = (self.root() + 1) ** a - 1
            cols = []
            cur = self.one()
            for _ in range(self.d):
                cols.append([int(x) for x in cur.rep[:, 0]])
                cur = cur * img
            S = np.array(cols, dtype=object).T % mod
            self._galois[a] = S.astype(self.ctx.dtype)
        return self._galois[a]

    def galois(self, x: Elt, a: int) -> Elt:
        """``zeta -> zeta**a``; coefficients in the base ring are untouched."""
        return Elt(self, self.galois_matrix(a) @ x.rep % self.ctx.modulus, x.exp)

    @cached_property
    def trace_vector(self):
        """Integer traces ``Tr(Y**i)`` to the base ring."""
        mod = self.ctx.modulus
        traces = []
        mult = np.zeros((self.d, self.d), dtype=object)
        # multiplication-by-Y matrix
        for j in range(self.d):
            mult[:, j] = self._red_long(j + 2)[j + 1]
        P = np.eye(self.d, dtype=object)
        for i in range(self.d):
            traces.append(int(np.trace(P)) % mod)
            P = mult @ P % mod
        return np.array(traces, dtype=object)

    def trace(self, x: Elt) -> Elt:
        """Trace down to the unramified base ring."""
        mod = self.ctx.modulus
        t = self.trace_vector.astype(object) @ x.rep.astype(object) % mod
        return Elt(self.base, np.asarray(t).astype(self.ctx.dtype), x.exp)

    def embed_lower(self, x: Elt) -> Elt:
        """Map an element of a lower level via ``zeta_{p^j} = zeta_{p^n}**(p**(n-j))``."""
        src = x.ring
        if not isinstance(src, CyclotomicRing) or src.base is not self.base:
            raise TypeError("can only embed cyclotomic elements over the same base")
        if src.n > self.n:
            raise ValueError("source level exceeds target level")
        if src.n == self.n:
            return x
        img = (self.root() + 1) ** (self.ctx.p ** (self.n - src.n)) - 1
        acc = self.zero()
        for i in reversed(range(src.d)):
            acc = acc * img + self.from_base(Elt(self.base, src.zero_rep()[0] + x.rep[i]))
        return acc.shift(x.exp)

    def evaluate_int_poly(self, coeffs, x: Elt) -> Elt:
        acc = self.zero()
        for c in reversed(coeffs):
            acc = acc * x + int(c)
        return acc
