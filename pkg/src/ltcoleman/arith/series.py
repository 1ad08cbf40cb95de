"""Truncated power series over unramified rings.

A :class:`TruncatedSeries` holds ``M + 1`` coefficients, either in the
monomial basis ``X**i`` or the binomial basis ``(1 + X)**j``, together with a
power-of-p exponent.  The ``polynomial`` flag records that every coefficient
beyond degree ``M`` is known to vanish, so evaluations and divisions are exact
rather than limited by the truncation.
"""
from __future__ import annotations

import json
from functools import lru_cache
from math import comb

import numpy as np

from ..errors import DegreeOverflow, NoSolution
from .context import INF, PrecisionContext, vp
from .rings import CyclotomicRing, Elt, UnramifiedRing, conv2, make_unramified

MONOMIAL = "monomial"
BINOMIAL = "binomial"


@lru_cache(maxsize=None)
def _binomial_matrices(M: int, mod: int):
    """``(to_monomial, to_binomial)`` integer matrices acting on coefficient columns."""
    T = np.zeros((M + 1, M + 1), dtype=object)
    Ti = np.zeros((M + 1, M + 1), dtype=object)
    for i in range(M + 1):
        for j in range(i, M + 1):
            T[i, j] = comb(j, i) % mod
            Ti[i, j] = (-1) ** (j - i) * comb(j, i) % mod
    return T, Ti


@lru_cache(maxsize=None)
def scalar_ring(ctx: PrecisionContext) -> UnramifiedRing:
    return make_unramified(ctx, 1)


class TruncatedSeries:
    """Power series modulo ``(p**N, X**(M+1))`` with coefficients in an unramified ring."""

    __slots__ = ("ring", "coeffs", "exp", "basis", "polynomial")

    def __init__(self, ring: UnramifiedRing, coeffs, exp: int = 0, basis: str = MONOMIAL,
                 polynomial: bool = False):
        ctx = ring.ctx
        c = np.asarray(coeffs, dtype=object)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
            if ring.m > 1:
                full = np.zeros((c.shape[0], ring.m), dtype=object)
                full[:, :1] = c
                c = full
        if c.shape[0] > ctx.M + 1:
            if polynomial and np.any(c[ctx.M + 1:] % ctx.modulus):
                raise DegreeOverflow(f"polynomial degree exceeds truncation M={ctx.M}")
            if np.any(c[ctx.M + 1:] % ctx.modulus):
                polynomial = False
            c = c[: ctx.M + 1]
        out = np.zeros((ctx.M + 1, ring.m), dtype=object)
        out[: c.shape[0]] = c
        if basis not in (MONOMIAL, BINOMIAL):
            raise ValueError(f"unknown basis {basis!r}")
        self.ring = ring
        self.coeffs = (out % ctx.modulus).astype(ctx.dtype)
        self.exp = int(exp)
        self.basis = basis
        self.polynomial = bool(polynomial)

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, ring, polynomial=True):
        return cls(ring, np.zeros((1, ring.m), dtype=object), polynomial=polynomial)

    @classmethod
    def from_ints(cls, ring, ints, polynomial=True, exp=0):
        return cls(ring, [int(x) for x in ints], exp=exp, polynomial=polynomial)

    @classmethod
    def X(cls, ring):
        return cls.from_ints(ring, [0, 1])

    @classmethod
    def binomial_power(cls, ring, j: int):
        """``(1 + X)**j`` as an exact polynomial (``j <= M``)."""
        return cls.from_ints(ring, [comb(j, i) for i in range(j + 1)])

    @property
    def ctx(self) -> PrecisionContext:
        return self.ring.ctx

    @property
    def M(self) -> int:
        return self.ctx.M

    def _new(self, coeffs, exp=None, basis=None, polynomial=None):
        return TruncatedSeries(self.ring, coeffs, self.exp if exp is None else exp,
                               self.basis if basis is None else basis,
                               self.polynomial if polynomial is None else polynomial)

    # basis -------------------------------------------------------------------
    def to_monomial(self) -> "TruncatedSeries":
        if self.basis == MONOMIAL:
            return self
        T, _ = _binomial_matrices(self.M, self.ctx.modulus)
        return self._new(T @ self.coeffs.astype(object) % self.ctx.modulus, basis=MONOMIAL)

    def to_binomial(self) -> "TruncatedSeries":
        if self.basis == BINOMIAL:
            return self
        _, Ti = _binomial_matrices(self.M, self.ctx.modulus)
        return self._new(Ti @ self.coeffs.astype(object) % self.ctx.modulus, basis=BINOMIAL)

    def in_basis(self, basis: str) -> "TruncatedSeries":
        return self.to_monomial() if basis == MONOMIAL else self.to_binomial()

    # coefficient access --------------------------------------------------
    def coefficient(self, i: int) -> Elt:
        """Coefficient ``i`` in the series' own basis."""
        return Elt(self.ring, self.coeffs[i].copy(), self.exp)

    def degree(self) -> int:
        nz = [i for i in range(self.M + 1) if np.any(self.coeffs[i] % self.ctx.modulus)]
        return nz[-1] if nz else -1

    def change_ring(self, R: UnramifiedRing) -> "TruncatedSeries":
        """Embed a series over the scalars into ``R`` (or re-reduce at lower precision)."""
        if R is self.ring:
            return self
        if self.ring.m == 1:
            c = np.zeros((self.M + 1, R.m), dtype=object)
            c[:, 0] = self.coeffs[:, 0]
            return TruncatedSeries(R, c % R.ctx.modulus, self.exp, self.basis, self.polynomial)
        if self.ring.m == R.m and R.ctx.N <= self.ctx.N:
            M = min(R.ctx.M, self.M)
            return TruncatedSeries(R, self.coeffs.astype(object)[: M + 1], self.exp, self.basis,
                                   self.polynomial)
        raise TypeError("incompatible coefficient rings")

    # arithmetic ------------------------------------------------------------
    def _aligned(self, other):
        if not isinstance(other, TruncatedSeries):
            other = constant(self.ring, other)
        a, b = self.to_monomial(), other.to_monomial()
        if b.ring is not a.ring:
            if a.ring.m == 1:
                a = a.change_ring(b.ring)
            else:
                b = b.change_ring(a.ring)
        e = min(a.exp, b.exp)
        p, mod = self.ctx.p, self.ctx.modulus
        ca = a.coeffs.astype(object) * (p ** (a.exp - e) % mod)
        cb = b.coeffs.astype(object) * (p ** (b.exp - e) % mod)
        return a, ca, cb, e, b

    def __add__(self, other):
        a, ca, cb, e, b = self._aligned(other)
        return a._new(ca + cb, exp=e, polynomial=a.polynomial and b.polynomial).in_basis(self.basis)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.coeffs.astype(object))

    def __sub__(self, other):
        a, ca, cb, e, b = self._aligned(other)
        return a._new(ca - cb, exp=e, polynomial=a.polynomial and b.polynomial).in_basis(self.basis)

    def __rsub__(self, other):
        return constant(self.ring, other) - self

    def __mul__(self, other):
        if isinstance(other, Elt):
            return self.scale(other)
        if not isinstance(other, TruncatedSeries):
            return self.scale(self.ring.scalar(other))
        a, b = self.to_monomial(), other.to_monomial()
        if a.ring is not b.ring:
            if a.ring.m == 1:
                a = a.change_ring(b.ring)
            else:
                b = b.change_ring(a.ring)
        R = a.ring
        mod = self.ctx.modulus
        da, db = a.degree(), b.degree()
        poly_ok = a.polynomial and b.polynomial and (da + db <= self.M)
        if R.m == 1:
            c = np.convolve(a.coeffs[:, 0], b.coeffs[:, 0])[: self.M + 1] % mod
        else:
            c = conv2(a.coeffs, b.coeffs, mod)[: self.M + 1]
            c = R.reduce_rep(c)
        return TruncatedSeries(R, c, a.exp + b.exp, MONOMIAL, poly_ok).in_basis(self.basis)

    __rmul__ = __mul__

    def scale(self, c: Elt) -> "TruncatedSeries":
        """Multiply every coefficient by a ring element."""
        if c.ring is not self.ring:
            if isinstance(c.ring, UnramifiedRing) and c.ring.m == 1:
                c = Elt(self.ring, np.concatenate([c.rep, np.zeros(self.ring.m - 1, dtype=c.rep.dtype)]), c.exp)
            else:
                raise TypeError("scalar from a different ring")
        mod = self.ctx.modulus
        if self.ring.m == 1:
            out = self.coeffs * c.rep[0] % mod
        else:
            out = self.ring.reduce_rep(conv2(self.coeffs, c.rep.reshape(1, -1), mod))
        return self._new(out, exp=self.exp + c.exp)

    def shift(self, e: int) -> "TruncatedSeries":
        """Multiply by ``p**e``."""
        return self._new(self.coeffs, exp=self.exp + e)

    def frob(self, k: int = 1) -> "TruncatedSeries":
        """Apply Frobenius to every coefficient."""
        return self._new(self.ring.frob_rep(self.coeffs, k))

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse of a series with unit constant term."""
        f = self.to_monomial()
        R = f.ring
        c0 = Elt(R, f.coeffs[0])
        if c0.valuation != 0:
            raise NoSolution("constant term is not a unit")
        inv0 = R.inverse(c0)
        h = [inv0]
        for j in range(1, self.M + 1):
            acc = R.zero()
            for i in range(1, j + 1):
                if np.any(f.coeffs[i]):
                    acc = acc + Elt(R, f.coeffs[i]) * h[j - i]
            h.append(-(acc * inv0))
        c = np.array([x.integral_rep() for x in h], dtype=object)
        return TruncatedSeries(R, c, -f.exp, MONOMIAL, False).in_basis(self.basis)

    def integral_coeffs(self):
        """Coefficients of ``p**exp * coeffs`` as integers; requires integrality."""
        if self.exp >= 0:
            return self.coeffs.astype(object) * self.ctx.p**self.exp % self.ctx.modulus
        v = self.valuation_rep()
        if v != INF and v + self.exp < 0:
            raise NoSolution("series is not integral")
        return self.coeffs.astype(object) // self.ctx.p ** (-self.exp)

    def normalized(self) -> "TruncatedSeries":
        """Fold a non-negative exponent into the coefficients."""
        if self.exp >= 0:
            return self._new(self.integral_coeffs(), exp=0)
        return self

    # valuations ------------------------------------------------------------
    def valuation_rep(self):
        return min((vp(int(x), self.ctx.p) for x in self.coeffs.flat), default=INF)

    @property
    def valuation(self):
        v = self.valuation_rep()
        return self.exp + (self.ctx.N if v == INF else v)

    def coefficient_valuations(self):
        p, N = self.ctx.p, self.ctx.N
        return [self.exp + min(vp(int(x), p, N) for x in row) for row in self.coeffs]

    def is_zero(self, prec: int | None = None) -> bool:
        prec = self.ctx.check_prec if prec is None else prec
        return self.valuation >= prec

    def equals(self, other, prec: int | None = None, degree: int | None = None) -> bool:
        """Compare coefficientwise modulo ``p**prec`` through ``degree``."""
        diff = (self.to_monomial() - other).to_monomial()
        if degree is not None:
            diff = diff._new(diff.coeffs[: degree + 1])
        return diff.is_zero(prec)

    # evaluation -----------------------------------------------------------
    def evaluate(self, y: Elt) -> Elt:
        """Value at an element of a cyclotomic ring (or of the coefficient ring)."""
        f = self.to_monomial()
        ring = y.ring
        if isinstance(ring, CyclotomicRing):
            base = ring.base
            lift = ring.from_base
        else:
            base = ring
            lift = lambda c: c  # noqa: E731
        acc = ring.zero()
        deg = f.degree()
        for i in range(deg, -1, -1):
            c = f.coeffs[i]
            if base.m != f.ring.m:
                if f.ring.m != 1:
                    raise TypeError("series ring does not match evaluation ring")
                c = np.concatenate([c, np.zeros(base.m - 1, dtype=c.dtype)])
            acc = acc * y + lift(Elt(base, c))
        return acc.shift(f.exp)

    def evaluation_precision(self, y: Elt) -> int:
        """Absolute precision of :meth:`evaluate` given the truncation."""
        if self.polynomial:
            return self.exp + self.ctx.N
        tail = (self.M + 1) * y.valuation
        return int(min(self.exp + self.ctx.N, self.exp + tail))

    def derivative(self) -> "TruncatedSeries":
        f = self.to_monomial()
        c = np.zeros_like(f.coeffs, dtype=object)
        for i in range(1, self.M + 1):
            c[i - 1] = f.coeffs[i].astype(object) * i
        # coefficient M-1 misses the contribution of X^(M+1) unless polynomial
        return TruncatedSeries(f.ring, c, f.exp, MONOMIAL, f.polynomial).in_basis(self.basis)

    def truncate(self, degree: int) -> "TruncatedSeries":
        f = self.to_monomial()
        return f._new(f.coeffs[: degree + 1], polynomial=True).in_basis(self.basis)

    def to_list(self):
        """Coefficients as nested Python ints (monomial basis, unscaled)."""
        return [[int(x) for x in row] for row in self.to_monomial().coeffs]

    def __repr__(self):
        f = self.to_monomial()
        terms = [f"{[int(x) for x in f.coeffs[i]] if self.ring.m > 1 else int(f.coeffs[i][0])}*X^{i}"
                 for i in range(self.M + 1) if np.any(f.coeffs[i])]
        return f"TruncatedSeries(p^{self.exp} * ({' + '.join(terms) or '0'}))"

    # serialization -----------------------------------------------------
    def to_json(self) -> str:
        ctx = self.ctx
        digits = [[_digits(int(x), ctx.p, ctx.N) for x in row] for row in self.coeffs]
        obj = {
            "p": ctx.p, "N": ctx.N, "M": ctx.M, "slack": ctx.slack,
            "basis": self.basis,
            "ring": {"type": "unramified", "m": self.ring.m, "modulus": [int(c) for c in self.ring.modulus]},
            "exponent": self.exp,
            "polynomial": self.polynomial,
            "coefficients": digits,
        }
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, ring: UnramifiedRing | None = None) -> "TruncatedSeries":
        obj = json.loads(text)
        ctx = PrecisionContext(obj["p"], obj["N"], obj["M"], obj.get("slack", 0))
        if ring is None:
            ring = UnramifiedRing(ctx, obj["ring"]["m"], modulus=obj["ring"]["modulus"])
        elif [int(c) for c in ring.modulus] != obj["ring"]["modulus"] or ring.ctx != ctx:
            raise ValueError("ring descriptor does not match the supplied ring")
        p = ctx.p
        c = np.array([[sum(d * p**i for i, d in enumerate(ds)) for ds in row] for row in obj["coefficients"]],
                     dtype=object)
        return cls(ring, c, obj["exponent"], obj["basis"], obj["polynomial"])


def _digits(x: int, p: int, N: int):
    out = []
    for _ in range(N):
        out.append(x % p)
        x //= p
    return out


def constant(ring: UnramifiedRing, c) -> TruncatedSeries:
    e = c if isinstance(c, Elt) else ring.scalar(c)
    if e.ring is not ring and e.ring.m == 1:
        e = Elt(ring, np.concatenate([e.rep, np.zeros(ring.m - 1, dtype=e.rep.dtype)]), e.exp)
    return TruncatedSeries(ring, e.rep.reshape(1, -1), e.exp, MONOMIAL, True)


def compose(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """``f(g(X))`` truncated at degree ``M``; ``g`` must have zero constant term."""
    g = g.to_monomial()
    if g.exp < 0:
        raise NoSolution("inner series must be integral")
    if np.any(g.coeffs[0] % g.ctx.modulus):
        raise ValueError("inner series must have zero constant term")
    g = g.normalized()
    fm = f.to_monomial()
    ring = g.ring if fm.ring.m == 1 else fm.ring
    if g.ring is not ring:
        g = g.change_ring(ring)
    deg_f = fm.degree()
    deg_g = g.degree()
    poly_ok = fm.polynomial and g.polynomial and deg_f * max(deg_g, 0) <= f.M
    acc = TruncatedSeries.zero(ring)
    for i in range(deg_f, -1, -1):
        acc = acc * g + constant(ring, Elt(fm.ring, fm.coeffs[i]))
    out = TruncatedSeries(ring, acc.coeffs, fm.exp, MONOMIAL, poly_ok)
    return out.in_basis(f.basis)


def dee(f: TruncatedSeries, k: int) -> TruncatedSeries:
    """``((1 + X) d/dX)**k``: scales binomial coefficient ``b_j`` by ``j**k``.

    Negative ``k`` requires ``b_j = 0`` whenever ``p | j``.  On a series that is
    not a polynomial the top ``|k|`` coefficients are contaminated by the
    truncation.
    """
    ctx = f.ctx
    p, mod = ctx.p, ctx.modulus
    b = f.to_binomial()
    c = b.coeffs.astype(object).copy()
    for j in range(f.M + 1):
        if k >= 0:
            c[j] = c[j] * pow(j, k, mod) % mod if (j or k == 0) else 0 * c[j]
        else:
            if j % p == 0:
                if np.any(c[j] % mod):
                    raise ValueError(
                        f"negative power of D needs b_j = 0 for p | j (fails at j={j})")
                continue
            c[j] = c[j] * pow(pow(j, -k, mod), -1, mod) % mod
    return b._new(c).in_basis(f.basis)


def restrict_condition_holds(f: TruncatedSeries, prec: int | None = None) -> bool:
    """Binomial coefficients vanish at every index divisible by p."""
    ctx = f.ctx
    prec = ctx.N if prec is None else prec
    b = f.to_binomial()
    for j in range(0, f.M + 1, ctx.p):
        if b.coefficient(j).valuation < prec:
            return False
    return True


def cyclotomic_poly(ctx: PrecisionContext, m: int, ring: UnramifiedRing | None = None) -> TruncatedSeries:
    """``Phi_m(X) = sum_{i<p} X**(i p**(m-1))``, the p**m-th cyclotomic polynomial."""
    if m < 1:
        raise ValueError("m must be positive")
    p = ctx.p
    deg = (p - 1) * p ** (m - 1)
    if deg > ctx.M:
        raise DegreeOverflow(f"Phi_{m} has degree {deg} > M = {ctx.M}")
    ring = ring or scalar_ring(ctx)
    c = [0] * (deg + 1)
    for i in range(p):
        c[i * p ** (m - 1)] = 1
    return TruncatedSeries.from_ints(ring, c)


class DivisionResult:
    """Outcome of :func:`divide_with_remainder`."""

    def __init__(self, quotient, remainder, remainder_valuation, divisible, achieved_precision,
                 quotient_degree):
        self.quotient = quotient
        self.remainder = remainder
        self.remainder_valuation = remainder_valuation
        self.divisible = divisible
        self.achieved_precision = achieved_precision
        self.quotient_degree = quotient_degree

    def __iter__(self):
        yield self.quotient
        yield self.remainder_valuation

    def __repr__(self):
        return (f"DivisionResult(divisible={self.divisible}, remainder_valuation={self.remainder_valuation}, "
                f"achieved_precision={self.achieved_precision})")


def divide_with_remainder(f: TruncatedSeries, d: TruncatedSeries) -> DivisionResult:
    """Weierstrass-style division ``f = q*d + r`` with ``deg r < s``.

    ``s`` is the smallest degree at which ``d`` attains its minimal coefficient
    valuation.  The remainder valuation is measured on ``f``'s own scale
    (``p**f.exp`` factored out); ``f`` counts as divisible when it reaches
    ``N - slack``.
    """
    ctx = f.ctx
    p, N, mod = ctx.p, ctx.N, ctx.modulus
    f = f.to_monomial()
    d = d.to_monomial()
    if d.ring is not f.ring:
        if d.ring.m == 1:
            d = d.change_ring(f.ring)
        else:
            f = f.change_ring(d.ring)
    R = f.ring
    vals = [min(vp(int(x), p, N) for x in row) for row in d.coeffs]
    v = min(vals)
    if v >= N:
        raise ZeroDivisionError("divisor vanishes modulo p^N")
    s = vals.index(v)
    D = d.coeffs.astype(object) // p**v  # top v digits of D unknown
    F = f.coeffs.astype(object)
    deg_d = d.degree()
    if d.polynomial and deg_d == s:
        # unit leading coefficient: ordinary Euclidean division
        lead_inv = R.inverse(Elt(R, D[s].astype(ctx.dtype)))
        Q = np.zeros_like(F)
        Rm = F.copy()
        top = f.degree() if f.polynomial else f.M
        for i in range(top, s - 1, -1):
            c = Elt(R, Rm[i].astype(ctx.dtype)) * lead_inv
            crep = c.integral_rep().astype(object)
            Q[i - s] = crep
            for j in range(s + 1):
                if np.any(D[j]):
                    prod = R.mul_rep(crep.astype(ctx.dtype), D[j].astype(ctx.dtype)).astype(object)
                    Rm[i - s + j] = (Rm[i - s + j] - prod) % mod
        remainder = Rm
        achieved = N - v if f.polynomial else min(N - v, (f.M + 1 - s) // max(s, 1))
        q_deg = f.M - s
    else:
        A = np.zeros_like(D)
        A[:s] = D[:s]
        B = TruncatedSeries(R, D[s:], 0, MONOMIAL, False)
        Binv = B.inverse().integral_coeffs()
        Binv_s = TruncatedSeries(R, Binv, 0, MONOMIAL, False)
        A_s = TruncatedSeries(R, A, 0, MONOMIAL, d.polynomial)
        F_s = TruncatedSeries(R, F, 0, MONOMIAL, f.polynomial)
        Q = TruncatedSeries.zero(R, polynomial=False)
        for _ in range(N + 1):
            t = (F_s - Q * A_s).integral_coeffs()
            shifted = TruncatedSeries(R, t[s:], 0, MONOMIAL, False)
            Q = shifted * Binv_s
        Dser = TruncatedSeries(R, D, 0, MONOMIAL, d.polynomial)
        remainder = (F_s - Q * Dser).integral_coeffs()
        Q = Q.integral_coeffs()
        q_deg = f.M - s
        Q[q_deg + 1:] = 0
        achieved = min(N - v, (f.M + 1 - s) // max(s, 1)) if s else N - v
        remainder[s:] = 0
    rem_val = min((vp(int(x), p, N) for x in np.asarray(remainder)[:s].flat), default=INF)
    if rem_val == INF:
        rem_val = N
    quotient = TruncatedSeries(R, Q, f.exp - v - d.exp, MONOMIAL,
                               f.polynomial and d.polynomial and deg_d == s)
    rem_series = TruncatedSeries(R, np.asarray(remainder)[:max(s, 1)], f.exp, MONOMIAL, True)
    divisible = rem_val >= ctx.check_prec
    return DivisionResult(quotient, rem_series, rem_val, divisible, achieved, q_deg)
