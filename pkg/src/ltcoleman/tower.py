"""The torsion tower ``K_n = K[X]/E_n`` of a Lubin-Tate group over ``K = Q_p``.

Elements are integer coordinates in the power basis of ``pi_n`` with a shared
power-of-p exponent.  Relative traces never enumerate conjugates: ``x`` is
rewritten in the integral basis ``pi_n**j g(pi_n)**k`` and traced through the
power sums of the relative minimal polynomial ``g(X) - pi_{n-1}``.
"""
from __future__ import annotations

import csv
import io
import warnings
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd

import numpy as np

from .arith import poly
from .arith.context import INF, PadicScalar, PrecisionContext, fraction_mod, unit_part, vp
from .arith.linalg import echelon, solve_mod
from .errors import IdentityFailure, NoSolution, PrecisionAmbiguous
from .lubin_tate import FrobeniusLift, mult_by, torsion_poly


class GoodLiftWarning(UserWarning):
    """The closed forms for ``pi_n'`` failed: the lift is not good."""


class TowerLevel:
    """``K_n`` as ``Q_p[X]/E_n``; level 0 is ``Q_p`` itself (``E_0 = X``)."""

    def __init__(self, lift: FrobeniusLift, n: int):
        if n < 0:
            raise ValueError("level must be non-negative")
        self.lift = lift
        self.ctx = lift.ctx
        self.n = n
        self.E = [0, 1] if n == 0 else torsion_poly(lift, n)
        self.d = len(self.E) - 1

    def __repr__(self):
        return f"TowerLevel(p={self.ctx.p}, n={self.n}, degree={self.d})"

    @cached_property
    def lower(self) -> "TowerLevel":
        if self.n == 0:
            raise ValueError("level 0 has no lower level")
        return tower_level(self.lift, self.n - 1)

    # construction -------------------------------------------------------
    def element(self, coords, exp: int = 0) -> "TowerElement":
        c = [int(x) for x in coords]
        if len(c) > self.d:
            c = poly.rem(c, self.E, self.ctx.modulus)
        return TowerElement(self, c + [0] * (self.d - len(c)), exp)

    def scalar(self, x) -> "TowerElement":
        x = x if isinstance(x, PadicScalar) else PadicScalar.from_rational(self.ctx, x)
        return self.element([x.value], x.exponent)

    def zero(self):
        return self.element([0])

    def one(self):
        return self.element([1])

    def uniformizer(self) -> "TowerElement":
        """``pi_n`` (zero at level 0)."""
        return self.element([0, 1]) if self.n > 0 else self.zero()

    def from_poly(self, f) -> "TowerElement":
        return self.element(poly.rem([int(c) for c in f], self.E, self.ctx.modulus))

    # structure ----------------------------------------------------------
    def mul_coords(self, a, b):
        return _pad(poly.rem(poly.mul(a, b, self.ctx.modulus), self.E, self.ctx.modulus), self.d)

    @cached_property
    def g_image(self):
        """Coordinates of ``g(pi_n) = pi_{n-1}``."""
        return _pad(poly.rem(self.lift.int_poly(), self.E, self.ctx.modulus), self.d)

    def embed(self, y: "TowerElement") -> "TowerElement":
        """Image of a level ``n - 1`` element under ``pi_{n-1} -> g(pi_n)``."""
        if y.level.n == self.n:
            return y
        if y.level.n < self.n - 1:
            return self.embed(self.lower.embed(y))
        if y.level.n != self.n - 1:
            raise ValueError("cannot embed from a higher level")
        mod = self.ctx.modulus
        acc = [0] * self.d
        for c in reversed(y.coords):
            acc = self.mul_coords(acc, self.g_image)
            acc[0] = (acc[0] + c) % mod
        return TowerElement(self, acc, y.exp)

    @cached_property
    def relative_degree(self) -> int:
        return self.d // self.lower.d

    @cached_property
    def _basis_change(self):
        """Columns: ``pi_n**j * g(pi_n)**k`` for ``j < e``, ``k < d_{n-1}``; index ``j + e k``."""
        e = self.relative_degree
        mod = self.ctx.modulus
        cols = []
        gk = _pad([1], self.d)
        for _ in range(self.lower.d):
            pj = gk
            for _ in range(e):
                cols.append(pj)
                pj = self.mul_coords(pj, _pad([0, 1], self.d))
            gk = self.mul_coords(gk, self.g_image)
        return [[cols[c][r] % mod for c in range(self.d)] for r in range(self.d)]

    def relative_coordinates(self, x: "TowerElement"):
        """Level ``n-1`` elements ``y_j`` with ``x = sum_j pi_n**j y_j(g(pi_n))``."""
        e = self.relative_degree
        sol = solve_mod(self._basis_change, x.coords, self.ctx.p, self.ctx.N)
        lower = self.lower
        return [TowerElement(lower, [sol[j + e * k] for k in range(lower.d)], x.exp) for j in range(e)]

    @cached_property
    def relative_power_sums(self):
        """``Tr_{n/n-1}(pi_n**j)`` for ``j < e`` as level ``n-1`` elements."""
        lower = self.lower
        p, mod = self.ctx.p, self.ctx.modulus
        e = self.relative_degree
        if self.n == 1:
            coeffs = [lower.scalar(c) for c in self.E]  # monic, integral
        else:
            gc = self.lift.int_poly()
            lead_inv = pow(gc[-1], -1, mod)
            coeffs = [lower.scalar(c * lead_inv) for c in gc]
            coeffs[0] = coeffs[0] - lower.uniformizer() * lead_inv
        # Newton identities for X^e + a_{e-1} X^{e-1} + ... + a_0
        a = coeffs
        s = [lower.scalar(e)]
        for k in range(1, e):
            acc = a[e - k] * k
            for i in range(1, k):
                acc = acc + a[e - i] * s[k - i]
            s.append(-acc)
        return s

    def trace_down(self, x: "TowerElement") -> "TowerElement":
        """``Tr_{K_n/K_{n-1}}(x)`` in level ``n - 1`` coordinates."""
        if self.n == 0:
            raise ValueError("level 0 has no trace down")
        ys = self.relative_coordinates(x)
        out = self.lower.zero()
        for y, t in zip(ys, self.relative_power_sums):
            out = out + y * t
        return out

    def trace_to_base(self, x: "TowerElement") -> "TowerElement":
        while x.level.n > 0:
            x = x.level.trace_down(x)
        return x

    # Galois action ------------------------------------------------------
    def units(self):
        """Representatives of ``(Z/p^n)^x`` in ``[1, p^n]``, ascending."""
        q = self.ctx.p ** self.n
        return [a for a in range(1, q + 1) if a % self.ctx.p] if self.n else [1]

    def conjugate_image(self, a: int):
        """Coordinates of ``[a]_F(pi_n)``."""
        return _conjugate_image(self.lift, self.n, a % self.ctx.p ** self.n or self.ctx.p ** self.n)

    def galois_act(self, a: int, x: "TowerElement") -> "TowerElement":
        if gcd(int(a), self.ctx.p) != 1:
            raise ValueError("Galois action needs a unit a")
        if self.n == 0:
            return x
        img = self.conjugate_image(int(a))
        mod = self.ctx.modulus
        acc = [0] * self.d
        for c in reversed(x.coords):
            acc = self.mul_coords(acc, img)
            acc[0] = (acc[0] + c) % mod
        return TowerElement(self, acc, x.exp)

    def conjugates(self, x: "TowerElement"):
        return [self.galois_act(a, x) for a in self.units()]

    def check_uniformizer(self) -> bool:
        """``E_n(pi_n) = 0`` and ``g(pi_n)`` is a root of ``E_{n-1}``."""
        pi = self.uniformizer()
        ok = self.from_poly(self.E).is_zero()
        if self.n > 0:
            Eprev = self.lower.E
            gpi = TowerElement(self, self.g_image)
            ok = ok and evaluate_poly(Eprev, gpi).is_zero()
        del pi
        return ok


@lru_cache(maxsize=None)
def tower_level(lift: FrobeniusLift, n: int) -> TowerLevel:
    return TowerLevel(lift, n)


@lru_cache(maxsize=None)
def _conjugate_image(lift: FrobeniusLift, n: int, a: int):
    level = tower_level(lift, n)
    ctx, mod = lift.ctx, lift.ctx.modulus
    if lift.is_multiplicative():
        f = poly.powmod([1, 1], a, level.E, mod)
        f = poly.add(f, [-1], mod)
        return tuple(_pad(poly.rem(f, level.E, mod), level.d))
    # [a]_F truncated where pi_n**deg already lies in p**N O
    deg = ctx.N * level.d + 1
    series = mult_by(a, lift, degree=deg)
    coeffs = [row[0] for row in series.to_list()]
    return tuple(_pad(poly.rem(coeffs, level.E, mod), level.d))


def evaluate_poly(f, x: "TowerElement") -> "TowerElement":
    acc = x.level.zero()
    for c in reversed(list(f)):
        acc = acc * x + x.level.scalar(int(c))
    return acc


def _pad(c, d):
    c = list(c)[:d]
    return c + [0] * (d - len(c))


class TowerElement:
    """``p**exp * sum_i coords[i] pi_n**i`` with coordinates modulo ``p**N``."""

    __slots__ = ("level", "coords", "exp")

    def __init__(self, level: TowerLevel, coords, exp: int = 0):
        mod = level.ctx.modulus
        self.level = level
        self.coords = [int(c) % mod for c in coords]
        self.exp = int(exp)

    @property
    def ctx(self) -> PrecisionContext:
        return self.level.ctx

    def _lift_to(self, other):
        if not isinstance(other, TowerElement):
            return self, self.level.scalar(other)
        if other.level.n > self.level.n:
            return other.level.embed(self), other
        if other.level.n < self.level.n:
            return self, self.level.embed(other)
        return self, other

    def _aligned(self, other):
        a, b = self._lift_to(other)
        e = min(a.exp, b.exp)
        p, mod = self.ctx.p, self.ctx.modulus
        ca = [x * p ** (a.exp - e) % mod for x in a.coords]
        cb = [x * p ** (b.exp - e) % mod for x in b.coords]
        return a.level, ca, cb, e

    def __add__(self, other):
        lvl, a, b, e = self._aligned(other)
        return TowerElement(lvl, [x + y for x, y in zip(a, b)], e)

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.level, [-x for x in self.coords], self.exp)

    def __sub__(self, other):
        return self + (-other if isinstance(other, TowerElement) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, PadicScalar)):
            s = other if isinstance(other, PadicScalar) else PadicScalar.from_rational(self.ctx, other)
            return TowerElement(self.level, [c * s.value for c in self.coords], self.exp + s.exponent)
        a, b = self._lift_to(other)
        return TowerElement(a.level, a.level.mul_coords(a.coords, b.coords), a.exp + b.exp)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self.level.one()
        for _ in range(k):
            out = out * self
        return out

    @property
    def valuation(self):
        """Normalised so that ``v(p) = 1``; the power basis of an Eisenstein root is orthogonal."""
        p, N, d = self.ctx.p, self.ctx.N, self.level.d
        best = INF
        for i, c in enumerate(self.coords):
            v = vp(c, p, N)
            if v < N:
                best = min(best, self.exp + v + Fraction(i, d))
        return best if best != INF else Fraction(self.exp + N)

    def is_zero(self, prec: int | None = None) -> bool:
        prec = self.ctx.check_prec if prec is None else prec
        return all(self.exp + vp(c, self.ctx.p, self.ctx.N) >= prec for c in self.coords)

    def equals(self, other, prec: int | None = None) -> bool:
        return (self - other).is_zero(prec)

    def galois(self, a: int) -> "TowerElement":
        return self.level.galois_act(a, self)

    def trace_down(self) -> "TowerElement":
        return self.level.trace_down(self)

    def to_fractions(self):
        """Balanced rational coordinates."""
        mod = self.ctx.modulus
        scale = Fraction(self.ctx.p) ** self.exp
        return [Fraction(c - mod if c > mod // 2 else c) * scale for c in self.coords]

    def __repr__(self):
        return f"TowerElement(n={self.level.n}, p^{self.exp} * {self.coords})"


def galois_act(a: int, x: TowerElement) -> TowerElement:
    return x.level.galois_act(a, x)


def trace_down(x: TowerElement) -> TowerElement:
    return x.level.trace_down(x)


def pi_prime(level: TowerLevel) -> TowerElement:
    """``pi_n' = pi_n - (1/p) Tr(pi_n)`` (``1/(p-1)`` at ``n = 1``; ``pi_0' = 1``).

    The closed forms ``pi_n + 1`` and ``pi_1 + p/(p-1)`` are compared and a
    :class:`GoodLiftWarning` is issued when they fail.
    """
    if level.n == 0:
        return level.one()
    p = level.ctx.p
    pi = level.uniformizer()
    tr = level.embed(level.trace_down(pi))
    scale = Fraction(1, p - 1) if level.n == 1 else Fraction(1, p)
    out = pi - tr * scale
    if not out.equals(closed_form_pi_prime(level)):
        warnings.warn(f"closed form for pi_{level.n}' fails; the lift is not good", GoodLiftWarning,
                      stacklevel=2)
    return out


def closed_form_pi_prime(level: TowerLevel) -> TowerElement:
    p = level.ctx.p
    pi = level.uniformizer()
    if level.n == 0:
        return level.one()
    return pi + (Fraction(p, p - 1) if level.n == 1 else 1)


def closed_forms_hold(lift: FrobeniusLift, levels) -> dict:
    out = {}
    for n in levels:
        L = tower_level(lift, n)
        pi = L.uniformizer()
        out[n] = {
            "trace_pi": L.trace_down(pi).to_fractions()[0] if L.lower.d == 1 else None,
            "trace_pi_is_minus_p": L.trace_down(pi).equals(L.lower.scalar(-p_of(lift))),
            "closed_form": pi_prime_silent(L).equals(closed_form_pi_prime(L)),
            "trace_pi_prime_zero": L.trace_down(pi_prime_silent(L)).is_zero(),
        }
    return out


def eta_root_check(e, n: int) -> dict:
    """Whether ``eta^(phi**(-n))(zeta_{p^n} - 1)`` is a root of ``E_n``, with the precision used.

    The point lives in the cyclotomic ring over ``e.ring``; ``E_n`` has integer
    coefficients so the evaluation is a plain Horner scheme.
    """
    from .arith.rings import CyclotomicRing

    lift = e.lift
    C = CyclotomicRing(e.ring, n)
    s = e.series.frob(-n)
    x = C.zeta(1) - 1
    pt = s.evaluate(x)
    acc = C.zero()
    for c in reversed(tower_level(lift, n).E):
        acc = acc * pt + int(c)
    prec = min(lift.ctx.check_prec, s.evaluation_precision(x))
    return {"level": n, "precision": prec, "holds": acc.is_zero(prec)}


def p_of(lift):
    return lift.ctx.p


def pi_prime_silent(level: TowerLevel) -> TowerElement:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GoodLiftWarning)
        return pi_prime(level)


def coordinate_matrix(vectors, level: TowerLevel):
    """Integer rows of coordinates at ``level`` on a common exponent."""
    vs = [level.embed(v) for v in vectors]
    e = min(v.exp for v in vs)
    p = level.ctx.p
    return [[c * p ** (v.exp - e) for c in v.coords] for v in vs], e


def span_rank(vectors, level: TowerLevel) -> int:
    """K-rank of ``vectors`` by valuation-pivoted elimination.

    Pivots of valuation in ``[N - slack, N)`` raise :class:`PrecisionAmbiguous`.
    """
    ctx = level.ctx
    rows, e = coordinate_matrix(vectors, level)
    if e < 0:
        # a common p-power scaling does not change the rank, but it does cost digits
        zero_prec = ctx.check_prec + e
    else:
        zero_prec = ctx.check_prec
    if not rows:
        return 0
    rank, *_ = echelon(rows, ctx.p, ctx.N, zero_prec=zero_prec)
    return rank


def conjugate_family(x: TowerElement, level: TowerLevel | None = None):
    """``{x^sigma : sigma in G_n}`` for ``G_n = Gal(K_n/K)``, ordered by ``a`` ascending."""
    level = level or x.level
    x = level.embed(x)
    return level.conjugates(x)


def trace_kernel_dim(lift: FrobeniusLift, n: int) -> int:
    """``dim K^(n)``: ``[K_n:K] - [K_{n-1}:K]`` (``1`` for ``n = 0``)."""
    if n == 0:
        return 1
    return tower_level(lift, n).d - tower_level(lift, n - 1).d


def spanning_trial(lift: FrobeniusLift, S, top: int, units):
    """Rank of the conjugate span of ``sum_{i in S} u_i pi_i'`` inside ``K_top``."""
    level = tower_level(lift, top)
    alpha = level.zero()
    for i, u in zip(sorted(S), units):
        alpha = alpha + level.embed(pi_prime_silent(tower_level(lift, i))) * u
    fam = conjugate_family(alpha, level)
    return span_rank(fam, level), sum(trace_kernel_dim(lift, i) for i in S)


# CSV emitters -----------------------------------------------------------------

def traces_table(lift: FrobeniusLift, levels):
    rows = []
    for n in levels:
        L = tower_level(lift, n)
        pi = L.uniformizer()
        pp = pi_prime_silent(L)
        tr_pi = L.trace_down(pi)
        tr_pp = L.trace_down(pp)
        rows.append({
            "level": n,
            "degree": L.d,
            "trace_pi": _fmt(tr_pi),
            "trace_pi_prime": _fmt(tr_pp),
            "trace_pi_prime_zero": tr_pp.is_zero(),
            "closed_form_holds": pp.equals(closed_form_pi_prime(L)),
        })
    return rows


def spans_table(lift: FrobeniusLift, top: int, trials: int, seed: int):
    import itertools
    import random

    rng = random.Random(seed)
    p = lift.ctx.p
    rows = []
    for r in range(top + 1):
        for S in itertools.combinations(range(top + 1), r):
            if not S:
                continue
            for t in range(trials):
                units = [rng.randrange(1, lift.ctx.modulus) for _ in S]
                units = [u if u % p else u + 1 for u in units]
                try:
                    rank, expected = spanning_trial(lift, S, top, units)
                    status = "ok" if rank == expected else "mismatch"
                except PrecisionAmbiguous:
                    rank, expected, status = None, sum(trace_kernel_dim(lift, i) for i in S), "ambiguous"
                rows.append({"S": "{" + ",".join(map(str, S)) + "}", "trial": t, "rank": rank,
                             "expected": expected, "status": status})
    return rows


def _fmt(x: TowerElement) -> str:
    return " ".join(str(c) for c in x.to_fractions())


def to_csv(rows) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
