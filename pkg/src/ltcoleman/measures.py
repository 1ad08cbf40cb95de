"""Module-valued measures on ``Z_p`` and ``Z_p^x`` through their Amice transforms.

A measure with values in ``R (x) D`` (``D`` of dimension ``r``) is stored as
``r`` transforms, one per basis vector of ``D``.  Module elements are tuples of
ring elements in the same basis.  ``phi`` acts semilinearly: the rational
matrix on ``D`` and the Frobenius on the coefficient ring.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
import sympy

from .arith.context import vp
from .arith.rings import CyclotomicRing, Elt, UnramifiedRing
from .arith.series import TruncatedSeries, dee, restrict_condition_holds
from .errors import NoSolution

ZP = "Zp"
UNITS = "Zp*"


# module vectors --------------------------------------------------------------

def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(u, c):
    return tuple(a * c for a in u)


def vec_equals(u, v, prec=None):
    return all((a - b).is_zero(prec) for a, b in zip(u, v))


def vec_lift(u, C: CyclotomicRing):
    return tuple(C.from_base(a) if not isinstance(a.ring, CyclotomicRing) else a for a in u)


def vec_valuation(u):
    return min(a.valuation for a in u)


@dataclass(frozen=True)
class PhiAction:
    """``phi(sum c_j e_j) = sum_j frob(c_j) sum_i matrix[i][j] e_i``."""

    matrix: tuple

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(Fraction(x) for x in row) for row in self.matrix))

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def sympy_matrix(self):
        return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in self.matrix])

    def twisted(self, k: int, p: int) -> "PhiAction":
        """Action on ``D (x) t**(-k)``: since ``phi(t) = p t`` it is ``p**(-k) phi``."""
        return self.scaled(Fraction(p) ** (-k))

    def scaled(self, c) -> "PhiAction":
        c = Fraction(c)
        return PhiAction(tuple(tuple(x * c for x in row) for row in self.matrix))

    def apply(self, v, power: int = 1):
        """``phi**power`` (negative powers use the inverse matrix)."""
        if power == 0:
            return tuple(v)
        P = self.sympy_matrix() ** power
        out = []
        fv = [a.frob(power) for a in v]
        for i in range(self.dim):
            acc = None
            for j in range(self.dim):
                c = Fraction(int(sympy.fraction(P[i, j])[0]), int(sympy.fraction(P[i, j])[1]))
                if c:
                    term = fv[j] * c
                    acc = term if acc is None else acc + term
            out.append(acc if acc is not None else fv[i] * 0)
        return tuple(out)

    def geometric_inverse(self, v, k: int, order: int):
        """``(1 - p**k phi)**(-1) v`` where the coefficient Frobenius has order ``order``.

        ``(p**k phi)**order = p**(k order) matrix**order`` is linear, so the
        inverse is ``(sum_{i<order} (p**k phi)**i) (1 - p**(k order) matrix**order)**(-1)``.
        """
        if not v:
            return tuple(v)
        p = v[0].ctx.p
        A = sympy.eye(self.dim) - sympy.Rational(p) ** (k * order) * self.sympy_matrix() ** order
        if A.det() == 0:
            raise NoSolution(f"1 - p^{k} phi is not invertible on this module")
        B = A.inv()
        w = []
        for i in range(self.dim):
            acc = v[0] * 0
            for j in range(self.dim):
                num, den = sympy.fraction(B[i, j])
                c = Fraction(int(num), int(den))
                if c:
                    acc = acc + v[j] * c
            w.append(acc)
        w = tuple(w)
        total = w
        term = w
        for _ in range(1, order):
            term = vec_scale(self.apply(term), Fraction(p) ** k)
            total = vec_add(total, term)
        return total


def frobenius_order(ring) -> int:
    if isinstance(ring, CyclotomicRing):
        return ring.base.m
    return ring.m


# measures ----------------------------------------------------------------------

@dataclass(frozen=True)
class AmiceMeasure:
    """Transforms ``A_j = int (1+X)**x mu_j`` for the coordinates ``mu_j`` of ``mu``."""

    components: tuple
    support: str = ZP

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if self.support not in (ZP, UNITS):
            raise ValueError("support must be 'Zp' or 'Zp*'")
        if self.support == UNITS and not all(restrict_condition_holds(c) for c in comps):
            raise ValueError("transform does not satisfy the unit-support condition")

    @property
    def ring(self) -> UnramifiedRing:
        return self.components[0].ring

    @property
    def ctx(self):
        return self.components[0].ctx

    @property
    def dim(self) -> int:
        return len(self.components)

    def __add__(self, other):
        sup = UNITS if self.support == other.support == UNITS else ZP
        return AmiceMeasure(tuple(a + b for a, b in zip(self.components, other.components)), sup)

    def scaled(self, c):
        return AmiceMeasure(tuple(a * c for a in self.components), self.support)

    def is_unit_supported(self, prec=None) -> bool:
        return all(restrict_condition_holds(c, prec) for c in self.components)


def dirac(ring: UnramifiedRing, a: int, vector=None) -> AmiceMeasure:
    """``delta_a (x) v``: transform ``(1+X)**a v``."""
    M = ring.ctx.M
    mod = ring.ctx.modulus
    if a >= 0:
        coeffs = [comb(a, i) % mod for i in range(M + 1)]
        polynomial = a <= M
    else:
        # (1+X)**a for negative a: general binomial coefficients, integral
        coeffs = []
        c = Fraction(1)
        for i in range(M + 1):
            coeffs.append(int(c) % mod)
            c = c * (a - i) / (i + 1)
        polynomial = False
    base = TruncatedSeries.from_ints(ring, coeffs, polynomial=polynomial)
    vector = (ring.one(),) if vector is None else tuple(vector)
    comps = tuple(base.scale(v) for v in vector)
    sup = UNITS if a % ring.ctx.p else ZP
    return AmiceMeasure(comps, sup)


def tensor(series: TruncatedSeries, vector, support=None) -> AmiceMeasure:
    """``f (x) v`` for a scalar transform ``f`` and a module vector ``v``."""
    comps = tuple(series.scale(v) for v in vector)
    if support is None:
        support = UNITS if restrict_condition_holds(series) else ZP
    return AmiceMeasure(comps, support)


def restrict_to_units(mu: AmiceMeasure) -> AmiceMeasure:
    """Zero the binomial coefficients ``b_j`` with ``p | j``; idempotent."""
    p = mu.ctx.p
    comps = []
    for f in mu.components:
        b = f.to_binomial()
        c = b.coeffs.astype(object).copy()
        c[::p] = 0
        comps.append(b._new(c).in_basis(f.basis))
    return AmiceMeasure(tuple(comps), UNITS)


def _dee(mu: AmiceMeasure, k: int):
    if k < 0 and mu.support != UNITS and not mu.is_unit_supported():
        raise ValueError("negative moments need a measure supported on Z_p^x")
    return [dee(f, k) for f in mu.components]


def transform_value(mu: AmiceMeasure, k: int, point: Elt):
    """``D**k A_mu`` evaluated at ``point`` (an element of a cyclotomic or the coefficient ring)."""
    return tuple(f.evaluate(point) for f in _dee(mu, k))


def transform_value_by_derivatives(mu: AmiceMeasure, k: int, point: Elt):
    """Same value, with ``D = (1+X) d/dX`` applied in the monomial basis (``k >= 0``)."""
    if k < 0:
        raise ValueError("derivative expansion needs k >= 0")
    out = []
    for f in mu.components:
        g = f.to_monomial()
        for _ in range(k):
            d = g.derivative()
            g = d + _times_x(d)
        out.append(g.evaluate(point))
    return tuple(out)


def _times_x(f: TruncatedSeries) -> TruncatedSeries:
    c = np.zeros_like(f.coeffs)
    c[1:] = f.coeffs[:-1]
    return f._new(c)


def moment(mu: AmiceMeasure, k: int):
    """``D**k A_mu (0) = int x**k mu``."""
    return tuple(f.coefficient(0) for f in (g.to_monomial() for g in _dee(mu, k)))


def full_moment(mu: AmiceMeasure, k: int, phi: PhiAction):
    """``int_{Z_p} x**k mu~ = (1 - p**k phi)**(-1) D**k A_mu(0)`` for the phi-invariant lift."""
    if mu.support != UNITS:
        raise ValueError("full_moment needs a measure supported on Z_p^x")
    return phi.geometric_inverse(moment(mu, k), k, frobenius_order(mu.ring))


def epsilon_moment(mu: AmiceMeasure, n: int, k: int, phi: PhiAction, C: CyclotomicRing | None = None,
                   literal: bool = False):
    """``int_{Z_p} eps(x/p**n) x**k mu~`` in ``C (x) D`` with ``C`` of level ``n``.

    ``sum_{i<n} p**(ik) phi**i (D**k A(zeta_{p^(n-i)} - 1)) + p**(nk) phi**n (1 - p**k phi)**(-1) D**k A(0)``.
    The tail carries ``phi**n`` as the decomposition of ``Z_p`` into
    ``p**i Z_p^x`` pieces requires; ``literal=True`` drops it.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    C = C or CyclotomicRing(mu.ring, n)
    if C.n != n:
        raise ValueError("cyclotomic ring level must equal n")
    p = C.ctx.p
    total = tuple(C.zero() for _ in range(mu.dim))
    dk = _dee(mu, k)
    for i in range(n):
        point = C.zeta(p**i) - 1
        val = tuple(f.evaluate(point) for f in dk)
        total = vec_add(total, vec_scale(phi.apply(val, i), Fraction(p) ** (i * k)))
    tail = full_moment(mu, k, phi)
    if not literal:
        tail = phi.apply(tail, n)
    tail = vec_lift(tail, C)
    return vec_add(total, vec_scale(tail, Fraction(p) ** (n * k)))


def moment_precision(mu: AmiceMeasure, k: int, point_valuation=None) -> int:
    """Conservative absolute precision of ``D**k A_mu`` values given the truncation.

    Polynomial transforms are exact.  Otherwise ``D**k`` for ``k > 0``
    contaminates the top ``k`` coefficients, and ``D**k`` for ``k < 0`` sees
    the truncation through Mahler coefficients of ``x**k`` on residue discs,
    which decay like ``j / (p (p - 1))``.
    """
    ctx = mu.ctx
    exp = min(f.exp for f in mu.components)
    if all(f.polynomial for f in mu.components):
        return ctx.N + exp
    M, p = ctx.M, ctx.p
    if k < 0:
        bound = (M + 1) // (p * (p - 1))
    else:
        bound = ctx.N
        if point_valuation is not None:
            bound = int((M + 1 - max(k, 0)) * point_valuation)
    return min(ctx.N, bound) + exp
