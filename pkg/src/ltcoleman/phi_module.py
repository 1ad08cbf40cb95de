"""The Dieudonne module of a weight-``k`` form with ``a_p = 0``.

``D`` has basis ``(omega, phi omega)`` with ``phi**2 = -p**(k-3)``; the
filtration step ``D**0`` is the line through ``omega``.  Coordinates may be
rationals, p-adic scalars, unramified or cyclotomic ring elements, or tower
elements, so that ``K_n (x) D`` is covered by the same class.

``phi`` acts on ``D`` only unless ``semilinear=True``, in which case
coefficients with a ``frob`` method are also hit by the Frobenius.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import sympy

from .arith.context import INF, PadicScalar, vp
from .arith.rings import CyclotomicRing, Elt
from .errors import PrecisionAmbiguous
from .tower import TowerElement


def _frob(c, k: int):
    if k and hasattr(c, "frob"):
        return c.frob(k)
    return c


def _frob_order(c) -> int:
    """Order of the coefficient Frobenius (1 when it acts trivially)."""
    if isinstance(c, Elt):
        ring = c.ring.base if isinstance(c.ring, CyclotomicRing) else c.ring
        return getattr(ring, "m", 1)
    return 1


def _valuation(c, p: int):
    if isinstance(c, (int, Fraction)):
        return vp(Fraction(c), p)
    return c.valuation


def _precision(c):
    """Absolute precision of a coefficient (inf for exact rationals)."""
    if isinstance(c, (int, Fraction)):
        return INF
    if isinstance(c, PadicScalar):
        return c.ctx.N + c.exponent
    return c.ctx.N + c.exp


def _is_zero(c, prec=None) -> bool:
    if isinstance(c, (int, Fraction)):
        return c == 0
    return c.is_zero(prec)


def _trace(c):
    if isinstance(c, TowerElement):
        return c.level.trace_to_base(c)
    if isinstance(c, Elt) and isinstance(c.ring, CyclotomicRing):
        return c.ring.trace(c)
    return c


def _galois(c, a: int):
    if isinstance(c, TowerElement):
        return c.galois(a)
    if isinstance(c, Elt) and isinstance(c.ring, CyclotomicRing):
        return c.ring.galois(c, a)
    return c


@dataclass(frozen=True)
class DieudonneModule:
    """``D(V)`` for weight ``k``; ``scale`` twists ``phi`` to ``scale * phi``.

    The twist ``D (x) t**(-j)`` has ``scale = p**(-j)``.
    """

    p: int
    k: int
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("weight must be at least 2")
        object.__setattr__(self, "scale", Fraction(self.scale))

    @property
    def c(self) -> Fraction:
        """``phi**2 = -c``: ``c = scale**2 p**(k-3)``."""
        return self.scale**2 * Fraction(self.p) ** (self.k - 3)

    @property
    def matrix(self):
        """Columns are the images of ``omega`` and ``phi omega``."""
        s = self.scale
        return ((Fraction(0), -s * Fraction(self.p) ** (self.k - 3)), (s, Fraction(0)))

    def sympy_matrix(self):
        return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in self.matrix])

    @property
    def slope(self) -> Fraction:
        """``r(V) = (k - 1)/2 - 1``."""
        return Fraction(self.k - 1, 2) - 1

    def twisted(self, j: int) -> "DieudonneModule":
        return DieudonneModule(self.p, self.k, self.scale * Fraction(self.p) ** (-j))

    @property
    def untwisted(self) -> "DieudonneModule":
        return DieudonneModule(self.p, self.k)

    def vector(self, a, b=0) -> "DieudonneVector":
        return DieudonneVector(self, a, b)

    @property
    def omega(self) -> "DieudonneVector":
        return self.vector(Fraction(1), Fraction(0))

    @property
    def phi_omega(self) -> "DieudonneVector":
        return self.vector(Fraction(0), Fraction(1))

    def xi(self, sign: str) -> "DieudonneVector":
        """``xi+ = phi(omega)``, ``xi- = omega``."""
        if sign == "+":
            return self.phi_omega
        if sign == "-":
            return self.omega
        raise ValueError("sign must be '+' or '-'")

    @property
    def lambda_value(self) -> Fraction:
        """``(p**(2-k) + 1) / (p**(k-3) + 1)``."""
        p = Fraction(self.p)
        return (p ** (2 - self.k) + 1) / (p ** (self.k - 3) + 1)

    # operators ------------------------------------------------------------

    def phi(self, v: "DieudonneVector", r: int = 1, semilinear: bool = False) -> "DieudonneVector":
        """``phi**r``; ``phi**(2m) = (-c)**m`` and ``phi**(2m+1) = (-c)**m phi``."""
        self._check(v)
        a, b = v.a, v.b
        if semilinear:
            a, b = _frob(a, r), _frob(b, r)
        m, odd = divmod(r, 2)
        f = (-self.c) ** m
        if not odd:
            return self.vector(a * f, b * f)
        s = self.scale
        # phi(a omega + b phi omega) = -c/s b omega + s a phi omega
        return self.vector(b * (-self.c / s * f), a * (s * f))

    def phi_inverse(self, v, semilinear: bool = False):
        return self.phi(v, -1, semilinear)

    def one_minus_phi(self, v, semilinear: bool = False):
        return v - self.phi(v, 1, semilinear)

    def one_minus_phi_inverse(self, v, semilinear: bool = False):
        """``(1 - phi)**(-1)``.

        Linearly this is ``(1 + phi) / (1 + c)``.  With a Frobenius of order
        ``m`` on the coefficients, ``phi**(2m) = (-c)**m`` is linear and
        ``(1 - phi)**(-1) = (1 - (-c)**m)**(-1) sum_{i < 2m} phi**i``.
        """
        self._check(v)
        m = 1
        if semilinear:
            m = max(_frob_order(v.a), _frob_order(v.b))
        denom = 1 - (-self.c) ** m
        total = v
        term = v
        for _ in range(1, 2 * m):
            term = self.phi(term, 1, semilinear)
            total = total + term
        return total.scaled(1 / denom)

    def combo(self, v, semilinear: bool = False):
        """``(1 - phi)**(-1) (1 - phi**(-1)/p)`` in closed form.

        ``(1 - 1/p + (s + p**(2-k)/s) phi) / (1 + c)``.  Semilinearly the
        closed form is exact only when the coefficient Frobenius squares to
        the identity; :meth:`combo_direct` composes the operators instead.
        """
        self._check(v)
        p = Fraction(self.p)
        s = self.scale
        lin = 1 - 1 / p
        coef = s + p ** (2 - self.k) / s
        out = v.scaled(lin) + self.phi(v, 1, semilinear).scaled(coef)
        return out.scaled(1 / (1 + self.c))

    def combo_direct(self, v, semilinear: bool = False):
        w = v - self.phi(v, -1, semilinear).scaled(Fraction(1, self.p))
        return self.one_minus_phi_inverse(w, semilinear)

    def apply(self, op: str, v, semilinear: bool = False):
        ops = {
            "phi": lambda x: self.phi(x, 1, semilinear),
            "phi_inv": lambda x: self.phi(x, -1, semilinear),
            "one_minus_phi_inv": lambda x: self.one_minus_phi_inverse(x, semilinear),
            "combo": lambda x: self.combo(x, semilinear),
        }
        if op not in ops:
            raise ValueError(f"unknown operator {op!r}")
        return ops[op](v)

    def matrix_of(self, op: str):
        """Rational matrix of a linear operator, computed from its action on the basis."""
        cols = [self.apply(op, e) for e in (self.omega, self.phi_omega)]
        return sympy.Matrix([[sympy.nsimplify(col.a if i == 0 else col.b) for col in cols] for i in range(2)])

    # filtration and pairing -----------------------------------------------

    def in_filtration(self, v, slack: int | None = None) -> bool:
        """Whether ``v`` lies in ``K (x) D**0``, i.e. its ``phi omega`` coordinate vanishes.

        A coordinate known to absolute precision ``P`` is zero if it vanishes
        there, non-zero if its valuation is below ``P - slack``, and
        undecidable in between.
        """
        self._check(v)
        b = v.b
        if isinstance(b, (int, Fraction)):
            return b == 0
        P = _precision(b)
        if slack is None:
            slack = b.ctx.slack
        val = _valuation(b, self.p)
        if val >= P:
            return True
        if val < P - slack:
            return False
        raise PrecisionAmbiguous(f"phi-omega coordinate has valuation {val} within {slack} digits of precision {P}")

    @staticmethod
    def parity(r: int) -> bool:
        """``phi**r(omega)`` lies in ``D**0`` exactly when ``r`` is even."""
        return r % 2 == 0

    def pair_D(self, x, y):
        """``[a omega + b phi omega, c omega + d phi omega] = ad - bc`` over the coefficient ring."""
        self._check(x)
        self._check(y)
        return x.a * y.b - x.b * y.a

    def pair(self, x, y):
        """The ``D``-pairing followed by the trace of the coefficient field down to the base."""
        for c in (x.a, x.b, y.a, y.b):
            for d in (x.a, y.a):
                if isinstance(c, TowerElement) and isinstance(d, TowerElement) and c.level.n != d.level.n:
                    raise ValueError("level mismatch")
        return _trace(self.pair_D(x, y))

    def _check(self, v):
        if v.module.p != self.p or v.module.k != self.k:
            raise ValueError("vector belongs to a different module")


@dataclass(frozen=True)
class DieudonneVector:
    """``a omega + b phi omega``."""

    module: DieudonneModule
    a: object
    b: object = 0

    def __add__(self, other):
        return DieudonneVector(self.module, self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        return DieudonneVector(self.module, self.a - other.a, self.b - other.b)

    def __neg__(self):
        return DieudonneVector(self.module, -self.a, -self.b)

    def scaled(self, c) -> "DieudonneVector":
        return DieudonneVector(self.module, _mul(self.a, c), _mul(self.b, c))

    def tensor(self, c) -> "DieudonneVector":
        """``c (x) v`` for a coefficient ``c``."""
        return DieudonneVector(self.module, _mul(c, self.a), _mul(c, self.b))

    def frob(self, k: int = 1) -> "DieudonneVector":
        return DieudonneVector(self.module, _frob(self.a, k), _frob(self.b, k))

    def galois(self, a: int) -> "DieudonneVector":
        return DieudonneVector(self.module, _galois(self.a, a), _galois(self.b, a))

    def in_module(self, module: DieudonneModule) -> "DieudonneVector":
        """Same coordinates viewed in a twist of the module."""
        return DieudonneVector(module, self.a, self.b)

    def is_zero(self, prec=None) -> bool:
        return _is_zero(self.a, prec) and _is_zero(self.b, prec)

    def equals(self, other, prec=None) -> bool:
        return (self - other).is_zero(prec)


def _mul(x, c):
    """Product with the non-rational factor first so ring types control coercion."""
    if isinstance(x, (int, Fraction)) and not isinstance(c, (int, Fraction)):
        return c * x if x != 0 else c * 0
    return x * c
