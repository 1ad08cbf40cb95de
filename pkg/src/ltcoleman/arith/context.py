"""Precision context and p-adic scalars."""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from math import ceil, log

import numpy as np
import sympy

from ..errors import NoSolution

INF = float("inf")


def vp(x, p: int, cap: int | None = None):
    """p-adic valuation of an integer or Fraction; ``cap`` (or inf) for zero."""
    if isinstance(x, Fraction):
        if x == 0:
            return INF if cap is None else cap
        return vp(x.numerator, p) - vp(x.denominator, p)
    x = int(x)
    if x == 0:
        return INF if cap is None else cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v if cap is None else min(v, cap)


@dataclass(frozen=True)
class PrecisionContext:
    """Fixed (p, N, M, slack) for a computation.

    Coefficients are stored modulo ``p**N``; series are truncated after
    ``X**M``.  Checks compare values modulo ``p**(N - slack)``.
    """

    p: int
    N: int
    M: int
    slack: int = 0

    def __post_init__(self):
        if self.p < 3 or not sympy.isprime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.N < 1 or self.M < 1:
            raise ValueError("N and M must be positive")
        if not 0 <= self.slack < self.N:
            raise ValueError("slack must satisfy 0 <= slack < N")

    @property
    def modulus(self) -> int:
        return self.p**self.N

    @property
    def check_prec(self) -> int:
        return self.N - self.slack

    @property
    def dtype(self):
        # int64 is exact as long as a sum of a few thousand products fits
        if self.modulus**2 * 8192 < 2**62:
            return np.int64
        return object

    def with_precision(self, N: int) -> "PrecisionContext":
        return replace(self, N=N, slack=min(self.slack, N - 1))

    def with_degree(self, M: int) -> "PrecisionContext":
        return replace(self, M=M)

    def guard_digits(self) -> int:
        """Extra digits that absorb the division-by-p chains of degree-M solves."""
        return int(ceil(log(self.M + 1, self.p))) + 1

    def guarded(self) -> "PrecisionContext":
        return self.with_precision(self.N + self.guard_digits())


def unit_part(x: Fraction | int, p: int):
    """Return ``(u, e)`` with ``x = u * p**e`` and ``u`` a p-adic unit (Fraction)."""
    x = Fraction(x)
    if x == 0:
        return Fraction(0), 0
    e = vp(x, p)
    return x / Fraction(p) ** e, e


def fraction_mod(x: Fraction | int, p: int, N: int) -> int:
    """Reduce a p-integral rational modulo ``p**N``."""
    x = Fraction(x)
    mod = p**N
    if x.denominator % p == 0:
        raise ValueError(f"{x} is not p-integral")
    return x.numerator * pow(x.denominator, -1, mod) % mod


def signed(x: int, mod: int) -> int:
    """Balanced representative of ``x`` modulo ``mod``."""
    x %= mod
    return x - mod if x > mod // 2 else x


@dataclass(frozen=True)
class PadicScalar:
    """``value * p**exponent`` with ``value`` known modulo ``p**N``."""

    ctx: PrecisionContext
    value: int
    exponent: int = 0

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) % self.ctx.modulus)

    @classmethod
    def from_rational(cls, ctx, x) -> "PadicScalar":
        u, e = unit_part(x, ctx.p)
        if u == 0:
            return cls(ctx, 0, 0)
        return cls(ctx, fraction_mod(u, ctx.p, ctx.N), e)

    @property
    def valuation(self):
        v = vp(self.value, self.ctx.p, self.ctx.N)
        return self.exponent + v

    def is_zero(self, prec: int | None = None) -> bool:
        prec = self.ctx.check_prec if prec is None else prec
        return self.valuation >= prec

    def is_unit(self) -> bool:
        return self.exponent == 0 and self.value % self.ctx.p != 0

    def _align(self, other):
        other = _as_scalar(self.ctx, other)
        e = min(self.exponent, other.exponent)
        p, mod = self.ctx.p, self.ctx.modulus
        a = self.value * p ** (self.exponent - e) % mod
        b = other.value * p ** (other.exponent - e) % mod
        return a, b, e

    def __add__(self, other):
        a, b, e = self._align(other)
        return PadicScalar(self.ctx, a + b, e)

    __radd__ = __add__

    def __neg__(self):
        return PadicScalar(self.ctx, -self.value, self.exponent)

    def __sub__(self, other):
        return self + (-_as_scalar(self.ctx, other))

    def __rsub__(self, other):
        return _as_scalar(self.ctx, other) - self

    def __mul__(self, other):
        other = _as_scalar(self.ctx, other)
        return PadicScalar(self.ctx, self.value * other.value, self.exponent + other.exponent)

    __rmul__ = __mul__

    def inverse(self) -> "PadicScalar":
        v = vp(self.value, self.ctx.p, self.ctx.N)
        if v >= self.ctx.N:
            raise ZeroDivisionError("inverse of p-adic zero")
        u = self.value // self.ctx.p**v
        # the top v digits of the unit part are unknown after the shift
        return PadicScalar(self.ctx, pow(u, -1, self.ctx.modulus), -(self.exponent + v))

    def __truediv__(self, other):
        return self * _as_scalar(self.ctx, other).inverse()

    def to_int(self) -> int:
        """Integer representative; requires a non-negative exponent."""
        if self.exponent < 0:
            raise NoSolution(f"scalar has negative valuation {self.exponent}")
        return self.value * self.ctx.p**self.exponent % self.ctx.modulus

    def to_fraction(self) -> Fraction:
        return Fraction(signed(self.value, self.ctx.modulus)) * Fraction(self.ctx.p) ** self.exponent

    def equals(self, other, prec: int | None = None) -> bool:
        return (self - other).is_zero(prec)

    def __repr__(self):
        return f"PadicScalar({signed(self.value, self.ctx.modulus)} * {self.ctx.p}^{self.exponent} mod {self.ctx.p}^{self.ctx.N})"


def _as_scalar(ctx, x) -> PadicScalar:
    if isinstance(x, PadicScalar):
        return x
    return PadicScalar.from_rational(ctx, x)
